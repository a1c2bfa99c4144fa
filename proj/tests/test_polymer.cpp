#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gn/polymer.hpp"
#include "oracles.hpp"

using namespace gn;

TEST_CASE("theta values") {
  CHECK(theta_exact(0, 2, 2) == 1);
  CHECK(theta_exact(1, 2, 2) == 1);
  CHECK(theta_exact(3, 2, 2) == 16);
  for (int L : {2, 3})
    for (std::uint64_t s = 0; s <= 2000; ++s) CHECK(theta_exact(s, L, 2) == oracle::theta(s, L, 2));
  CHECK_THROWS_AS(theta_exact(1ULL << 62, 2, 6), std::overflow_error);
}

TEST_CASE("theta bound") {
  CHECK(theta_bound_check(WeightParams::defaults(2, 2), 10000));
  CHECK(theta_bound_check(WeightParams::defaults(3, 2), 10000));
  CHECK(theta_bound_check(WeightParams::defaults(2, 2), 1));
}

TEST_CASE("theta scaling holds above L and fails at s = L") {
  for (int L : {2, 3}) {
    std::uint64_t hi = 1;
    for (int i = 0; i < 6; ++i) hi *= static_cast<std::uint64_t>(L);
    CHECK(theta_scaling_violation(L, 2, static_cast<std::uint64_t>(L) + 1, hi) == 0);
    // θ(1) = 1 = θ(L), so the identity cannot hold at 2 ≤ s ≤ L
    CHECK(theta_scaling_violation(L, 2, 2, hi) == 2);
  }
}

TEST_CASE("paved sets") {
  PavedSet X(2, 6, {{7, -1}, {1, 5}, {0, 0}});
  CHECK(X.size() == 2);
  CHECK(X.contains({1, 5}));
  CHECK(X.translated({5, 1}).contains({0, 0}));
  CHECK(torus_distance({0, 0}, {5, 3}, 6) == 3);
  CHECK_THROWS(PavedSet(2, 6, {{1}}));
}

TEST_CASE("big theta small cases") {
  const auto p = WeightParams::defaults(2, 2);
  CHECK(big_theta(PavedSet(2, 8, {{3, 3}}), p) == 1.0);
  CHECK(big_theta(PavedSet(2, 8, {{3, 3}, {3, 4}}), p) == 1.0);
  // collinear at distances (1, 1, 2): the MST uses the unit edges
  const PavedSet line(2, 8, {{0, 0}, {1, 0}, {2, 0}});
  CHECK(big_theta(line, p) == 1.0);
  CHECK(oracle::tree_infimum(line, 2) == 1.0);
  // far pair: θ(3) = 16
  CHECK(big_theta(PavedSet(2, 8, {{0, 0}, {3, 0}}), p) == 16.0);
}

TEST_CASE("big theta equals the spanning-tree enumeration") {
  oracle::Rng rng(21);
  for (int L : {2, 3}) {
    const auto p = WeightParams::defaults(L, 2);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<Block> blocks;
      const int n = 1 + rng.below(6);
      for (int b = 0; b < n; ++b) blocks.push_back({rng.below(6), rng.below(6)});
      const PavedSet X(2, 6, blocks);
      CHECK(big_theta(X, p) == oracle::tree_infimum(X, L));
    }
  }
}

TEST_CASE("gamma weights") {
  const auto p = WeightParams::defaults(2, 2);
  CHECK(p.A == 16.0);
  CHECK(gamma_weight(PavedSet(2, 6, {{0, 0}}), p) == 16.0);
  CHECK(gamma_weight(PavedSet(2, 6, {{0, 0}, {0, 1}}), p) == 256.0);
  auto q = p;
  q.n = 4;
  CHECK(gamma_weight(PavedSet(2, 6, {{0, 0}}), q, GammaVariant::Bulk) == doctest::Approx(std::exp(4.0) * 16.0));
}

TEST_CASE("polymer norm") {
  const auto p = WeightParams::defaults(2, 2);
  const PavedSet X(2, 4, {{1, 1}});
  const auto single = polymer_norm({{X, 1.0}}, p);
  CHECK(single.value == 16.0);
  CHECK(single.per_block.at({1, 1}) == 16.0);
  CHECK(!single.translation_invariant);

  std::vector<std::pair<PavedSet, double>> fam;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      fam.push_back({PavedSet(2, 4, {{a, b}, {a, b + 1}}), 0.5});
      fam.push_back({PavedSet(2, 4, {{a, b}, {a + 2, b + 1}}), 0.25});
    }
  const auto inv = polymer_norm(fam, p);
  CHECK(inv.translation_invariant);
  double first = inv.per_block.begin()->second;
  for (auto& [blk, v] : inv.per_block) CHECK(v == first);

  // volume summation: Σ_X ‖E(X)‖ ≤ Vol · sup_□ Σ_{X∋□} ‖E(X)‖ Γ_4(X)
  oracle::Rng rng(23);
  auto q = p;
  q.n = 4;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::pair<PavedSet, double>> f;
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double w = std::abs(rng.real());
      f.push_back({PavedSet(2, 4, {{rng.below(4), rng.below(4)}, {rng.below(4), rng.below(4)}}), w});
      total += w;
    }
    CHECK(total <= 16.0 * polymer_norm(f, q, GammaVariant::Bulk).value);
  }
}

TEST_CASE("polymer norm of element-valued families") {
  auto u = Universe::lattice(1, 1, {Species::Psi, Species::PsiBar});
  const auto E = CElement::generator(u, 0, 2.0) * CElement::generator(u, 2);
  const auto p = WeightParams::defaults(2, 2);
  const auto r = polymer_norm({{PavedSet(2, 4, {{0, 0}}), E}}, HNorm{1.5, 1.0, 1.0}, 1.0, p);
  CHECK(r.value == doctest::Approx(16.0 * 2.0 * 1.5));
}

TEST_CASE("polymer family json") {
  const auto path = (std::filesystem::temp_directory_path() / "gn_family.json").string();
  {
    std::ofstream f(path);
    f << R"({"d":2,"side":6,"polymers":[{"blocks":[[0,0],[0,1]],"norm":0.5},{"blocks":[[3,3]],"norm":1}]})";
  }
  const auto fam = load_polymer_family(path);
  REQUIRE(fam.size() == 2);
  CHECK(fam[0].first.size() == 2);
  CHECK(fam[1].second == 1.0);
  std::remove(path.c_str());
}

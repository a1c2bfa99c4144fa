#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gn/flow.hpp"
#include "gn/lattice_model.hpp"
#include "oracles.hpp"

using namespace gn;

TEST_CASE("single flow steps") {
  FlowConstants c;
  c.beta = 1.0;
  c.theta = c.theta_p = c.theta_v = 0.0;
  c.beta_prime = 0.0;
  const auto prov = make_provider("constant", c);
  CHECK(flow_step(FlowState{}, *prov, c).g == 0.0);

  FlowState s;
  s.g = 0.1;
  CHECK(flow_step(s, *prov, c, false).g == doctest::Approx(0.11).epsilon(1e-15));

  FlowConstants c2;
  c2.beta_prime = 1.0;
  const auto p2 = make_provider("constant", c2);
  s.p = 0.01;
  const auto n = flow_step(s, *p2, c2, false);
  CHECK(n.p == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(n.v == doctest::Approx(-0.001).epsilon(1e-15));
}

TEST_CASE("providers and validation") {
  FlowConstants c;
  CHECK(make_provider("constant", c)->remainder_bound() == 0.0);
  CHECK(make_provider("cubic-remainder", c)->remainder_bound() == c.remainder_c);
  CHECK_THROWS(make_provider("quintic", c));
  c.g_max = -1;
  CHECK_THROWS(make_provider("constant", c));

  FlowConstants ok;
  FlowState s;
  CHECK(state_valid(s, ok));  // the free fixed point
  s.g = 0.1;
  s.z = 2.0;
  CHECK(!state_valid(s, ok));
  const auto prov = make_provider("constant", ok);
  CHECK_THROWS_AS(flow_step(s, *prov, ok), std::domain_error);
}

TEST_CASE("boundary value solve against the closed-form recursion") {
  FlowConstants c;
  const auto prov = make_provider("constant", c);
  const auto t = solve_boundary_value(*prov, c, 0.05, 20);
  REQUIRE(t.states.size() == 21);
  CHECK(t.residual.max() <= 1e-12);
  CHECK(t.states.front().g < 0.05);
  const auto ref = oracle::reduced_flow(t.states.front().g, 20, c.beta, c.theta, c.contraction, c.e_source);
  for (int k = 0; k <= 20; ++k) {
    CHECK(t.states[static_cast<std::size_t>(k)].g == ref[static_cast<std::size_t>(k)].g);
    CHECK(t.states[static_cast<std::size_t>(k)].z == ref[static_cast<std::size_t>(k)].z);
    CHECK(t.states[static_cast<std::size_t>(k)].e_norm == ref[static_cast<std::size_t>(k)].e);
    CHECK(t.states[static_cast<std::size_t>(k)].p == 0.0);
  }
}

TEST_CASE("trivial trajectory and bad inputs") {
  FlowConstants c;
  const auto prov = make_provider("cubic-remainder", c);
  const auto t = solve_boundary_value(*prov, c, 0.0, 15);
  REQUIRE(t.states.size() == 16);
  for (auto& s : t.states) {
    CHECK(s.g == 0.0);
    CHECK(s.eps == 0.0);
  }
  CHECK_THROWS(solve_boundary_value(*prov, c, -0.1, 10));
  CHECK_THROWS(solve_boundary_value(*prov, c, 0.6, 10));
}

TEST_CASE("cubic remainder: ε plug-back and monotone g") {
  FlowConstants c;
  c.remainder_signs = {1.0, -1.0, 1.0, -1.0, 1.0};
  const auto prov = make_provider("cubic-remainder", c);
  for (int N : {10, 100, 1000})
    for (double gf : {0.01, 0.05}) {
      const auto t = solve_boundary_value(*prov, c, gf, N);
      CHECK(t.residual.max() <= 1e-12);
      CHECK(t.residual.eps_plugback <= 1e-14);
      for (int k = 0; k < N; ++k)
        CHECK(t.states[static_cast<std::size_t>(k + 1)].g > t.states[static_cast<std::size_t>(k)].g);
    }
}

TEST_CASE("trajectory csv has N+1 rows") {
  FlowConstants c;
  const auto prov = make_provider("constant", c);
  const auto t = solve_boundary_value(*prov, c, 0.01, 30);
  const auto path = (std::filesystem::temp_directory_path() / "gn_traj.csv").string();
  write_trajectory_csv(t, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,g,z,p,v,eps,e_norm,valid");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 31);
  std::remove(path.c_str());
}

// ---- exact steps -------------------------------------------------------------

namespace {

struct Setup {
  TinyLattice lat;
  UniversePtr u;
  Setup(int sites, int n_internal) {
    lat.sx = sites;
    lat.n_internal = n_internal;
    u = make_universe(lat);
  }
};

// Hermitian-free random covariance with small entries.
Eigen::MatrixXcd random_cov(int n, oracle::Rng& rng, double scale = 0.3) { return rng.matrix(n, n, scale); }

// ∫F(ψ+η)dμ_C(η) by doubling the modes: η lives on a second copy of the labels.
oracle::Poly convolve_oracle(const CElement& F, const TinyLattice& lat, const Eigen::MatrixXcd& C) {
  TinyLattice twice = lat;
  twice.sx = 2 * lat.sx;
  auto big = make_universe(twice);
  const int nl = lat.n_labels();
  std::vector<std::optional<CElement>> subs(static_cast<std::size_t>(F.universe()->size()));
  for (int a = 0; a < nl; ++a)
    for (Species s : {Species::Psi, Species::PsiBar}) {
      const int g = F.universe()->index(lat.mode(s, a));
      subs[static_cast<std::size_t>(g)] = CElement::generator(big, big->index(twice.mode(s, a))) +
                                          CElement::generator(big, big->index(twice.mode(s, a + nl)));
    }
  const auto shifted = substitute(F, subs, big);
  CSpec eta;
  for (int a = 0; a < nl; ++a) eta.psi.push_back(big->index(twice.mode(Species::Psi, a + nl)));
  for (int a = 0; a < nl; ++a) eta.psibar.push_back(big->index(twice.mode(Species::PsiBar, a + nl)));
  eta.cov = from_eigen(C);
  const auto res = oracle::gaussian(oracle::to_poly(shifted), eta);
  // the surviving generators are the first copy, whose modes coincide with lat's
  oracle::Poly out;
  for (auto& [k, v] : res) {
    std::uint64_t key = 0;
    for (int g : oracle::gens_of(k)) key |= 1ULL << F.universe()->index(big->mode(g));
    out[key] += v;
  }
  return out;
}

}  // namespace

TEST_CASE("fluctuation integral against the doubled-mode oracle") {
  Setup s(1, 2);
  oracle::Rng rng(31);
  const auto C = random_cov(s.lat.n_labels(), rng);
  for (int rep = 0; rep < 5; ++rep) {
    const auto F = oracle::random_even(s.u, rng, 8, 4);
    CHECK(oracle::max_diff(oracle::to_poly(fluctuation_integral(F, C)), convolve_oracle(F, s.lat, C)) <= 1e-13);
  }
}

TEST_CASE("q correction") {
  Setup s(1, 2);
  oracle::Rng rng(33);
  const auto V = quartic(s.u, s.lat, Eigen::Matrix2cd::Identity());
  const auto w = random_cov(s.lat.n_labels(), rng);
  CHECK(q_correction(V, Eigen::MatrixXcd::Zero(s.lat.n_labels(), s.lat.n_labels())).is_zero());
  const auto Q = q_correction(V, w);
  CHECK(max_abs_diff(q_correction(V * cplx(2.0), w), Q * cplx(4.0)) <= 1e-13);
  // hand Wick expansion: ½(∫V²(ψ+η) − (∫V(ψ+η))²)
  const auto first = convolve_oracle(V, s.lat, w);
  const auto second = convolve_oracle(V * V, s.lat, w);
  const auto want = oracle::add(second, oracle::product(first, first), -1.0);
  oracle::Poly half;
  for (auto& [k, v] : want) half[k] = 0.5 * v;
  CHECK(oracle::max_diff(oracle::to_poly(Q), half) <= 1e-12);
}

TEST_CASE("fluctuation step of a quadratic action is quadratic with the resummed kernel") {
  Setup s(2, 1);
  oracle::Rng rng(35);
  const int n = s.lat.n_labels();
  const auto A = rng.matrix(n, n, 0.3);
  const auto C = random_cov(n, rng);
  const auto St = fluctuation_step(psibar_psi(s.u, s.lat, A), C);
  CHECK(St.max_degree() == 2);
  // log det(I − AC) + <ψ̄, (A + A C(I − AC)^{-1} A) ψ>
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd Ap = A + A * C * (I - A * C).inverse() * A;
  const auto want = psibar_psi(s.u, s.lat, Ap) + CElement(s.u, std::log((I - A * C).determinant()));
  CHECK(max_abs_diff(St, want) <= 1e-12);
  CHECK(fluctuation_step(CElement(s.u), C).is_zero());
}

TEST_CASE("exact RG step: semigroup and second-order extraction") {
  Setup s(2, 2);
  oracle::Rng rng(37);
  const int n = s.lat.n_labels();
  LocalCouplings lc;
  lc.g = 0.2;
  lc.z = 0.05;
  const auto S = local_action(s.u, s.lat, lc);
  const auto C1 = random_cov(n, rng, 0.2), C2 = random_cov(n, rng, 0.2);
  CHECK(max_abs_diff(fluctuation_step(fluctuation_step(S, C1), C2), fluctuation_step(S, C1 + C2)) <= 1e-10);
  const int L = 2;
  const auto two = rg_step_exact(rg_step_exact(S, C1, L), C2, L);
  const auto one = scale_field_map(rg_step_exact(S, C1 + C2 / double(L), L), L, ScaleDirection::Down);
  CHECK(max_abs_diff(two, one) <= 1e-10);
  CHECK(rg_step_exact(CElement(s.u), C1, L).is_zero());

  const auto V = quartic(s.u, s.lat, Eigen::Matrix2cd::Identity());
  const auto second = taylor_coefficient([&](cplx t) { return fluctuation_step(V * t, C1); }, 2, 0.05, 16);
  CHECK(max_abs_diff(second, q_correction(V, C1)) <= 1e-10);
}

TEST_CASE("degree-4 part beyond V + Q is third order") {
  Setup s(2, 1);
  oracle::Rng rng(39);
  const auto w = random_cov(s.lat.n_labels(), rng, 0.3);
  const auto V = quartic(s.u, s.lat, Eigen::Matrix2cd::Identity());
  auto deg4 = [](const CElement& e) { return e.filter([](std::uint64_t k) { return std::popcount(k) == 4; }); };
  std::vector<double> gs{1e-2, 1e-3, 1e-4}, err;
  for (double g : gs) {
    const auto Vg = V * cplx(g);
    const auto rest = deg4(fluctuation_step(Vg, w)) - deg4(fluctuation_integral(Vg, w)) - deg4(q_correction(Vg, w));
    err.push_back(rest.max_abs());
  }
  const double slope = std::log(err.front() / err.back()) / std::log(gs.front() / gs.back());
  CHECK(slope >= 2.9);
}

TEST_CASE("Taylor coefficients by the Cauchy formula") {
  auto u = Universe::lattice(1, 1, {Species::Psi, Species::PsiBar});
  const auto X = CElement::generator(u, 0) * CElement::generator(u, 2);
  const auto f = [&](cplx t) { return CElement(u, std::exp(t)) + X * (t * t * t); };
  CHECK(std::abs(taylor_coefficient(f, 2, 0.5, 24).constant_term() - 0.5) <= 1e-12);
  CHECK(max_abs_diff(taylor_coefficient(f, 3, 0.5, 24), X + CElement(u, 1.0 / 6)) <= 1e-12);
  CHECK_THROWS(taylor_coefficient(f, 3, 0.5, 3));
}

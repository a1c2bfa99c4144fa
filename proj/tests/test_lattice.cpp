#include <doctest.h>

#include "gn/berezin.hpp"
#include "gn/dirac.hpp"
#include "gn/lattice_model.hpp"
#include "oracles.hpp"

using namespace gn;

TEST_CASE("labels and modes") {
  TinyLattice lat;
  lat.sx = 2;
  lat.sy = 2;
  lat.n_internal = 3;
  lat.side = 8;
  for (int a = 0; a < lat.n_labels(); ++a) {
    const Mode m = lat.mode(Species::PsiBar, a);
    CHECK(lat.label(m.site, m.spin, m.color) == a);
  }
  CHECK(default_source_labels(lat).size() == 8);
  auto u = make_universe(lat, {0, 5});
  CHECK(u->size() == 2 * lat.n_labels() + 4);
  CHECK_THROWS(make_universe(lat, {lat.n_labels()}));
}

TEST_CASE("open and periodic patches") {
  TinyLattice open;
  open.sx = 2;
  open.sy = 1;
  open.spacing = 1;
  open.side = 4;
  CHECK(!open.periodic(0));
  CHECK(open.neighbor(0, 0) == 1);
  CHECK(open.neighbor(1, 0) == -1);
  CHECK(open.neighbor(0, 1) == -1);

  TinyLattice ring = open;
  ring.spacing = 2;
  CHECK(ring.periodic(0));
  CHECK(ring.neighbor(1, 0) == 0);

  TinyLattice bad = open;
  bad.sx = 5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("forward-difference Dirac operator") {
  TinyLattice lat;
  lat.n_internal = 1;
  lat.spacing = 0.5;
  const auto D = lattice_dirac(lat);
  const auto& g = DiracAlgebra::standard().gamma0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CHECK(D(lat.label(0, a, 0), lat.label(1, b, 0)) == g(a, b) * 2.0);
      CHECK(D(lat.label(0, a, 0), lat.label(0, b, 0)) == -g(a, b) * 2.0);
      // the last site has no forward neighbor
      CHECK(D(lat.label(1, a, 0), lat.label(0, b, 0)) == cplx(0));
      CHECK(D(lat.label(1, a, 0), lat.label(1, b, 0)) == cplx(0));
    }
  // constant spinor fields are annihilated
  Eigen::VectorXcd c(lat.n_labels());
  for (int x = 0; x < 2; ++x) {
    c(lat.label(x, 0, 0)) = cplx(0.3, 0.1);
    c(lat.label(x, 1, 0)) = cplx(-0.2, 0.7);
  }
  CHECK((D * c).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("quartic term on one site") {
  TinyLattice lat;
  lat.sx = 1;
  lat.n_internal = 1;
  lat.spacing = 0.5;
  auto u = make_universe(lat);
  // (ψ̄0ψ0 + ψ̄1ψ1)², compared against the expand-and-sort product
  oracle::Poly bil;
  for (int s = 0; s < 2; ++s) {
    const int pb = u->index(lat.mode(Species::PsiBar, s)), p = u->index(lat.mode(Species::Psi, s));
    // ψ̄ψ = −ψψ̄ in canonical order (ψ generators come first)
    bil[(1ULL << pb) | (1ULL << p)] += -1.0;
  }
  const auto want = oracle::product(bil, bil);
  const auto got = oracle::to_poly(quartic(u, lat, Eigen::Matrix2cd::Identity()) * cplx(1.0 / lat.cell_volume()));
  CHECK(oracle::max_diff(got, want) <= 1e-15);
  CHECK(got.size() == 1);
}

TEST_CASE("local action") {
  TinyLattice lat;
  auto u = make_universe(lat);
  LocalCouplings c;
  c.eps = 0.25;
  c.z = 0.1;
  c.g = 0.3;
  c.p = 0.02;
  c.v = -0.01;
  const auto S = local_action(u, lat, c);
  CHECK(S.is_even());
  CHECK(S.max_degree() == 4);
  CHECK(S.constant_term() == cplx(0.25 * lat.cell_volume() * lat.n_sites()));
  CHECK(local_action(u, lat, LocalCouplings{}).is_zero());
  // linear in each coupling
  LocalCouplings c2 = c;
  c2.g = 0.6;
  const auto dS = local_action(u, lat, c2) - S;
  CHECK(max_abs_diff(dS, quartic(u, lat, Eigen::Matrix2cd::Identity()) * cplx(0.3)) <= 1e-15);
  CHECK_NOTHROW(require_field_only(S));
  auto us = make_universe(lat, default_source_labels(lat));
  CHECK_THROWS(require_field_only(CElement::generator(us, us->size() - 1)));
}

TEST_CASE("label matrix of an odd kernel") {
  TinyLattice lat;
  lat.n_internal = 2;
  const SpinKernel K = [](const Eigen::Vector2d& x) {
    return Eigen::Matrix2cd(DiracAlgebra::standard().slash(x) * cplx(0, 1));
  };
  const auto M = label_matrix(lat, K);
  CHECK(M.rows() == lat.n_labels());
  // on-site blocks vanish; colors do not mix
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CHECK(M(lat.label(0, a, 0), lat.label(0, b, 0)) == cplx(0));
      CHECK(M(lat.label(0, a, 0), lat.label(1, b, 1)) == cplx(0));
    }
}

TEST_CASE("Gram bound: |∫F dμ_G| ≤ ‖F‖_h once h reaches the Gram factor") {
  LatticeGeometry geom;
  geom.L = 2;
  geom.M = 2;
  geom.N = 2;
  geom.sites_per_side = 4;
  geom.k = geom.N;
  const auto K = build_covariance(geom, KernelLabel::Gk);
  const double h = gram_factor(K);
  const auto lat = patch_lattice(K, 2, 2, 1);
  const auto u = make_universe(lat);
  const auto G = label_matrix(lat, [&K](const Eigen::Vector2d& x) { return K.eval(x); });
  const CSpec spec = lattice_spec(*u, G);
  // single entries are Gram pairings, so |G_ab| ≤ h²; the bound is not vacuous
  CHECK(G.cwiseAbs().maxCoeff() <= h * h);
  CHECK(G.cwiseAbs().maxCoeff() >= 0.01 * h * h);
  oracle::Rng rng(53);
  for (int rep = 0; rep < 50; ++rep) {
    const auto F = oracle::random_even(u, rng, 12, 8);
    const cplx I = gaussian_integrate(F, spec).constant_term();
    CHECK(std::abs(I) <= h_norm(F, HNorm{h, h, 1.0}) * (1 + 1e-12));
  }
}

#pragma once

#include <memory>

#include "gn/correlators.hpp"
#include "gn/dirac.hpp"
#include "oracles.hpp"

// Covariances of a small geometry restricted to a two-site patch, with
// sources on color 0 of every site and spin.
struct PatchFixture {
  gn::TinyLattice lat;
  Eigen::MatrixXcd G, GN, w;
  std::unique_ptr<gn::SourcedLattice> sl;

  explicit PatchFixture(int n_internal = 2) {
    using namespace gn;
    LatticeGeometry geom;
    geom.L = 2;
    geom.M = 2;
    geom.N = 2;
    geom.sites_per_side = 4;
    geom.k = geom.N;
    const auto Gk = build_covariance(geom, KernelLabel::G);
    const auto GNk = build_covariance(geom, KernelLabel::Gk);
    const auto wk = build_covariance(geom, KernelLabel::Wk);
    lat = patch_lattice(Gk, 2, 1, n_internal);
    auto ev = [](const CovarianceKernel& K) { return [&K](const Eigen::Vector2d& x) { return K.eval(x); }; };
    G = label_matrix(lat, ev(Gk));
    GN = label_matrix(lat, ev(GNk));
    w = label_matrix(lat, ev(wk));
    sl = std::make_unique<SourcedLattice>(lat, default_source_labels(lat), G, GN);
  }

  gn::TestFunction random_tf(oracle::Rng& rng) const {
    gn::TestFunction f = gn::TestFunction::Zero(lat.n_labels());
    for (int a : sl->source_labels) f(a) = rng.complex();
    return f;
  }

  gn::CElement action(double g, double z) const {
    gn::LocalCouplings c;
    c.g = g;
    c.z = z;
    return gn::local_action(sl->u, lat, c);
  }
};

inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  return std::log(y.front() / y.back()) / std::log(x.front() / x.back());
}

// Least-squares slope of log y against log x.
inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

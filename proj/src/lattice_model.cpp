#include "gn/lattice_model.hpp"

#include <cmath>
#include <stdexcept>

namespace gn {

bool TinyLattice::periodic(int dir) const {
  const int n = dir == 0 ? sx : sy;
  return n > 1 && std::abs(n * spacing - side) < 1e-12 * side;
}

void TinyLattice::validate() const {
  if (sx < 1 || sy < 1) throw std::invalid_argument("lattice needs at least one site per direction");
  if (n_internal < 1) throw std::invalid_argument("n_internal must be >= 1");
  if (!(spacing > 0) || !(side > 0)) throw std::invalid_argument("lattice spacing and side must be positive");
  if (std::max(sx, sy) * spacing > side * (1 + 1e-12)) throw std::invalid_argument("patch exceeds the torus");
}

Eigen::Vector2d TinyLattice::position(int site) const {
  return {spacing * (site / sy), spacing * (site % sy)};
}

int TinyLattice::neighbor(int site, int dir) const {
  int i = site / sy, j = site % sy;
  if (dir == 0) {
    if (i + 1 == sx && !periodic(0)) return -1;
    i = (i + 1) % sx;
  } else {
    if (j + 1 == sy && !periodic(1)) return -1;
    j = (j + 1) % sy;
  }
  return i * sy + j;
}

TinyLattice patch_lattice(const CovarianceKernel& K, int sx, int sy, int n_internal) {
  TinyLattice lat;
  lat.sx = sx;
  lat.sy = sy;
  lat.n_internal = n_internal;
  lat.side = K.side;
  lat.spacing = K.side / K.geom.sites_per_side;
  lat.validate();
  return lat;
}

Mode TinyLattice::mode(Species s, int label) const {
  return Mode{s, label / (2 * n_internal), (label / n_internal) % 2, label % n_internal};
}

UniversePtr make_universe(const TinyLattice& lat, const std::vector<int>& source_labels) {
  std::vector<Mode> modes;
  for (int a = 0; a < lat.n_labels(); ++a) {
    modes.push_back(lat.mode(Species::Psi, a));
    modes.push_back(lat.mode(Species::PsiBar, a));
  }
  for (int a : source_labels) {
    if (a < 0 || a >= lat.n_labels()) throw std::invalid_argument("source label out of range");
    modes.push_back(lat.mode(Species::J, a));
    modes.push_back(lat.mode(Species::JBar, a));
  }
  return std::make_shared<const Universe>(std::move(modes));
}

std::vector<int> default_source_labels(const TinyLattice& lat) {
  std::vector<int> out;
  for (int x = 0; x < lat.n_sites(); ++x)
    for (int s = 0; s < 2; ++s) out.push_back(lat.label(x, s, 0));
  return out;
}

Eigen::MatrixXcd label_matrix(const TinyLattice& lat, const SpinKernel& K) {
  const int n = lat.n_labels();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for (int x = 0; x < lat.n_sites(); ++x)
    for (int y = 0; y < lat.n_sites(); ++y) {
      const Eigen::Matrix2cd k = K(lat.position(x) - lat.position(y));
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int i = 0; i < lat.n_internal; ++i) M(lat.label(x, a, i), lat.label(y, b, i)) = k(a, b);
    }
  return M;
}

CSpec lattice_spec(const Universe& u, const Eigen::MatrixXcd& cov) {
  return full_spec(u, from_eigen(cov));
}

CElement psibar_psi(const UniversePtr& u, const TinyLattice& lat, const Eigen::MatrixXcd& M) {
  std::vector<int> psi, psibar;
  for (int a = 0; a < lat.n_labels(); ++a) {
    psi.push_back(u->index(lat.mode(Species::Psi, a)));
    psibar.push_back(u->index(lat.mode(Species::PsiBar, a)));
  }
  return bilinear<cplx>(u, psibar, psi, from_eigen(M));
}

Eigen::MatrixXcd lattice_dirac(const TinyLattice& lat) {
  const auto& D = DiracAlgebra::standard();
  const int n = lat.n_labels();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for (int mu = 0; mu < 2; ++mu) {
    const Eigen::Matrix2cd& g = mu == 0 ? D.gamma0 : D.gamma1;
    const double inv_a = 1.0 / lat.spacing;
    for (int x = 0; x < lat.n_sites(); ++x) {
      const int y = lat.neighbor(x, mu);
      if (y < 0 || y == x) continue;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int i = 0; i < lat.n_internal; ++i) {
            M(lat.label(x, a, i), lat.label(y, b, i)) += g(a, b) * inv_a;
            M(lat.label(x, a, i), lat.label(x, b, i)) -= g(a, b) * inv_a;
          }
    }
  }
  return M;
}

CElement quartic(const UniversePtr& u, const TinyLattice& lat, const Eigen::Matrix2cd& gamma) {
  CElement out(u);
  for (int x = 0; x < lat.n_sites(); ++x) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(lat.n_labels(), lat.n_labels());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < lat.n_internal; ++i) M(lat.label(x, a, i), lat.label(x, b, i)) = gamma(a, b);
    const CElement bil = psibar_psi(u, lat, M);
    out += bil * bil;
  }
  return out * cplx(lat.cell_volume());
}

CElement local_action(const UniversePtr& u, const TinyLattice& lat, const LocalCouplings& c) {
  const auto& D = DiracAlgebra::standard();
  const double vol = lat.cell_volume();
  CElement S(u, cplx(c.eps * vol * lat.n_sites()));
  if (c.z != 0.0) S += psibar_psi(u, lat, lattice_dirac(lat)) * (-c.z * vol);
  if (c.g != 0.0) S += quartic(u, lat, Eigen::Matrix2cd::Identity()) * c.g;
  if (c.p != 0.0) S += quartic(u, lat, D.gamma5) * c.p;
  if (c.v != 0.0) S += (quartic(u, lat, D.gamma0) + quartic(u, lat, D.gamma1)) * c.v;
  return S;
}

void require_field_only(const CElement& F) {
  const auto& u = *F.universe();
  const std::uint64_t src = u.species_mask(Species::J) | u.species_mask(Species::JBar);
  if (F.support() & src) throw std::invalid_argument("element depends on source modes");
}

}  // namespace gn

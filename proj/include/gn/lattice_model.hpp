#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gn/berezin.hpp"
#include "gn/dirac.hpp"
#include "gn/grassmann.hpp"

namespace gn {

using SpinKernel = std::function<Eigen::Matrix2cd(const Eigen::Vector2d&)>;

// A handful of sites at spacing a, arranged as an sx × sy grid patch of a
// torus of the given side. When sx·a (or sy·a) equals the side the patch
// wraps around in that direction; otherwise it has open ends. Sites half a
// period apart would see an odd covariance vanish identically, so small
// lattices are usually open patches. Mode labels are (site, spin, color) in
// canonical order.
struct TinyLattice {
  int sx = 2, sy = 1;
  int n_internal = 2;
  double spacing = 1.0;
  double side = 4.0;

  int n_sites() const { return sx * sy; }
  int n_labels() const { return n_sites() * 2 * n_internal; }
  double cell_volume() const { return spacing * spacing; }
  bool periodic(int dir) const;
  Eigen::Vector2d position(int site) const;
  int neighbor(int site, int dir) const;  // forward neighbor, −1 past an open end
  int label(int site, int spin, int color) const { return (site * 2 + spin) * n_internal + color; }
  Mode mode(Species s, int label) const;
  void validate() const;
};

// The sx × sy patch of the kernel's sampling grid.
TinyLattice patch_lattice(const CovarianceKernel& K, int sx, int sy, int n_internal);

// ψ/ψ̄ modes for every label plus J/J̄ modes for the listed source labels.
UniversePtr make_universe(const TinyLattice& lat, const std::vector<int>& source_labels = {});

// Labels (site, spin, color 0) for every site and spin.
std::vector<int> default_source_labels(const TinyLattice& lat);

// Matrix over labels: K_ab(x − y) δ_ij.
Eigen::MatrixXcd label_matrix(const TinyLattice& lat, const SpinKernel& K);

// Measure on all ψ/ψ̄ modes with a label-space covariance.
CSpec lattice_spec(const Universe& u, const Eigen::MatrixXcd& cov);

// Σ_{ij} M_ij ψ̄_i ψ_j over labels.
CElement psibar_psi(const UniversePtr& u, const TinyLattice& lat, const Eigen::MatrixXcd& M);

// Forward-difference lattice Dirac operator Σ_μ γ_μ (δ_{y,x+e_μ} − δ_{y,x}) / a,
// tensored with the identity in color. Sites without a forward neighbor in a
// direction get no difference in it.
Eigen::MatrixXcd lattice_dirac(const TinyLattice& lat);

struct LocalCouplings {
  double eps = 0.0;
  cplx z = 0.0;
  cplx g = 0.0;
  cplx p = 0.0;
  cplx v = 0.0;
};

// Σ_x vol [ε − z ψ̄∂̸ψ + g(ψ̄ψ)² + p(ψ̄γ₅ψ)² + v Σ_μ (ψ̄γ_μψ)²]
CElement local_action(const UniversePtr& u, const TinyLattice& lat, const LocalCouplings& c);

// vol Σ_x (ψ̄Γψ)(x)² for a spin matrix Γ.
CElement quartic(const UniversePtr& u, const TinyLattice& lat, const Eigen::Matrix2cd& gamma);

// Restriction of an element to its ψ/ψ̄ generators; fails if sources appear.
void require_field_only(const CElement& F);

}  // namespace gn

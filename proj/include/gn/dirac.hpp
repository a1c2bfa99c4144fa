#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gn/grassmann.hpp"

namespace gn {

struct LatticeGeometry {
  int L = 2;               // block ratio
  int M = 3;               // volume exponent: the physical torus has side L^M
  int N = 2;               // ultraviolet exponent
  int k = 0;               // RG stage
  int sites_per_side = 4;  // position sampling resolution
  int n_internal = 2;

  void validate() const;
  // Side of the stage-k torus, L^{M+N−k}.
  double stage_side() const;
};

enum class KernelLabel { G, G0, Gk, GkL, Ck, Wk, Gz };

std::string label_name(KernelLabel l);
std::optional<KernelLabel> parse_label(const std::string& s);

struct KernelParams {
  double z = 0.0;  // only used by Gz
};

struct DiracAlgebra {
  Eigen::Matrix2cd gamma0, gamma1, gamma5;
  static const DiracAlgebra& standard();
  Eigen::Matrix2cd slash(const Eigen::Vector2d& p) const { return gamma0 * p(0) + gamma1 * p(1); }
};

struct FourierMode {
  Eigen::Vector2d p;
  Eigen::Matrix2cd value;
};

// Translation-invariant spin kernel on a 2-torus. Modes are stored in ±p
// pairs (entries 2i and 2i+1) so odd symbols cancel exactly at x = 0.
class CovarianceKernel {
 public:
  KernelLabel label = KernelLabel::G;
  LatticeGeometry geom;
  KernelParams params;
  int side_exponent = 0;
  double side = 1.0;
  double weight = 1.0;  // side^{-2}
  double p_max = 0.0;
  std::vector<FourierMode> fourier;
  std::vector<Eigen::Vector2d> sites;
  std::vector<Eigen::Matrix2cd> position_table;

  double cutoff(double p2) const;
  Eigen::Matrix2cd symbol(const Eigen::Vector2d& p) const;
  Eigen::Matrix2cd eval(const Eigen::Vector2d& x) const;
  void refresh_position_table();
  double cell_volume() const;
};

CovarianceKernel build_covariance(const LatticeGeometry& geom, KernelLabel label,
                                  KernelParams params = {});

// max |G_k − G_{k+1,L} − C_k| over the modes of G_k and over sampled sites.
double split_residual(const CovarianceKernel& Gk, const CovarianceKernel& GkL,
                      const CovarianceKernel& Ck);
double split_check(const LatticeGeometry& geom, int k);

// For k < N: the residual of w_{k+1} = (w_k + C_k)_{L^{-1}}; for k = N: the
// residual of w_N + G_N = G. Symbols and sampled positions.
double telescope_w(const LatticeGeometry& geom, int k);

enum class ScaleDirection { Down, Up };

// Down: F ↦ F_L, F_L(x) = L^{-1} F(x/L). Up: F ↦ F_{L^{-1}}, F_{L^{-1}}(x) = L F(L x).
struct ScaledKernel {
  const CovarianceKernel* base = nullptr;
  ScaleDirection dir = ScaleDirection::Down;
  double amp = 1.0, arg = 1.0;
  Eigen::Matrix2cd eval(const Eigen::Vector2d& x) const { return amp * base->eval(arg * x); }
  Eigen::Matrix2cd symbol(const Eigen::Vector2d& q) const;
};

ScaledKernel scale_kernel(const CovarianceKernel& K, ScaleDirection dir);

// Field rescaling between consecutive stages on a fixed set of site labels:
// Down multiplies every ψ/ψ̄ generator by L^{-1/2} and every J/J̄ generator by
// L^{-3/2}; Up is the inverse.
CElement scale_field_map(const CElement& F, int L, ScaleDirection dir);

// sup over |α| ≤ 3 of the L² norms of ∂^α of the two factors of
// G̃ = (−ip̸ |p|^{-3/2} φ^{1/2}) (|p|^{-1/2} φ^{1/2}).
double gram_factor(const CovarianceKernel& K);

// max{sup_a Σ_b ∫|K_ab|, sup_b Σ_a ∫|K_ab|} by lattice quadrature.
double l1_norm(const CovarianceKernel& K);

// Largest per-mode entry of |G̃ − z G̃ ip̸ G̃ − G̃_z| on the G momentum set.
double renormalized_propagator_residual(const LatticeGeometry& geom, double z);

// Largest per-mode entry of |ip̸ G̃(p) − φ(p) I|.
double dirac_inverse_residual(const CovarianceKernel& K);

void write_fourier_csv(const CovarianceKernel& K, const std::string& path);
void write_position_csv(const CovarianceKernel& K, const std::string& path);
// Rows of (x0, x1, re00, im00, re01, im01, re10, im10, re11, im11).
std::vector<std::vector<double>> read_table_csv(const std::string& path);

}  // namespace gn

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gn/grassmann.hpp"

namespace gn {

// n × n sample points on a 2-torus of the given side.
struct TorusGrid {
  double side = 1.0;
  int n = 32;
  Eigen::Vector2d point(int i, int j) const { return {side * i / n, side * j / n}; }
  double cell() const { return (side / n) * (side / n); }
  double volume() const { return side * side; }
  double dp() const;  // momentum spacing 2π / side
};

using GridFunction = Eigen::MatrixXcd;  // samples indexed (i, j)

// A distribution known through its Fourier coefficients F̃(p) = <F, e_{−p}>
// at p = dp·(n0, n1), with a declared growth bound |F̃(p)| ≤ C(1 + p²)^{k/2}.
struct TorusDistribution {
  double side = 1.0;
  std::function<cplx(int, int)> coeff;
  double growth_C = 1.0;
  double growth_k = 0.0;
};

TorusDistribution delta_distribution(double side, const Eigen::Vector2d& x0);
// Coefficients of a smooth function from grid samples (Riemann sum, which is
// spectrally accurate for smooth periodic data); zero beyond the Nyquist window.
TorusDistribution smooth_distribution(const TorusGrid& grid, const GridFunction& samples);

// f̃(p) = Σ_x h² f(x) e^{−ipx} on the grid.
cplx grid_transform(const TorusGrid& grid, const GridFunction& f, int n0, int n1);
// ∫ A B by grid quadrature.
cplx grid_pairing(const TorusGrid& grid, const GridFunction& a, const GridFunction& b);

// F_N = Vol^{-1} Σ_{|p| ≤ cutoff} F̃(p) e_p sampled on the grid.
GridFunction fourier_truncate(const TorusDistribution& F, double cutoff, const TorusGrid& grid);
// The retained modes, for inspection.
std::vector<std::pair<int, int>> retained_modes(double side, double cutoff);

struct PairingCheck {
  cplx smoothed_distribution;  // <F_N, f> by quadrature of F_N against f
  cplx smoothed_test;          // <F, f_N> = Vol^{-1} Σ_{|p| ≤ N} F̃(p) f̃(−p)
  double duality_residual = 0.0;
};

PairingCheck weak_pairing_check(const TorusDistribution& F, const GridFunction& f, const TorusGrid& grid,
                                double cutoff);

// max over the window |n_i| ≤ n_max of |F̃(p)| / (C(1+p²)^{k/2}); ≤ 1 means the bound holds.
double growth_ratio(const TorusDistribution& F, int n_max);
// max over the window of |F̃(p)| (1+p²)^m.
double decay_moment(const TorusDistribution& F, int m, int n_max);

struct ConvergencePoint {
  double cutoff = 0.0;
  double error = 0.0;
};

// sup-norm distance between F_N and the exact samples along the given cutoffs.
std::vector<ConvergencePoint> convergence_curve(const TorusDistribution& F, const GridFunction& exact,
                                                const TorusGrid& grid, const std::vector<double>& cutoffs);
// True when each error is below the previous one or both sit under the floor.
bool monotone_decrease(const std::vector<ConvergencePoint>& curve, double floor);

void write_convergence_csv(const std::vector<ConvergencePoint>& curve, const std::string& path);

}  // namespace gn

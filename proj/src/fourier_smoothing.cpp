#include "gn/fourier_smoothing.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace gn {

namespace {
const double kTwoPi = 2.0 * std::acos(-1.0);
}

double TorusGrid::dp() const { return kTwoPi / side; }

TorusDistribution delta_distribution(double side, const Eigen::Vector2d& x0) {
  TorusDistribution F;
  F.side = side;
  const double dp = kTwoPi / side;
  F.coeff = [dp, x0](int n0, int n1) { return std::polar(1.0, -dp * (n0 * x0(0) + n1 * x0(1))); };
  F.growth_C = 1.0;
  F.growth_k = 0.0;
  return F;
}

cplx grid_transform(const TorusGrid& grid, const GridFunction& f, int n0, int n1) {
  const double dp = grid.dp();
  cplx s = 0.0;
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const Eigen::Vector2d x = grid.point(i, j);
      s += f(i, j) * std::polar(1.0, -dp * (n0 * x(0) + n1 * x(1)));
    }
  return s * grid.cell();
}

TorusDistribution smooth_distribution(const TorusGrid& grid, const GridFunction& samples) {
  if (samples.rows() != grid.n || samples.cols() != grid.n)
    throw std::invalid_argument("samples do not match the grid");
  const int half = grid.n / 2;
  Eigen::MatrixXcd table(2 * half + 1, 2 * half + 1);
  for (int a = -half; a <= half; ++a)
    for (int b = -half; b <= half; ++b) table(a + half, b + half) = grid_transform(grid, samples, a, b);
  TorusDistribution F;
  F.side = grid.side;
  F.coeff = [table, half](int n0, int n1) -> cplx {
    if (std::abs(n0) > half || std::abs(n1) > half) return 0.0;
    return table(n0 + half, n1 + half);
  };
  F.growth_C = table.cwiseAbs().maxCoeff();
  F.growth_k = 0.0;
  return F;
}

cplx grid_pairing(const TorusGrid& grid, const GridFunction& a, const GridFunction& b) {
  return (a.array() * b.array()).sum() * grid.cell();
}

std::vector<std::pair<int, int>> retained_modes(double side, double cutoff) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
  const double dp = kTwoPi / side;
  const int nmax = static_cast<int>(std::floor(cutoff / dp));
  std::vector<std::pair<int, int>> out;
  for (int a = -nmax; a <= nmax; ++a)
    for (int b = -nmax; b <= nmax; ++b)
      if (dp * std::hypot(a, b) <= cutoff * (1 + 1e-14)) out.push_back({a, b});
  return out;
}

GridFunction fourier_truncate(const TorusDistribution& F, double cutoff, const TorusGrid& grid) {
  if (std::abs(F.side - grid.side) > 1e-12 * grid.side) throw std::invalid_argument("torus sides differ");
  const auto modes = retained_modes(F.side, cutoff);
  const double dp = grid.dp();
  GridFunction out = GridFunction::Zero(grid.n, grid.n);
  for (auto [a, b] : modes) {
    const cplx c = F.coeff(a, b);
    if (c == cplx(0)) continue;
    for (int i = 0; i < grid.n; ++i)
      for (int j = 0; j < grid.n; ++j) {
        const Eigen::Vector2d x = grid.point(i, j);
        out(i, j) += c * std::polar(1.0, dp * (a * x(0) + b * x(1)));
      }
  }
  return out / grid.volume();
}

PairingCheck weak_pairing_check(const TorusDistribution& F, const GridFunction& f, const TorusGrid& grid,
                                double cutoff) {
  PairingCheck r;
  r.smoothed_distribution = grid_pairing(grid, fourier_truncate(F, cutoff, grid), f);
  cplx s = 0.0;
  for (auto [a, b] : retained_modes(F.side, cutoff)) s += F.coeff(a, b) * grid_transform(grid, f, -a, -b);
  r.smoothed_test = s / grid.volume();
  r.duality_residual = std::abs(r.smoothed_distribution - r.smoothed_test);
  return r;
}

double growth_ratio(const TorusDistribution& F, int n_max) {
  const double dp = kTwoPi / F.side;
  double m = 0.0;
  for (int a = -n_max; a <= n_max; ++a)
    for (int b = -n_max; b <= n_max; ++b) {
      const double p2 = dp * dp * (a * a + b * b);
      m = std::max(m, std::abs(F.coeff(a, b)) / (F.growth_C * std::pow(1 + p2, F.growth_k / 2)));
    }
  return m;
}

double decay_moment(const TorusDistribution& F, int mexp, int n_max) {
  const double dp = kTwoPi / F.side;
  double m = 0.0;
  for (int a = -n_max; a <= n_max; ++a)
    for (int b = -n_max; b <= n_max; ++b) {
      const double p2 = dp * dp * (a * a + b * b);
      m = std::max(m, std::abs(F.coeff(a, b)) * std::pow(1 + p2, mexp));
    }
  return m;
}

std::vector<ConvergencePoint> convergence_curve(const TorusDistribution& F, const GridFunction& exact,
                                                const TorusGrid& grid, const std::vector<double>& cutoffs) {
  std::vector<ConvergencePoint> out;
  for (double c : cutoffs) out.push_back({c, (fourier_truncate(F, c, grid) - exact).cwiseAbs().maxCoeff()});
  return out;
}

bool monotone_decrease(const std::vector<ConvergencePoint>& curve, double floor) {
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve[i].error < curve[i - 1].error) && !(curve[i].error <= floor && curve[i - 1].error <= floor))
      return false;
  return true;
}

void write_convergence_csv(const std::vector<ConvergencePoint>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "cutoff,sup_error\n";
  for (auto& p : curve) out << p.cutoff << ',' << p.error << '\n';
}

}  // namespace gn

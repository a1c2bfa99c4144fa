#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gn/fourier_smoothing.hpp"

using namespace gn;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

GridFunction sample(const TorusGrid& grid, const std::function<cplx(const Eigen::Vector2d&)>& f) {
  GridFunction g(grid.n, grid.n);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) g(i, j) = f(grid.point(i, j));
  return g;
}

// smooth, periodic, with all modes populated
cplx bump(const Eigen::Vector2d& x) { return std::exp(0.5 * std::cos(x(0)) + 0.3 * std::sin(x(1))); }

}  // namespace

TEST_CASE("retained modes lie in the disc") {
  const auto modes = retained_modes(kTwoPi, 2.0);
  CHECK(modes.size() == 13);  // n0² + n1² ≤ 4
  for (auto& [a, b] : modes) CHECK(a * a + b * b <= 4);
  CHECK(retained_modes(kTwoPi, 0.0).size() == 1);
}

TEST_CASE("truncated delta") {
  TorusGrid grid;
  grid.side = kTwoPi;
  grid.n = 16;
  const Eigen::Vector2d x0 = grid.point(3, 5);
  const auto F = delta_distribution(grid.side, x0);
  for (double N : {0.0, 1.0, 3.0, 5.5}) {
    const auto FN = fourier_truncate(F, N, grid);
    const double n_modes = static_cast<double>(retained_modes(grid.side, N).size());
    CHECK(std::abs(FN(3, 5) - n_modes / grid.volume()) <= 1e-12);
  }
  // cutoff 0 keeps only the mean
  const auto F0 = fourier_truncate(F, 0.0, grid);
  CHECK((F0.array() - 1.0 / grid.volume()).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("plane waves are orthogonal under grid quadrature") {
  TorusGrid grid;
  grid.side = 3.0;
  grid.n = 12;
  const double dp = grid.dp();
  auto e = [&](int a, int b) {
    return sample(grid, [&](const Eigen::Vector2d& x) { return std::exp(cplx(0, dp * (a * x(0) + b * x(1)))); });
  };
  CHECK(std::abs(grid_pairing(grid, e(1, 2), e(-1, -2)) - grid.volume()) <= 1e-12);
  CHECK(std::abs(grid_pairing(grid, e(1, 2), e(2, -1))) <= 1e-12);
  CHECK(std::abs(grid_transform(grid, e(2, 1), 2, 1) - grid.volume()) <= 1e-12);
}

TEST_CASE("pairing duality <F_N, f> = <F, f_N>") {
  TorusGrid grid;
  grid.side = kTwoPi;
  grid.n = 32;
  const auto f = sample(grid, bump);
  const auto delta = delta_distribution(grid.side, {1.0, 2.0});
  const auto smooth = smooth_distribution(grid, sample(grid, [](const Eigen::Vector2d& x) {
                                            return cplx(std::cos(2 * x(0)) + 0.25, std::sin(x(1)));
                                          }));
  for (double N : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    CHECK(weak_pairing_check(delta, f, grid, N).duality_residual <= 1e-12);
    CHECK(weak_pairing_check(smooth, f, grid, N).duality_residual <= 1e-12);
  }
  // the smoothed test pairing approaches f(x0) for the delta
  const auto p = weak_pairing_check(delta, f, grid, 15.0);
  CHECK(std::abs(p.smoothed_test - bump({1.0, 2.0})) <= 1e-10);
}

TEST_CASE("convergence of F_N to a smooth F is monotone") {
  TorusGrid grid;
  grid.side = kTwoPi;
  grid.n = 32;
  const auto exact = sample(grid, bump);
  const auto F = smooth_distribution(grid, exact);
  std::vector<double> cutoffs;
  for (int N = 1; N <= 16; ++N) cutoffs.push_back(N);
  const auto curve = convergence_curve(F, exact, grid, cutoffs);
  CHECK(monotone_decrease(curve, 1e-13));
  CHECK(curve.back().error <= 1e-10);
  CHECK(!monotone_decrease({{1, 1.0}, {2, 2.0}}, 1e-13));

  const auto path = (std::filesystem::temp_directory_path() / "gn_conv.csv").string();
  write_convergence_csv(curve, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "cutoff,sup_error");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 16);
  std::remove(path.c_str());
}

TEST_CASE("growth and decay of coefficients") {
  const auto delta = delta_distribution(kTwoPi, {0.3, 0.1});
  CHECK(growth_ratio(delta, 20) <= 1.0 + 1e-15);
  CHECK(growth_ratio(delta, 20) == doctest::Approx(1.0));
  TorusGrid grid;
  grid.side = kTwoPi;
  grid.n = 32;
  const auto smooth = smooth_distribution(grid, sample(grid, bump));
  CHECK(growth_ratio(smooth, 10) <= 1.0);
  // smooth data decays faster than any power; delta does not decay at all
  for (int m = 0; m <= 3; ++m) CHECK(decay_moment(smooth, m, 15) < 1e3);
  CHECK(decay_moment(delta, 1, 10) >= 200.0);
}

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gn/grassmann.hpp"

namespace gn {

struct FlowState {
  int k = 0;
  double g = 0.0, z = 0.0, p = 0.0, v = 0.0, eps = 0.0;
  double e_norm = 0.0;  // stand-in for the polymer norm of the irrelevant remainder
};

struct StarredTerms {
  double g = 0.0, z = 0.0, p = 0.0, v = 0.0, eps = 0.0;
};

// Numeric constants of the flow. None of them is fixed by theory here; the
// defaults are just a regime where the bounds are comfortably satisfied.
struct FlowConstants {
  int L = 2;
  double beta = 1.0;
  double beta_prime = 0.5;
  double theta = 0.5;
  double theta_p = 0.5;
  double theta_v = 0.5;
  double contraction = 0.5;  // e_{k+1} = contraction · (e_k + e_source · g³)
  double e_source = 1.0;
  double remainder_c = 1.0;  // starred terms of the cubic provider: ± c g³
  std::array<double, 5> remainder_signs{1.0, 1.0, 1.0, 1.0, 1.0};  // g, z, p, v, eps
  double C_Z = 10.0;
  double C_E = 10.0;
  double g_max = 1.0;

  void validate() const;
};

class CoefficientProvider {
 public:
  virtual ~CoefficientProvider() = default;
  virtual std::string name() const = 0;
  virtual double beta(int k) const = 0;
  virtual double beta_prime(int k) const = 0;
  virtual double theta(int k) const = 0;
  virtual double theta_p(int k) const = 0;
  virtual double theta_v(int k) const = 0;
  virtual StarredTerms starred(int k, const FlowState& s) const = 0;
  // C with |starred| ≤ C g³.
  virtual double remainder_bound() const = 0;
};

// "constant": fixed coefficients, no starred terms.
// "cubic-remainder": fixed coefficients, starred = sign · c · g³.
std::unique_ptr<CoefficientProvider> make_provider(const std::string& name, const FlowConstants& c);

bool state_valid(const FlowState& s, const FlowConstants& c);
FlowState flow_step(const FlowState& s, const CoefficientProvider& prov, const FlowConstants& c,
                    bool check_valid = true);

struct BoundaryResidual {
  double g_final = 0.0, eps_final = 0.0, e_initial = 0.0, z_initial = 0.0, p_initial = 0.0,
         v_initial = 0.0;
  double eps_plugback = 0.0;  // max_k |ε_{k+1} − L²(ε_k + ε*_k)|
  double max() const;
};

struct Trajectory {
  std::vector<FlowState> states;  // k = 0..N
  std::vector<bool> valid;
  BoundaryResidual residual;
  int iterations = 0;
};

struct SolverOptions {
  int max_iterations = 400;
  bool require_valid = true;
};

// g_N = g_f, ε_N = 0, E_0 = z_0 = p_0 = v_0 = 0, by bisection on g_0.
Trajectory solve_boundary_value(const CoefficientProvider& prov, const FlowConstants& c, double g_f,
                                int N, const SolverOptions& opt = {});

void write_trajectory_csv(const Trajectory& t, const std::string& path);

// ---- exact steps on tiny lattices ------------------------------------------

// ∫F(ψ+η) dμ_C(η), C a label-space covariance.
CElement fluctuation_integral(const CElement& F, const Eigen::MatrixXcd& C);
// S̃ with e^{S̃} = ∫e^{S(ψ+η)} dμ_C(η).
CElement fluctuation_step(const CElement& S, const Eigen::MatrixXcd& C);
// Fluctuation step followed by ψ ↦ L^{-1/2}ψ on the same site labels.
CElement rg_step_exact(const CElement& S, const Eigen::MatrixXcd& C, int L);
// ½∫V²(ψ+η)dμ_w − ½(∫V(ψ+η)dμ_w)²
CElement q_correction(const CElement& V, const Eigen::MatrixXcd& w);

// n-th Taylor coefficient at 0 of an analytic element-valued function, by the
// discrete Cauchy formula on K points of the circle |t| = r.
CElement taylor_coefficient(const std::function<CElement(cplx)>& f, int n, double r, int K);

}  // namespace gn

#include "gn/flow.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "gn/berezin.hpp"
#include "gn/dirac.hpp"

namespace gn {

void FlowConstants::validate() const {
  if (L < 2) throw std::invalid_argument("geometry.L must be >= 2");
  if (!(beta > 0)) throw std::invalid_argument("couplings.beta must be > 0");
  if (!(contraction >= 0 && contraction < 1))
    throw std::invalid_argument("couplings.contraction must lie in [0, 1)");
  if (!(e_source >= 0)) throw std::invalid_argument("couplings.e_source must be >= 0");
  if (!(remainder_c >= 0)) throw std::invalid_argument("couplings.remainder_c must be >= 0");
  if (!(C_Z > 0)) throw std::invalid_argument("couplings.C_Z must be > 0");
  if (!(C_E > 0)) throw std::invalid_argument("couplings.C_E must be > 0");
  if (!(g_max > 0)) throw std::invalid_argument("couplings.g_max must be > 0");
}

namespace {

class FixedProvider : public CoefficientProvider {
 public:
  FixedProvider(const FlowConstants& c, bool cubic) : c_(c), cubic_(cubic) {}
  std::string name() const override { return cubic_ ? "cubic-remainder" : "constant"; }
  double beta(int) const override { return c_.beta; }
  double beta_prime(int) const override { return c_.beta_prime; }
  double theta(int) const override { return c_.theta; }
  double theta_p(int) const override { return c_.theta_p; }
  double theta_v(int) const override { return c_.theta_v; }
  StarredTerms starred(int, const FlowState& s) const override {
    if (!cubic_) return {};
    const double g3 = c_.remainder_c * s.g * s.g * s.g;
    const auto& sg = c_.remainder_signs;
    return {sg[0] * g3, sg[1] * g3, sg[2] * g3, sg[3] * g3, sg[4] * g3};
  }
  double remainder_bound() const override { return cubic_ ? c_.remainder_c : 0.0; }

 private:
  FlowConstants c_;
  bool cubic_;
};

bool zero_state(const FlowState& s) {
  return s.g == 0 && s.z == 0 && s.p == 0 && s.v == 0 && s.e_norm == 0;
}

}  // namespace

std::unique_ptr<CoefficientProvider> make_provider(const std::string& name, const FlowConstants& c) {
  c.validate();
  if (name == "constant") return std::make_unique<FixedProvider>(c, false);
  if (name == "cubic-remainder") return std::make_unique<FixedProvider>(c, true);
  throw std::invalid_argument("couplings.provider: unknown provider '" + name + "'");
}

bool state_valid(const FlowState& s, const FlowConstants& c) {
  // The free fixed point sits on the boundary of the region; accept it.
  if (zero_state(s)) return true;
  const double g = s.g;
  return 0 < g && g < c.g_max && s.e_norm <= c.C_E * g * g * g && std::abs(s.z) <= c.C_Z * g &&
         std::abs(s.p) <= c.C_E * g * g && std::abs(s.v) <= c.C_E * g * g;
}

FlowState flow_step(const FlowState& s, const CoefficientProvider& prov, const FlowConstants& c,
                    bool check_valid) {
  if (check_valid && !state_valid(s, c))
    throw std::domain_error("flow_step: state at stage " + std::to_string(s.k) +
                            " violates the trajectory bounds");
  const int k = s.k;
  const StarredTerms st = prov.starred(k, s);
  const double b = prov.beta(k), bp = prov.beta_prime(k);
  FlowState n;
  n.k = k + 1;
  n.g = s.g + b * s.g * s.g - 2 * bp * s.g * s.p - 4 * bp * s.g * s.v + st.g;
  n.z = s.z + prov.theta(k) * s.g * s.g - prov.theta_p(k) * s.g * s.p - prov.theta_v(k) * s.g * s.v + st.z;
  n.p = s.p - 2 * bp * s.g * s.v + st.p;
  n.v = s.v - bp * s.g * s.p + st.v;
  n.eps = static_cast<double>(c.L) * c.L * (s.eps + st.eps);
  n.e_norm = c.contraction * (s.e_norm + c.e_source * s.g * s.g * s.g);
  return n;
}

double BoundaryResidual::max() const {
  return std::max({g_final, eps_final, e_initial, z_initial, p_initial, v_initial, eps_plugback});
}

namespace {

// Forward pass from (g0, 0, 0, 0, ·, 0); ε is filled in later. Stops early
// once g leaves (−∞, cap] so bisection can treat it as overshoot.
std::vector<FlowState> integrate_forward(const CoefficientProvider& prov, const FlowConstants& c,
                                         double g0, int N, double cap) {
  std::vector<FlowState> out;
  FlowState s;
  s.g = g0;
  out.push_back(s);
  for (int k = 0; k < N; ++k) {
    s = flow_step(s, prov, c, false);
    out.push_back(s);
    if (!std::isfinite(s.g) || s.g > cap) break;
  }
  return out;
}

}  // namespace

Trajectory solve_boundary_value(const CoefficientProvider& prov, const FlowConstants& c, double g_f,
                                int N, const SolverOptions& opt) {
  c.validate();
  if (N < 0) throw std::invalid_argument("flow: N must be >= 0");
  if (g_f < 0) throw std::invalid_argument("couplings.g_f must be >= 0");
  if (!(g_f < 0.5 * c.g_max)) throw std::invalid_argument("couplings.g_f must be below g_max/2");
  Trajectory t;
  const double cap = 10.0 * c.g_max;
  if (g_f == 0.0) {
    t.states = integrate_forward(prov, c, 0.0, N, cap);
  } else {
    auto g_end = [&](double g0) {
      auto tr = integrate_forward(prov, c, g0, N, cap);
      return static_cast<int>(tr.size()) == N + 1 ? tr.back().g : HUGE_VAL;
    };
    double lo = 0.0, hi = g_f;
    // Expand the bracket if the flow can decrease g.
    while (g_end(hi) < g_f) {
      hi *= 2;
      if (hi > cap) throw std::runtime_error("flow: cannot bracket g_0");
    }
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (g_end(mid) < g_f ? lo : hi) = mid;
    }
    t.iterations = it;
    // Take whichever endpoint lands closer.
    const double glo = g_end(lo), ghi = g_end(hi);
    const double g0 = std::abs(glo - g_f) <= std::abs(ghi - g_f) ? lo : hi;
    t.states = integrate_forward(prov, c, g0, N, cap);
    if (static_cast<int>(t.states.size()) != N + 1) throw std::runtime_error("flow: shooting diverged");
    if (std::abs(t.states.back().g - g_f) > 1e-10 * std::max(1.0, g_f))
      throw std::runtime_error("flow: bisection did not converge, best residual " +
                               std::to_string(std::abs(t.states.back().g - g_f)));
  }
  // ε backward from ε_N = 0.
  const double L2 = static_cast<double>(c.L) * c.L;
  t.states[static_cast<std::size_t>(N)].eps = 0.0;
  for (int k = N - 1; k >= 0; --k) {
    auto& s = t.states[static_cast<std::size_t>(k)];
    s.eps = t.states[static_cast<std::size_t>(k + 1)].eps / L2 - prov.starred(k, s).eps;
  }
  for (int k = 0; k < N; ++k) {
    const auto& s = t.states[static_cast<std::size_t>(k)];
    const double want = L2 * (s.eps + prov.starred(k, s).eps);
    t.residual.eps_plugback =
        std::max(t.residual.eps_plugback, std::abs(t.states[static_cast<std::size_t>(k + 1)].eps - want));
  }
  const auto& first = t.states.front();
  const auto& last = t.states.back();
  t.residual.g_final = std::abs(last.g - g_f);
  t.residual.eps_final = std::abs(last.eps);
  t.residual.e_initial = std::abs(first.e_norm);
  t.residual.z_initial = std::abs(first.z);
  t.residual.p_initial = std::abs(first.p);
  t.residual.v_initial = std::abs(first.v);
  for (auto& s : t.states) t.valid.push_back(state_valid(s, c));
  if (opt.require_valid)
    for (std::size_t k = 0; k < t.valid.size(); ++k)
      if (!t.valid[k])
        throw std::domain_error("flow: trajectory leaves the bounded region at stage " + std::to_string(k));
  return t;
}

void write_trajectory_csv(const Trajectory& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "k,g,z,p,v,eps,e_norm,valid\n";
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const auto& s = t.states[i];
    out << s.k << ',' << s.g << ',' << s.z << ',' << s.p << ',' << s.v << ',' << s.eps << ','
        << s.e_norm << ',' << (t.valid.at(i) ? 1 : 0) << '\n';
  }
}

CElement fluctuation_integral(const CElement& F, const Eigen::MatrixXcd& C) {
  return gaussian_convolve(F, full_spec(*F.universe(), from_eigen(C)));
}

CElement fluctuation_step(const CElement& S, const Eigen::MatrixXcd& C) {
  if (!S.is_even()) throw std::invalid_argument("fluctuation_step: action must be even");
  const CElement E = fluctuation_integral(exp_even(S), C);
  return log_one_plus(E - CElement::one(S.universe()));
}

CElement rg_step_exact(const CElement& S, const Eigen::MatrixXcd& C, int L) {
  return scale_field_map(fluctuation_step(S, C), L, ScaleDirection::Down);
}

CElement q_correction(const CElement& V, const Eigen::MatrixXcd& w) {
  const CElement first = fluctuation_integral(V, w);
  return (fluctuation_integral(V * V, w) - first * first) * cplx(0.5);
}

CElement taylor_coefficient(const std::function<CElement(cplx)>& f, int n, double r, int K) {
  if (K <= n) throw std::invalid_argument("taylor_coefficient needs more nodes than the order");
  const double two_pi = 2.0 * std::acos(-1.0);
  std::optional<CElement> acc;
  for (int j = 0; j < K; ++j) {
    const cplx w = std::polar(1.0, two_pi * j / K);
    CElement v = f(r * w) * (std::pow(w, -n) / (static_cast<double>(K) * std::pow(r, n)));
    acc = acc ? *acc + v : v;
  }
  return *acc;
}

}  // namespace gn

#include "gn/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <random>
#include <sstream>

#include "gn/berezin.hpp"
#include "gn/correlators.hpp"
#include "gn/dirac.hpp"
#include "gn/flow.hpp"
#include "gn/fourier_smoothing.hpp"
#include "gn/lattice_model.hpp"
#include "gn/polymer.hpp"

namespace gn {

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

namespace fs = std::filesystem;

CheckResult check(std::string name, std::string anchor, double residual, double tol, std::string detail = {}) {
  return {std::move(name), std::move(anchor), residual, tol, std::isfinite(residual) && residual <= tol,
          std::move(detail)};
}

// Runs `body`; an exception becomes a failed check carrying the message.
void guarded(SuiteReport& r, const std::string& name, const std::string& anchor,
             const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    r.checks.push_back({name, anchor, HUGE_VAL, 0.0, false, std::string("error: ") + e.what()});
  }
}

struct Rng {
  std::mt19937_64 eng;
  std::uniform_real_distribution<double> u{-0.5, 0.5};
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double real() { return u(eng); }
  cplx complex() { return {u(eng), u(eng)}; }
  int below(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
  Eigen::MatrixXcd matrix(int n, double scale = 1.0) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = scale * complex();
    return m;
  }
};

std::uint64_t suite_seed(const ExperimentConfig& cfg, const std::string& suite) {
  std::uint64_t h = cfg.seed;
  for (char c : suite) h = h * 1099511628211ULL + static_cast<unsigned char>(c);
  return h;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

// Random even element over the ψ/ψ̄ generators, degree ≤ max_deg.
CElement random_even(const UniversePtr& u, Rng& rng, int n_terms, int max_deg) {
  std::vector<int> gens = u->generators(Species::Psi);
  for (int g : u->generators(Species::PsiBar)) gens.push_back(g);
  std::vector<CElement::Term> t;
  for (int i = 0; i < n_terms; ++i) {
    const int deg = 2 * rng.below(max_deg / 2 + 1);
    std::uint64_t key = 0;
    while (std::popcount(key) < deg) key |= 1ULL << gens[static_cast<std::size_t>(rng.below(static_cast<int>(gens.size())))];
    t.push_back({key, rng.complex()});
  }
  return CElement::from_terms(u, std::move(t));
}

std::string out_path(const ExperimentConfig& cfg, SuiteReport& r, const std::string& file) {
  r.files.push_back(file);
  return (fs::path(cfg.out_dir) / file).string();
}

// ---- identities ------------------------------------------------------------

SuiteReport identities(const ExperimentConfig& cfg) {
  SuiteReport r{"identities", {}, {}};
  Rng rng(suite_seed(cfg, r.suite));
  const int n = cfg.random_cases;

  guarded(r, "characteristic function det(I+JG)", "gaussian/characteristic-function", [&] {
    auto u = Universe::lattice(2, 1, {Species::Psi, Species::PsiBar});
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXcd G = rng.matrix(4), J = rng.matrix(4, 0.5);
      const CSpec spec = full_spec(*u, from_eigen(G));
      const cplx direct =
          gaussian_integrate(exp_even(psibar_psi_form(u, spec, J, -1.0)), spec).constant_term();
      const cplx closed = characteristic_function(spec, J);
      worst = std::max(worst, std::abs(direct - closed) / std::max(1.0, std::abs(closed)));
    }
    r.checks.push_back(check("characteristic function det(I+JG)", "gaussian/characteristic-function", worst,
                             cfg.tol_exact, std::to_string(n) + " random (G, J), 4 pairs"));
  });

  guarded(r, "generating function exp<J̄,GJ>", "gaussian/generating-function", [&] {
    TinyLattice lat;
    lat.n_internal = 1;
    const auto labels = default_source_labels(lat);
    auto u = make_universe(lat, labels);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const CSpec spec = lattice_spec(*u, rng.matrix(lat.n_labels()));
      const SourceCoupling sc = make_sources(u, spec, lat.cell_volume());
      worst = std::max(worst, max_abs_diff(source_generating_function(u, spec, sc),
                                           exp_even(source_quadratic(u, spec, sc))));
    }
    r.checks.push_back(check("generating function exp<J̄,GJ>", "gaussian/generating-function", worst,
                             cfg.tol_exact, "4 source pairs"));
  });

  guarded(r, "tilted covariance G(I-KG)^-1", "gaussian/tilted-covariance", [&] {
    auto u = Universe::lattice(2, 1, {Species::Psi, Species::PsiBar});
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXcd G = rng.matrix(4);
      Eigen::MatrixXcd K = rng.matrix(4);
      K *= 0.5 / spectral_norm(K * G);
      const CSpec spec = full_spec(*u, from_eigen(G));
      const Eigen::MatrixXcd T = tilted_covariance(G, K);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const CElement pair = CElement::generator(u, spec.psi[a]) * CElement::generator(u, spec.psibar[b]);
          worst = std::max(worst, std::abs(tilted_integrate(pair, spec, K).constant_term() - T(a, b)));
        }
    }
    r.checks.push_back(check("tilted covariance G(I-KG)^-1", "gaussian/tilted-covariance", worst, cfg.tol_exact,
                             "‖KG‖ = 0.5"));
  });

  guarded(r, "tilt with ‖KG‖ ≥ 1 rejected", "gaussian/tilted-covariance", [&] {
    const Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(4, 4);
    bool rejected = false;
    try {
      tilted_covariance(G, 1.5 * G);
    } catch (const std::domain_error&) {
      rejected = true;
    }
    r.checks.push_back(check("tilt with ‖KG‖ ≥ 1 rejected", "gaussian/tilted-covariance", rejected ? 0.0 : 1.0,
                             0.0));
  });

  guarded(r, "shift identity", "gaussian/shift-identity", [&] {
    TinyLattice lat;
    lat.n_internal = 1;
    const auto labels = default_source_labels(lat);
    auto u = make_universe(lat, labels);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const CSpec spec = lattice_spec(*u, rng.matrix(lat.n_labels()));
      const SourceCoupling sc = make_sources(u, spec, lat.cell_volume());
      worst = std::max(worst, shift_identity_residual(random_even(u, rng, 12, 4), spec, sc));
    }
    r.checks.push_back(check("shift identity", "gaussian/shift-identity", worst, cfg.tol_identity,
                             "random even F of degree ≤ 4, 2 sites"));
  });

  guarded(r, "log(1 + (exp A − 1)) = A", "grassmann/log-exp", [&] {
    auto u = Universe::lattice(2, 2, {Species::Psi, Species::PsiBar});
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      CElement A = random_even(u, rng, 10, 4);
      A -= CElement(u, A.constant_term());
      worst = std::max(worst, max_abs_diff(log_one_plus(exp_even(A) - CElement::one(u)), A));
    }
    r.checks.push_back(check("log(1 + (exp A − 1)) = A", "grassmann/log-exp", worst, cfg.tol_exact));
  });

  guarded(r, "smoothing duality <F_N,f> = <F,f_N>", "smoothing/duality", [&] {
    TorusGrid grid;
    grid.side = 2.0 * std::acos(-1.0);
    grid.n = 32;
    GridFunction f(grid.n, grid.n);
    for (int i = 0; i < grid.n; ++i)
      for (int j = 0; j < grid.n; ++j) {
        const auto x = grid.point(i, j);
        f(i, j) = std::exp(std::cos(x(0)) + std::sin(x(1)));
      }
    const auto delta = delta_distribution(grid.side, {1.0, 2.0});
    const auto smooth = smooth_distribution(grid, f);
    double worst = 0.0;
    for (double c : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      worst = std::max(worst, weak_pairing_check(delta, f, grid, c).duality_residual);
      worst = std::max(worst, weak_pairing_check(smooth, f, grid, c).duality_residual);
    }
    r.checks.push_back(check("smoothing duality <F_N,f> = <F,f_N>", "smoothing/duality", worst, cfg.tol_exact,
                             "delta and smooth targets, cutoffs 1..16"));
    const auto curve = convergence_curve(smooth, f, grid, {1.0, 2.0, 4.0, 8.0, 16.0});
    write_convergence_csv(curve, out_path(cfg, r, "convergence.csv"));
    const bool mono = monotone_decrease(curve, 1e-12);
    r.checks.push_back(check("smooth target converges over cutoff doubling", "smoothing/convergence",
                             curve.back().error, 1e-10, mono ? "monotone" : "not monotone"));
    r.checks.back().passed = r.checks.back().passed && mono;
  });
  return r;
}

// ---- covariance ------------------------------------------------------------

SuiteReport covariance(const ExperimentConfig& cfg) {
  SuiteReport r{"covariance", {}, {}};
  LatticeGeometry geom = cfg.geometry;
  geom.k = 0;
  const double tol = cfg.tol_covariance;

  guarded(r, "split G_k = G_{k+1,L} + C_k", "covariance/split", [&] {
    double worst = 0.0;
    for (int k = 0; k < geom.N; ++k) worst = std::max(worst, split_check(geom, k));
    r.checks.push_back(check("split G_k = G_{k+1,L} + C_k", "covariance/split", worst, tol,
                             "k = 0.." + std::to_string(geom.N - 1)));
  });
  guarded(r, "w telescoping and w_N + G_N = G", "covariance/telescope", [&] {
    double worst = 0.0;
    for (int k = 0; k <= geom.N; ++k) worst = std::max(worst, telescope_w(geom, k));
    r.checks.push_back(check("w telescoping and w_N + G_N = G", "covariance/telescope", worst, tol,
                             "k = 0.." + std::to_string(geom.N)));
  });
  guarded(r, "G vanishes at coinciding points", "covariance/diagonal", [&] {
    const auto G = build_covariance(geom, KernelLabel::G);
    r.checks.push_back(check("G vanishes at coinciding points", "covariance/diagonal",
                             G.eval(Eigen::Vector2d::Zero()).cwiseAbs().maxCoeff(), cfg.tol_exact));
    write_fourier_csv(G, out_path(cfg, r, "covariance_G_fourier.csv"));
    const std::string pos = out_path(cfg, r, "covariance_G_position.csv");
    write_position_csv(G, pos);
    const auto rows = read_table_csv(pos);
    bool exact = rows.size() == G.sites.size();
    for (std::size_t i = 0; exact && i < rows.size(); ++i) {
      const auto& m = G.position_table[i];
      exact = rows[i].size() == 10 && rows[i][0] == G.sites[i](0) && rows[i][1] == G.sites[i](1);
      for (int a = 0; exact && a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          exact = exact && rows[i][2 + 4 * a + 2 * b] == m(a, b).real() && rows[i][3 + 4 * a + 2 * b] == m(a, b).imag();
    }
    r.checks.push_back(check("position table round-trips bit-exactly", "io/covariance-table", exact ? 0.0 : 1.0,
                             0.0));
  });
  guarded(r, "ip̸ G̃_N(p) = e^{-p²} I", "covariance/dirac-inverse", [&] {
    LatticeGeometry g = geom;
    g.k = g.N;
    const auto GN = build_covariance(g, KernelLabel::Gk);
    write_position_csv(GN, out_path(cfg, r, "covariance_GN_position.csv"));
    r.checks.push_back(check("ip̸ G̃_N(p) = e^{-p²} I", "covariance/dirac-inverse", dirac_inverse_residual(GN),
                             cfg.tol_exact, "per mode"));
  });
  guarded(r, "ground identity G − zG∂̸G vs G_z", "covariance/renormalized-propagator", [&] {
    const double z = 1e-2;
    r.checks.push_back(check("ground identity G − zG∂̸G vs G_z", "covariance/renormalized-propagator",
                             renormalized_propagator_residual(geom, z), 2 * z * z, "z = 0.01, bound 2z²"));
  });
  return r;
}

// ---- polymer ---------------------------------------------------------------

SuiteReport polymer(const ExperimentConfig& cfg) {
  SuiteReport r{"polymer", {}, {}};
  Rng rng(suite_seed(cfg, r.suite));
  const int L = cfg.geometry.L, d = 2;

  guarded(r, "θ(s) ≤ s^{d+2}", "weights/theta-bound", [&] {
    const bool ok = theta_bound_check(WeightParams::defaults(L, d), 10000);
    r.checks.push_back(check("θ(s) ≤ s^{d+2}", "weights/theta-bound", ok ? 0.0 : 1.0, 0.0, "1 ≤ s ≤ 10^4"));
  });
  guarded(r, "θ(s) = 2L^{d+1} θ(⌈s/L⌉)", "weights/theta-scaling", [&] {
    std::uint64_t hi = 1;
    for (int i = 0; i < 6; ++i) hi *= static_cast<std::uint64_t>(L);
    const auto bad = theta_scaling_violation(L, d, static_cast<std::uint64_t>(L) + 1, hi);
    r.checks.push_back(check("θ(s) = 2L^{d+1} θ(⌈s/L⌉)", "weights/theta-scaling", bad ? 1.0 : 0.0, 0.0,
                             bad ? "first violation at s = " + std::to_string(bad)
                                 : "L < s ≤ L^6 (θ(1) = 1 makes s ≤ L an exception)"));
  });
  guarded(r, "Θ translation invariant", "weights/tree-infimum", [&] {
    const int side = 6;
    const auto wp = WeightParams::defaults(L, d);
    double worst = 0.0;
    for (int i = 0; i < cfg.random_cases; ++i) {
      std::vector<Block> blocks;
      const int nb = 1 + rng.below(5);
      for (int b = 0; b < nb; ++b) blocks.push_back({rng.below(side), rng.below(side)});
      const PavedSet X(d, side, blocks);
      const PavedSet Y = X.translated({rng.below(side), rng.below(side)});
      worst = std::max(worst, std::abs(big_theta(X, wp) - big_theta(Y, wp)) / big_theta(X, wp));
    }
    r.checks.push_back(check("Θ translation invariant", "weights/tree-infimum", worst, 0.0));
  });
  guarded(r, "polymer norm of a translation-invariant family", "weights/polymer-norm", [&] {
    const int side = 6;
    const auto wp = WeightParams::defaults(L, d);
    const std::vector<std::vector<Block>> shapes{{{0, 0}}, {{0, 0}, {0, 1}}, {{0, 0}, {2, 3}}, {{0, 0}, {1, 1}, {3, 0}}};
    std::vector<std::pair<PavedSet, double>> fam;
    for (std::size_t s = 0; s < shapes.size(); ++s)
      for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) fam.push_back({PavedSet(d, side, shapes[s]).translated({a, b}), 1.0 / (1.0 + s)});
    const auto res = polymer_norm(fam, wp);
    r.checks.push_back(check("polymer norm of a translation-invariant family", "weights/polymer-norm",
                             res.translation_invariant ? 0.0 : 1.0, 0.0,
                             "norm " + std::to_string(res.value)));
  });
  return r;
}

// ---- flow ------------------------------------------------------------------

SuiteReport flow(const ExperimentConfig& cfg) {
  SuiteReport r{"flow", {}, {}};
  guarded(r, "boundary residuals", "flow/boundary-value", [&] {
    const auto prov = make_provider(cfg.provider, cfg.flow);
    const Trajectory t = solve_boundary_value(*prov, cfg.flow, cfg.g_f, cfg.flow_N);
    write_trajectory_csv(t, out_path(cfg, r, "trajectory.csv"));
    r.checks.push_back(check("boundary residuals", "flow/boundary-value", t.residual.max(), cfg.tol_exact,
                             prov->name() + ", N = " + std::to_string(cfg.flow_N)));
    bool inc = true;
    if (cfg.g_f > 0)
      for (std::size_t k = 0; k + 1 < t.states.size(); ++k) inc = inc && t.states[k + 1].g > t.states[k].g;
    r.checks.push_back(check("g increasing along the flow", "flow/asymptotic-freedom", inc ? 0.0 : 1.0, 0.0,
                             cfg.g_f > 0 ? "strict" : "trivial trajectory"));
    const bool all_valid = std::all_of(t.valid.begin(), t.valid.end(), [](bool b) { return b; });
    r.checks.push_back(check("trajectory stays in the bounded region", "flow/bounds", all_valid ? 0.0 : 1.0, 0.0));
  });
  return r;
}

// ---- correlators -----------------------------------------------------------

std::string label_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

SuiteReport correlators(const ExperimentConfig& cfg) {
  SuiteReport r{"correlators", {}, {}};
  Rng rng(suite_seed(cfg, r.suite));
  guarded(r, "exp(Λ) = Ω", "generating/log-exp", [&] {
    LatticeGeometry geom = cfg.geometry;
    geom.k = geom.N;
    const auto G = build_covariance(geom, KernelLabel::G);
    const auto GN = build_covariance(geom, KernelLabel::Gk);
    const auto w = build_covariance(geom, KernelLabel::Wk);
    const TinyLattice lat = patch_lattice(G, cfg.lattice_sites, 1, geom.n_internal);
    auto ev = [](const CovarianceKernel& K) { return [&K](const Eigen::Vector2d& x) { return K.eval(x); }; };
    const Eigen::MatrixXcd Gm = label_matrix(lat, ev(G)), GNm = label_matrix(lat, ev(GN)), wm = label_matrix(lat, ev(w));
    const SourcedLattice sl(lat, default_source_labels(lat), Gm, GNm);

    LocalCouplings c;
    c.g = cfg.g_f;
    c.z = cfg.z_f;
    const CElement S0 = local_action(sl.u, lat, c);
    const CElement SN = collapsed_action(S0, wm);
    const CElement Lam = log_generating(SN, sl);
    const CElement Om = direct_generating(S0, sl);
    r.checks.push_back(check("exp(Λ) = Ω", "generating/log-exp", max_abs_diff(exp_even(Lam), Om), cfg.tol_identity,
                             std::to_string(lat.n_sites()) + "-site patch"));

    const int nl = lat.n_labels();
    auto random_tf = [&] {
      TestFunction f = TestFunction::Zero(nl);
      for (int a : sl.source_labels) f(a) = rng.complex();
      return f;
    };
    const TestFunction f1 = random_tf(), f2 = random_tf(), g1 = random_tf(), g2 = random_tf();
    auto m2 = [&](const TestFunction& a, const TestFunction& b) { return berezin_moment(S0, sl, {a}, {b}); };
    const cplx m4 = berezin_moment(S0, sl, {f1, f2}, {g1, g2});
    const cplx t4 = truncated_correlator(Lam, sl, {f1, f2}, {g1, g2});
    const double trunc2 = std::abs(truncated_correlator(Lam, sl, {f1}, {g1}) - m2(f1, g1));
    const double trunc4 = std::abs(m4 - (t4 - m2(f1, g1) * m2(f2, g2) + m2(f1, g2) * m2(f2, g1)));
    r.checks.push_back(check("truncation identities from moments", "generating/truncation",
                             std::max(trunc2, trunc4), cfg.tol_identity, "orders 2 and 4"));

    // First-order two-point formula: error should scale like g².
    std::vector<double> gs{1e-2, 1e-3, 1e-4}, errs;
    for (double g : gs) {
      LocalCouplings cc;
      cc.g = g;
      cc.z = 0.5 * g;
      const CElement L2 = log_generating(local_action(sl.u, lat, cc), sl);
      errs.push_back(std::abs(truncated_correlator(L2, sl, {f1}, {g1}) - two_point_first_order(lat, f1, g1, cc.z, Gm)));
    }
    const double slope = std::log(errs.front() / errs.back()) / std::log(gs.front() / gs.back());
    r.checks.push_back(check("two-point first order, remainder slope", "correlators/two-point", std::abs(slope - 2.0),
                             0.1, "fitted slope " + std::to_string(slope)));

    std::vector<CorrelatorRow> rows;
    const auto& lab = sl.source_labels;
    auto unit = [&](int a) {
      TestFunction f = TestFunction::Zero(nl);
      f(a) = 1.0;
      return f;
    };
    for (int a : lab)
      for (int b : lab) rows.push_back({label_list({a}), label_list({b}), 2, truncated_correlator(Lam, sl, {unit(a)}, {unit(b)}), true});
    for (std::size_t i = 0; i < lab.size(); ++i)
      for (std::size_t j = i + 1; j < lab.size(); ++j)
        for (std::size_t k = 0; k < lab.size(); ++k)
          for (std::size_t l = k + 1; l < lab.size(); ++l)
            rows.push_back({label_list({lab[i], lab[j]}), label_list({lab[k], lab[l]}), 4,
                            truncated_correlator(Lam, sl, {unit(lab[i]), unit(lab[j])}, {unit(lab[k]), unit(lab[l])}),
                            true});
    std::ostringstream desc;
    desc << lat.sx << "x" << lat.sy << "@" << lat.spacing;
    write_correlator_csv(rows, cfg.g_f, geom.N, desc.str(), out_path(cfg, r, "correlators.csv"));
  });
  return r;
}

}  // namespace

SuiteReport run_suite(const std::string& name, const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  if (name == "identities") return identities(cfg);
  if (name == "covariance") return covariance(cfg);
  if (name == "polymer") return polymer(cfg);
  if (name == "flow") return flow(cfg);
  if (name == "correlators") return correlators(cfg);
  throw ConfigError("run.suite", "unknown suite '" + name + "'");
}

std::vector<SuiteReport> run_suites(const ExperimentConfig& cfg, bool parallel) {
  const std::vector<std::string> names = cfg.suite == "all" ? suite_names() : std::vector<std::string>{cfg.suite};
  fs::create_directories(cfg.out_dir);
  std::vector<SuiteReport> out;
  if (!parallel) {
    for (auto& n : names) out.push_back(run_suite(n, cfg));
    return out;
  }
  std::vector<std::future<SuiteReport>> jobs;
  for (auto& n : names) jobs.push_back(std::async(std::launch::async, run_suite, n, std::cref(cfg)));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

nlohmann::ordered_json config_echo(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["geometry"] = {{"L", c.geometry.L},
                   {"M", c.geometry.M},
                   {"N", c.geometry.N},
                   {"sites_per_side", c.geometry.sites_per_side},
                   {"n_internal", c.geometry.n_internal},
                   {"lattice_sites", c.lattice_sites}};
  j["couplings"] = {{"g_f", c.g_f},
                    {"z_f", c.z_f},
                    {"provider", c.provider},
                    {"flow_N", c.flow_N},
                    {"beta", c.flow.beta},
                    {"beta_prime", c.flow.beta_prime},
                    {"theta", c.flow.theta},
                    {"theta_p", c.flow.theta_p},
                    {"theta_v", c.flow.theta_v},
                    {"contraction", c.flow.contraction},
                    {"e_source", c.flow.e_source},
                    {"remainder_c", c.flow.remainder_c},
                    {"C_Z", c.flow.C_Z},
                    {"C_E", c.flow.C_E},
                    {"g_max", c.flow.g_max}};
  j["run"] = {{"suite", c.suite},
              {"seed", c.seed},
              {"random_cases", c.random_cases},
              {"tol_exact", c.tol_exact},
              {"tol_identity", c.tol_identity},
              {"tol_covariance", c.tol_covariance}};
  j["output"] = {{"dir", c.out_dir}, {"report", c.report}};
  return j;
}

nlohmann::ordered_json make_report(const ExperimentConfig& cfg, const std::vector<SuiteReport>& suites) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = "gnlab";
  j["seed"] = cfg.seed;
  j["config"] = config_echo(cfg);
  int total = 0, failed = 0;
  double worst_ratio = 0.0;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (auto& s : suites) {
    nlohmann::ordered_json sj;
    sj["suite"] = s.suite;
    sj["passed"] = s.passed();
    sj["files"] = s.files;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (auto& c : s.checks) {
      ++total;
      if (!c.passed) ++failed;
      if (c.tolerance > 0 && std::isfinite(c.residual)) worst_ratio = std::max(worst_ratio, c.residual / c.tolerance);
      checks.push_back({{"name", c.name},
                        {"anchor", c.anchor},
                        {"residual", std::isfinite(c.residual) ? nlohmann::ordered_json(c.residual) : nlohmann::ordered_json("inf")},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed},
                        {"detail", c.detail},
                        {"seed", cfg.seed}});
    }
    sj["checks"] = checks;
    arr.push_back(sj);
  }
  j["suites"] = arr;
  j["summary"] = {{"checks", total}, {"failed", failed}, {"passed", failed == 0}, {"max_residual_over_tolerance", worst_ratio}};
  return j;
}

}  // namespace gn

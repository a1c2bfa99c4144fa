#include "gn/correlators.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "gn/flow.hpp"

namespace gn {

SourcedLattice::SourcedLattice(const TinyLattice& lat_, const std::vector<int>& labels,
                               const Eigen::MatrixXcd& G_, const Eigen::MatrixXcd& GN_)
    : lat(lat_),
      source_labels(labels),
      u(make_universe(lat_, labels)),
      G(G_),
      GN(GN_),
      spec_G(lattice_spec(*u, G_)),
      sc(make_sources(u, spec_G, lat_.cell_volume())) {
  if (GN.rows() != G.rows() || GN.cols() != G.cols())
    throw std::invalid_argument("G and G_N have different shapes");
}

namespace {

int label_of(const TinyLattice& lat, const Mode& m) {
  return (m.site * 2 + m.spin) * lat.n_internal + m.color;
}

void check_test_function(const SourcedLattice& sl, const TestFunction& f) {
  if (f.size() != sl.lat.n_labels()) throw std::invalid_argument("test function has the wrong length");
  std::vector<char> on(static_cast<std::size_t>(sl.lat.n_labels()), 0);
  for (int a : sl.source_labels) on[static_cast<std::size_t>(a)] = 1;
  for (int a = 0; a < f.size(); ++a)
    if (!on[static_cast<std::size_t>(a)] && f(a) != cplx(0))
      throw std::invalid_argument("test function is supported off the source labels");
}

CElement smeared(const SourcedLattice& sl, const TestFunction& f, Species s) {
  if (f.size() != sl.lat.n_labels()) throw std::invalid_argument("test function has the wrong length");
  std::vector<CElement::Term> t;
  const double vol = sl.lat.cell_volume();
  for (int a = 0; a < sl.lat.n_labels(); ++a)
    if (f(a) != cplx(0)) t.push_back({1ULL << sl.u->index(sl.lat.mode(s, a)), vol * f(a)});
  return CElement::from_terms(sl.u, std::move(t), std::nullopt, 0.0);
}

}  // namespace

CElement fluctuation_remainder(const CElement& S, const Eigen::MatrixXcd& GN) {
  require_field_only(S);
  return fluctuation_integral(exp_even(S), GN) - CElement::one(S.universe());
}

CElement log_generating(const CElement& S_N, const SourcedLattice& sl) {
  const CElement phi = fluctuation_remainder(S_N, sl.GN);
  if (std::abs(partition_function(phi)) == 0.0)
    throw std::domain_error("log_generating: vanishing partition function");
  const CElement pulled = pullback_to_sources(phi, sl.spec_G, sl.sc);
  return source_quadratic(sl.u, sl.spec_G, sl.sc) + log_one_plus(pulled);
}

CElement direct_generating(const CElement& S, const SourcedLattice& sl) {
  require_field_only(S);
  return gaussian_integrate(exp_even(source_term(sl.u, sl.sc)) * exp_even(S), sl.spec_G);
}

CElement collapsed_action(const CElement& S0, const Eigen::MatrixXcd& w) {
  return fluctuation_step(S0, w);
}

cplx source_derivative(const CElement& F, const SourcedLattice& sl, const std::vector<TestFunction>& fs,
                       const std::vector<TestFunction>& gs) {
  CElement cur = F;
  auto apply = [&](const TestFunction& f, Species s) {
    check_test_function(sl, f);
    const TinyLattice& lat = sl.lat;
    cur = derivative<cplx>(cur, [&](const Mode& m) { return f(label_of(lat, m)); }, s);
  };
  for (auto& f : fs) apply(f, Species::JBar);
  for (auto& g : gs) apply(g, Species::J);
  return cur.constant_term();
}

cplx truncated_correlator(const CElement& Lambda, const SourcedLattice& sl,
                          const std::vector<TestFunction>& fs, const std::vector<TestFunction>& gs) {
  // above the degree the derivative is simply 0, unless a cap threw terms away
  const auto cap = Lambda.degree_cap();
  if (cap && static_cast<int>(fs.size() + gs.size()) > *cap)
    throw std::invalid_argument("correlator order exceeds the degree cap of the generating function");
  return source_derivative(Lambda, sl, fs, gs);
}

CElement smeared_psi(const SourcedLattice& sl, const TestFunction& f) { return smeared(sl, f, Species::Psi); }
CElement smeared_psibar(const SourcedLattice& sl, const TestFunction& g) {
  return smeared(sl, g, Species::PsiBar);
}

cplx berezin_moment(const CElement& S, const SourcedLattice& sl, const std::vector<TestFunction>& fs,
                    const std::vector<TestFunction>& gs) {
  require_field_only(S);
  const CElement w = exp_even(S);
  CElement obs = CElement::one(sl.u);
  for (auto& f : fs) obs = obs * smeared_psi(sl, f);
  for (auto& g : gs) obs = obs * smeared_psibar(sl, g);
  const cplx num = gaussian_integrate(obs * w, sl.spec_G).constant_term();
  const cplx den = gaussian_integrate(w, sl.spec_G).constant_term();
  return num / den;
}

cplx pairing(const TinyLattice& lat, const TestFunction& f, const Eigen::MatrixXcd& G, const TestFunction& g) {
  const double vol = lat.cell_volume();
  return vol * vol * (f.transpose() * G * g)(0, 0);
}

cplx two_point_first_order(const TinyLattice& lat, const TestFunction& f, const TestFunction& g, cplx z,
                           const Eigen::MatrixXcd& G) {
  const double vol = lat.cell_volume();
  const Eigen::MatrixXcd GDG = vol * G * lattice_dirac(lat) * G;
  return pairing(lat, f, G, g) - z * pairing(lat, f, GDG, g);
}

cplx four_point_first_order(const TinyLattice& lat, const TestFunction& f1, const TestFunction& f2,
                            const TestFunction& g1, const TestFunction& g2, cplx g_f,
                            const Eigen::MatrixXcd& G, double vertex_factor) {
  const double vol = lat.cell_volume();
  const Eigen::VectorXcd a1 = vol * (G.transpose() * f1), a2 = vol * (G.transpose() * f2);
  const Eigen::VectorXcd b1 = vol * (G * g1), b2 = vol * (G * g2);
  const int per_site = 2 * lat.n_internal;
  cplx s = 0.0;
  for (int x = 0; x < lat.n_sites(); ++x) {
    auto dot = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
      return (a.segment(x * per_site, per_site).array() * b.segment(x * per_site, per_site).array()).sum();
    };
    s += dot(a1, b1) * dot(a2, b2) - dot(a1, b2) * dot(a2, b1);
  }
  // the bracket pairs ψ(f_i) with ψ̄(g_j); moving to ψψψ̄ψ̄ order costs ε_2 = −1
  return -vertex_factor * g_f * vol * s;
}

CElement first_order_action_reduction(const CElement& S, const Eigen::MatrixXcd& GN,
                                      const TinyLattice& lat, double tol) {
  for (int x = 0; x < lat.n_sites(); ++x)
    for (int a = 0; a < 2 * lat.n_internal; ++a)
      for (int b = 0; b < 2 * lat.n_internal; ++b) {
        const int per = 2 * lat.n_internal;
        if (std::abs(GN(x * per + a, x * per + b)) > tol)
          throw std::domain_error("first_order_action_reduction: G_N does not vanish at coinciding points");
      }
  return fluctuation_integral(S, GN);
}

void write_correlator_csv(const std::vector<CorrelatorRow>& rows, double g_f, int N,
                          const std::string& lattice, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "f_labels,g_labels,order,value_re,value_im,truncated,g_f,N,lattice\n";
  for (auto& r : rows)
    out << r.f_labels << ',' << r.g_labels << ',' << r.order << ',' << r.value.real() << ','
        << r.value.imag() << ',' << (r.truncated ? 1 : 0) << ',' << g_f << ',' << N << ',' << lattice << '\n';
}

}  // namespace gn

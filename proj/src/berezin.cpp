#include "gn/berezin.hpp"

#include <array>

namespace gn {

Mat<cplx> from_eigen(const Eigen::MatrixXcd& m) {
  Mat<cplx> r(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < r.rows; ++i)
    for (int j = 0; j < r.cols; ++j) r(i, j) = m(i, j);
  return r;
}

Eigen::MatrixXcd to_eigen(const Mat<cplx>& m) {
  Eigen::MatrixXcd r(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) r(i, j) = m(i, j);
  return r;
}

namespace {

constexpr int kMaxPairs = 32;

// Sign of the permutation taking x1 y1 x2 y2 … xn yn to x1 … xn y1 … yn,
// counted by bubble sort.
int sorting_sign(int n) {
  std::vector<int> seq;
  for (int i = 0; i < n; ++i) {
    seq.push_back(i);
    seq.push_back(n + i);
  }
  int swaps = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = 0; j + 1 < seq.size() - i; ++j)
      if (seq[j] > seq[j + 1]) {
        std::swap(seq[j], seq[j + 1]);
        ++swaps;
      }
  return swaps % 2 ? -1 : 1;
}

struct EpsilonTable {
  std::array<int, kMaxPairs + 1> eps{};
  bool verified = true;
  EpsilonTable() {
    for (int n = 0; n <= kMaxPairs; ++n) {
      eps[static_cast<std::size_t>(n)] = sorting_sign(n);
      const int closed = (n * (n - 1) / 2) % 2 ? -1 : 1;
      if (eps[static_cast<std::size_t>(n)] != closed) verified = false;
    }
    if (!verified) throw std::logic_error("epsilon table disagrees with (-1)^{n(n-1)/2}");
  }
};

const EpsilonTable& table() {
  static const EpsilonTable t;
  return t;
}

[[maybe_unused]] const bool kStartupCheck = table().verified;

}  // namespace

int epsilon_sign(int n) {
  if (n < 0 || n > kMaxPairs) throw std::out_of_range("epsilon_sign");
  return table().eps[static_cast<std::size_t>(n)];
}

bool epsilon_table_verified() { return table().verified; }

cplx characteristic_function(const CSpec& spec, const Eigen::MatrixXcd& J) {
  const Eigen::MatrixXcd G = to_eigen(spec.cov);
  if (J.rows() != G.cols() || J.cols() != G.rows())
    throw std::invalid_argument("characteristic_function: J has the wrong shape");
  const Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(J.rows(), J.rows()) + J * G;
  return M.rows() < 5 ? detail::det_cofactor(from_eigen(M)) : M.partialPivLu().determinant();
}

CElement psibar_psi_form(const UniversePtr& u, const CSpec& spec, const Eigen::MatrixXcd& J,
                         cplx scale) {
  return bilinear<cplx>(u, spec.psibar, spec.psi, from_eigen(J), scale);
}

Eigen::MatrixXcd tilted_covariance(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& K) {
  const Eigen::MatrixXcd KG = K * G;
  const double norm = KG.size() ? Eigen::JacobiSVD<Eigen::MatrixXcd>(KG).singularValues()(0) : 0.0;
  if (norm >= 1.0) throw std::domain_error("tilt too large: operator norm of KG is >= 1");
  const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(KG.rows(), KG.cols()) - KG;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (!lu.isInvertible()) throw std::domain_error("I - KG is singular");
  return G * lu.inverse();
}

CElement tilted_integrate(const CElement& F, const CSpec& spec, const Eigen::MatrixXcd& K) {
  const CElement weight = exp_even(psibar_psi_form(F.universe(), spec, K, cplx(1.0)));
  const CElement num = gaussian_integrate(F * weight, spec);
  const cplx den = gaussian_integrate(weight, spec).constant_term();
  if (std::abs(den) == 0.0) throw std::domain_error("tilted measure has zero normalization");
  return num * (cplx(1.0) / den);
}

SourceCoupling make_sources(const UniversePtr& u, const CSpec& spec, double vol) {
  SourceCoupling sc;
  sc.vol = vol;
  detail::SpecIndex<cplx> idx(spec);
  for (int gj : u->generators(Species::J)) {
    Mode m = u->mode(gj);
    Mode mb = m, mp = m, mpb = m;
    mb.species = Species::JBar;
    mp.species = Species::Psi;
    mpb.species = Species::PsiBar;
    const int gp = u->index(mp), gpb = u->index(mpb);
    const int r = idx.row[static_cast<std::size_t>(gp)], c = idx.col[static_cast<std::size_t>(gpb)];
    if (r < 0 || c < 0) throw std::invalid_argument("source label is not an integrated mode");
    sc.J.push_back(gj);
    sc.Jbar.push_back(u->index(mb));
    sc.psi.push_back(gp);
    sc.psibar.push_back(gpb);
    sc.row.push_back(r);
    sc.col.push_back(c);
  }
  return sc;
}

CElement source_term(const UniversePtr& u, const SourceCoupling& sc) {
  std::vector<CElement::Term> t;
  for (std::size_t a = 0; a < sc.J.size(); ++a) {
    // J̄ψ with J̄ after ψ canonically; ψ̄J already canonical.
    t.push_back({(1ULL << sc.Jbar[a]) | (1ULL << sc.psi[a]), cplx(-sc.vol)});
    t.push_back({(1ULL << sc.psibar[a]) | (1ULL << sc.J[a]), cplx(sc.vol)});
  }
  return CElement::from_terms(u, std::move(t));
}

CElement source_quadratic(const UniversePtr& u, const CSpec& spec, const SourceCoupling& sc) {
  std::vector<CElement::Term> t;
  const double w = sc.vol * sc.vol;
  for (std::size_t x = 0; x < sc.J.size(); ++x)
    for (std::size_t y = 0; y < sc.J.size(); ++y) {
      const cplx g = spec.cov(sc.row[x], sc.col[y]);
      if (g == cplx(0)) continue;
      // J̄_x J_y = −J_y J̄_x
      t.push_back({(1ULL << sc.Jbar[x]) | (1ULL << sc.J[y]), -w * g});
    }
  return CElement::from_terms(u, std::move(t));
}

CElement source_generating_function(const UniversePtr& u, const CSpec& spec,
                                    const SourceCoupling& sc) {
  return gaussian_integrate(exp_even(source_term(u, sc)), spec);
}

namespace {

// Linear forms (GJ)(x) and (J̄G)(y).
CElement gj_form(const UniversePtr& u, const CSpec& spec, const SourceCoupling& sc, int row) {
  std::vector<CElement::Term> t;
  for (std::size_t y = 0; y < sc.J.size(); ++y) {
    const cplx g = spec.cov(row, sc.col[y]);
    if (g != cplx(0)) t.push_back({1ULL << sc.J[y], sc.vol * g});
  }
  return CElement::from_terms(u, std::move(t), std::nullopt, 0.0);
}

CElement jg_form(const UniversePtr& u, const CSpec& spec, const SourceCoupling& sc, int col) {
  std::vector<CElement::Term> t;
  for (std::size_t x = 0; x < sc.J.size(); ++x) {
    const cplx g = spec.cov(sc.row[x], col);
    if (g != cplx(0)) t.push_back({1ULL << sc.Jbar[x], sc.vol * g});
  }
  return CElement::from_terms(u, std::move(t), std::nullopt, 0.0);
}

}  // namespace

CElement shift_by_sources(const CElement& F, const CSpec& spec, const SourceCoupling& sc) {
  const auto& u = F.universe();
  std::vector<std::optional<CElement>> subs(static_cast<std::size_t>(u->size()));
  for (std::size_t i = 0; i < spec.psi.size(); ++i)
    subs[static_cast<std::size_t>(spec.psi[i])] =
        CElement::generator(u, spec.psi[i]) + gj_form(u, spec, sc, static_cast<int>(i));
  for (std::size_t j = 0; j < spec.psibar.size(); ++j)
    subs[static_cast<std::size_t>(spec.psibar[j])] =
        CElement::generator(u, spec.psibar[j]) + jg_form(u, spec, sc, static_cast<int>(j));
  return substitute(F, subs, u);
}

CElement pullback_to_sources(const CElement& F, const CSpec& spec, const SourceCoupling& sc) {
  const int n = static_cast<int>(sc.J.size());
  std::vector<int> psi, psibar;
  Mat<cplx> Mp(static_cast<int>(spec.psi.size()), n), Mb(static_cast<int>(spec.psibar.size()), n);
  for (std::size_t i = 0; i < spec.psi.size(); ++i)
    for (int y = 0; y < n; ++y)
      Mp(static_cast<int>(i), y) = sc.vol * spec.cov(static_cast<int>(i), sc.col[static_cast<std::size_t>(y)]);
  for (std::size_t j = 0; j < spec.psibar.size(); ++j)
    for (int x = 0; x < n; ++x)
      Mb(static_cast<int>(j), x) = sc.vol * spec.cov(sc.row[static_cast<std::size_t>(x)], static_cast<int>(j));
  return linear_pullback(F, spec.psi, Mp, sc.J, spec.psibar, Mb, sc.Jbar);
}

double shift_identity_residual(const CElement& F, const CSpec& spec, const SourceCoupling& sc) {
  const auto& u = F.universe();
  CElement lhs = gaussian_integrate(exp_even(source_term(u, sc)) * F, spec);
  CElement rhs = exp_even(source_quadratic(u, spec, sc)) * gaussian_integrate(shift_by_sources(F, spec, sc), spec);
  return max_abs_diff(lhs, rhs);
}

}  // namespace gn

#pragma once

#include <unordered_map>

#include <Eigen/Dense>

#include "gn/grassmann.hpp"

namespace gn {

template <class T>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<T> a;
  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, T(0)) {}
  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

Mat<cplx> from_eigen(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd to_eigen(const Mat<cplx>& m);

// Sign ε_n relating the ψ…ψ̄… ordering to the paired ψψ̄ψψ̄… ordering.
// The table is produced by sorting permutations and checked once at startup.
int epsilon_sign(int n);
bool epsilon_table_verified();

namespace detail {

template <class T>
T det_cofactor(const Mat<T>& m) {
  const int n = m.rows;
  if (n == 0) return T(1);
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  T s(0);
  for (int j = 0; j < n; ++j) {
    if (m(0, j) == T(0)) continue;
    Mat<T> minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    T t = m(0, j) * det_cofactor(minor);
    s += (j % 2) ? T(-t) : t;
  }
  return s;
}

inline cplx det_elimination(const Mat<cplx>& m) { return to_eigen(m).partialPivLu().determinant(); }

template <class T>
T det_elimination(Mat<T> m) {
  const int n = m.rows;
  T d(1);
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && m(p, c) == T(0)) ++p;
    if (p == n) return T(0);
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      d = -d;
    }
    d *= m(c, c);
    for (int r = c + 1; r < n; ++r) {
      if (m(r, c) == T(0)) continue;
      T f = m(r, c) / m(c, c);
      for (int j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return d;
}

}  // namespace detail

// Cofactor expansion below 5×5, pivoted elimination from 5×5 up.
template <class T>
T determinant(const Mat<T>& m) {
  if (m.rows != m.cols) throw std::invalid_argument("determinant of a non-square matrix");
  return m.rows < 5 ? detail::det_cofactor(m) : detail::det_elimination(m);
}

// Gaussian measure on a chosen set of conjugate pairs: cov(i, j) is the
// integral of ψ_{psi[i]} ψ̄_{psibar[j]}.
template <class T>
struct GaussianSpec {
  std::vector<int> psi;
  std::vector<int> psibar;
  Mat<T> cov;

  void validate(const Universe& u) const {
    if (cov.rows != static_cast<int>(psi.size()) || cov.cols != static_cast<int>(psibar.size()))
      throw std::invalid_argument("covariance dimensions do not match the integrated modes");
    std::uint64_t seen = 0;
    for (int g : psi) {
      if (g < 0 || g >= u.size() || (seen >> g & 1ULL))
        throw std::invalid_argument("bad integrated generator");
      seen |= 1ULL << g;
    }
    for (int g : psibar) {
      if (g < 0 || g >= u.size() || (seen >> g & 1ULL))
        throw std::invalid_argument("bad integrated generator");
      seen |= 1ULL << g;
    }
    if (!psi.empty() && !psibar.empty() &&
        *std::max_element(psi.begin(), psi.end()) > *std::min_element(psibar.begin(), psibar.end()))
      throw std::invalid_argument("integrated ψ generators must precede ψ̄ generators");
  }
  std::uint64_t psi_mask() const {
    std::uint64_t m = 0;
    for (int g : psi) m |= 1ULL << g;
    return m;
  }
  std::uint64_t psibar_mask() const {
    std::uint64_t m = 0;
    for (int g : psibar) m |= 1ULL << g;
    return m;
  }
};

// Measure over all ψ/ψ̄ modes of a universe, in canonical order.
template <class T>
GaussianSpec<T> full_spec(const Universe& u, const Mat<T>& cov) {
  GaussianSpec<T> s{u.generators(Species::Psi), u.generators(Species::PsiBar), cov};
  s.validate(u);
  return s;
}

namespace detail {

// Row/column lookup from generator index to covariance index.
template <class T>
struct SpecIndex {
  std::vector<int> row, col;
  explicit SpecIndex(const GaussianSpec<T>& s) : row(64, -1), col(64, -1) {
    for (std::size_t i = 0; i < s.psi.size(); ++i) row[static_cast<std::size_t>(s.psi[i])] = static_cast<int>(i);
    for (std::size_t j = 0; j < s.psibar.size(); ++j)
      col[static_cast<std::size_t>(s.psibar[j])] = static_cast<int>(j);
  }
};

// Cached ε_n·det cov[A, B] for generator subsets A (ψ) and B (ψ̄).
template <class T>
class DetCache {
 public:
  DetCache(const GaussianSpec<T>& s) : spec_(s), idx_(s) {}
  T operator()(std::uint64_t A, std::uint64_t B) {
    const std::uint64_t key = A | B;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const int n = std::popcount(A);
    Mat<T> m(n, n);
    int i = 0;
    for (std::uint64_t a = A; a; a &= a - 1, ++i) {
      const int r = idx_.row[static_cast<std::size_t>(std::countr_zero(a))];
      int j = 0;
      for (std::uint64_t b = B; b; b &= b - 1, ++j)
        m(i, j) = spec_.cov(r, idx_.col[static_cast<std::size_t>(std::countr_zero(b))]);
    }
    T d = determinant(m);
    if (epsilon_sign(n) < 0) d = -d;
    cache_.emplace(key, d);
    return d;
  }

 private:
  const GaussianSpec<T>& spec_;
  SpecIndex<T> idx_;
  std::unordered_map<std::uint64_t, T> cache_;
};

template <class T>
class Accumulator {
 public:
  explicit Accumulator(std::uint64_t support) : cz_(support) {
    dense_ = static_cast<int>(cz_.pos.size()) <= kDenseLimit;
    if (dense_) {
      acc_.assign(std::size_t{1} << cz_.pos.size(), T(0));
      touched_.assign(acc_.size(), 0);
    }
  }
  void add(std::uint64_t key, const T& v) {
    if (dense_) {
      const auto c = cz_.compress(key);
      acc_[c] += v;
      touched_[c] = 1;
    } else {
      map_[key] += v;
    }
  }
  std::vector<std::pair<std::uint64_t, T>> take() {
    std::vector<std::pair<std::uint64_t, T>> out;
    if (dense_) {
      for (std::size_t k = 0; k < acc_.size(); ++k)
        if (touched_[k]) out.push_back({cz_.expand(static_cast<std::uint32_t>(k)), acc_[k]});
    } else {
      out.assign(map_.begin(), map_.end());
    }
    return out;
  }

 private:
  Compressor cz_;
  bool dense_ = false;
  std::vector<T> acc_;
  std::vector<char> touched_;
  std::unordered_map<std::uint64_t, T> map_;
};

// Submasks of m grouped by size.
inline std::vector<std::vector<std::uint64_t>> submasks_by_size(std::uint64_t m) {
  std::vector<std::vector<std::uint64_t>> out(static_cast<std::size_t>(std::popcount(m)) + 1);
  std::uint64_t s = m;
  while (true) {
    out[static_cast<std::size_t>(std::popcount(s))].push_back(s);
    if (s == 0) break;
    s = (s - 1) & m;
  }
  return out;
}

}  // namespace detail

// Integrates out the spec's modes term by term with the determinant rule.
// Unintegrated generators are moved to the right of the integrated block;
// unbalanced terms vanish.
template <class T>
Element<T> gaussian_integrate(const Element<T>& F, const GaussianSpec<T>& spec) {
  spec.validate(*F.universe());
  const std::uint64_t mp = spec.psi_mask(), mb = spec.psibar_mask();
  detail::DetCache<T> dets(spec);
  std::vector<typename Element<T>::Term> out;
  for (auto& [k, c] : F.terms()) {
    const std::uint64_t A = k & mp, B = k & mb;
    if (std::popcount(A) != std::popcount(B)) continue;
    T v = c * dets(A, B);
    if (bits::extraction_odd(k, A | B)) v = -v;
    out.push_back({k & ~(A | B), v});
  }
  return Element<T>::from_terms(F.universe(), std::move(out), F.degree_cap(), F.prune_tolerance())
      .mark_truncated(F.truncated());
}

// ∫ F(ψ + η) dμ(η): the spec's generators in F are shifted by a fluctuation
// field which is then integrated out. The result lives on the same modes.
template <class T>
Element<T> gaussian_convolve(const Element<T>& F, const GaussianSpec<T>& spec) {
  spec.validate(*F.universe());
  const std::uint64_t mp = spec.psi_mask(), mb = spec.psibar_mask();
  detail::DetCache<T> dets(spec);
  detail::Accumulator<T> acc(F.support());
  for (auto& [k, c] : F.terms()) {
    const auto sa = detail::submasks_by_size(k & mp);
    const auto sb = detail::submasks_by_size(k & mb);
    const std::size_t top = std::min(sa.size(), sb.size());
    for (std::size_t n = 0; n < top; ++n)
      for (std::uint64_t A : sa[n])
        for (std::uint64_t B : sb[n]) {
          T v = c * dets(A, B);
          if (bits::extraction_odd(k, A | B)) v = -v;
          acc.add(k & ~(A | B), v);
        }
  }
  return Element<T>::from_terms(F.universe(), acc.take(), F.degree_cap(), F.prune_tolerance())
      .mark_truncated(F.truncated());
}

// Σ_{i,j} M(i,j) · left_i · right_j.
template <class T>
Element<T> bilinear(const UniversePtr& u, const std::vector<int>& left,
                    const std::vector<int>& right, const Mat<T>& M, T scale = T(1)) {
  std::vector<typename Element<T>::Term> out;
  for (std::size_t i = 0; i < left.size(); ++i)
    for (std::size_t j = 0; j < right.size(); ++j) {
      T v = scale * M(static_cast<int>(i), static_cast<int>(j));
      if (v == T(0)) continue;
      const int l = left[i], r = right[j];
      if (l == r) continue;
      out.push_back({(1ULL << l) | (1ULL << r), l > r ? T(-v) : v});
    }
  return Element<T>::from_terms(u, std::move(out));
}

// Replaces ψ_{psi[i]} by Σ_a Mpsi(i,a) t_{tpsi[a]} and ψ̄_{psibar[j]} by
// Σ_b Mbar(j,b) t_{tbar[b]}, expanding products through minors. F may only
// contain the listed generators; all tpsi targets must precede all tbar targets.
template <class T>
Element<T> linear_pullback(const Element<T>& F, const std::vector<int>& psi, const Mat<T>& Mpsi,
                           const std::vector<int>& tpsi, const std::vector<int>& psibar,
                           const Mat<T>& Mbar, const std::vector<int>& tbar) {
  std::vector<int> row(64, -1), col(64, -1);
  for (std::size_t i = 0; i < psi.size(); ++i) row[static_cast<std::size_t>(psi[i])] = static_cast<int>(i);
  for (std::size_t j = 0; j < psibar.size(); ++j)
    col[static_cast<std::size_t>(psibar[j])] = static_cast<int>(j);
  std::uint64_t mp = 0, mb = 0, tp = 0, tb = 0;
  for (int g : psi) mp |= 1ULL << g;
  for (int g : psibar) mb |= 1ULL << g;
  std::vector<int> trow(64, -1), tcol(64, -1);
  for (std::size_t a = 0; a < tpsi.size(); ++a) {
    tp |= 1ULL << tpsi[a];
    trow[static_cast<std::size_t>(tpsi[a])] = static_cast<int>(a);
  }
  for (std::size_t b = 0; b < tbar.size(); ++b) {
    tb |= 1ULL << tbar[b];
    tcol[static_cast<std::size_t>(tbar[b])] = static_cast<int>(b);
  }
  const auto targets_p = detail::submasks_by_size(tp);
  const auto targets_b = detail::submasks_by_size(tb);

  std::unordered_map<std::uint64_t, T> minors_p, minors_b;
  auto minor = [](std::unordered_map<std::uint64_t, T>& cache, std::uint64_t src, std::uint64_t dst,
                  const Mat<T>& M, const std::vector<int>& ri, const std::vector<int>& ci) {
    const std::uint64_t key = src | dst;  // source and target generators are disjoint
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const int n = std::popcount(src);
    Mat<T> m(n, n);
    int i = 0;
    for (std::uint64_t s = src; s; s &= s - 1, ++i) {
      int j = 0;
      for (std::uint64_t d = dst; d; d &= d - 1, ++j)
        m(i, j) = M(ri[static_cast<std::size_t>(std::countr_zero(s))],
                    ci[static_cast<std::size_t>(std::countr_zero(d))]);
    }
    T v = determinant(m);
    cache.emplace(key, v);
    return v;
  };

  detail::Accumulator<T> acc(tp | tb);
  for (auto& [k, c] : F.terms()) {
    if (k & ~(mp | mb)) throw std::invalid_argument("linear_pullback: unmapped generator");
    const std::uint64_t P = k & mp, Q = k & mb;
    const auto np = static_cast<std::size_t>(std::popcount(P));
    const auto nq = static_cast<std::size_t>(std::popcount(Q));
    if (np >= targets_p.size() || nq >= targets_b.size()) continue;
    for (std::uint64_t A : targets_p[np]) {
      const T da = minor(minors_p, P, A, Mpsi, row, trow);
      if (da == T(0)) continue;
      for (std::uint64_t B : targets_b[nq]) {
        const T db = minor(minors_b, Q, B, Mbar, col, tcol);
        if (db == T(0)) continue;
        acc.add(A | B, c * da * db);
      }
    }
  }
  return Element<T>::from_terms(F.universe(), acc.take(), F.degree_cap(), F.prune_tolerance());
}

// ---- complex-valued operations -------------------------------------------

using CSpec = GaussianSpec<cplx>;

// det(I + J·G), the integral of exp(−<ψ̄, Jψ>); J is indexed (ψ̄, ψ).
cplx characteristic_function(const CSpec& spec, const Eigen::MatrixXcd& J);

// −<ψ̄, Jψ> as an element.
CElement psibar_psi_form(const UniversePtr& u, const CSpec& spec, const Eigen::MatrixXcd& J,
                         cplx scale);

// G(I − KG)^{-1}. Throws when ‖KG‖ ≥ 1 or I − KG is singular.
Eigen::MatrixXcd tilted_covariance(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& K);

// ∫F e^{<ψ̄,Kψ>} dμ_G / ∫e^{<ψ̄,Kψ>} dμ_G computed by direct integration.
CElement tilted_integrate(const CElement& F, const CSpec& spec, const Eigen::MatrixXcd& K);

// Source pairs: J and J̄ modes share labels with ψ/ψ̄ modes. `vol` is the
// quadrature weight of the pairings <J̄,ψ> = vol Σ J̄ψ.
struct SourceCoupling {
  std::vector<int> psi, psibar, J, Jbar;  // aligned by label
  std::vector<int> row, col;              // covariance row/column of each label
  double vol = 1.0;
};

SourceCoupling make_sources(const UniversePtr& u, const CSpec& spec, double vol);

// <J̄,ψ> + <ψ̄,J>
CElement source_term(const UniversePtr& u, const SourceCoupling& sc);
// <J̄, G J>
CElement source_quadratic(const UniversePtr& u, const CSpec& spec, const SourceCoupling& sc);
// ∫ e^{<J̄,ψ>+<ψ̄,J>} dμ_G
CElement source_generating_function(const UniversePtr& u, const CSpec& spec,
                                    const SourceCoupling& sc);
// F(ψ + GJ, ψ̄ + J̄G)
CElement shift_by_sources(const CElement& F, const CSpec& spec, const SourceCoupling& sc);
// F(GJ, J̄G); F may only depend on the source-paired ψ/ψ̄ modes.
CElement pullback_to_sources(const CElement& F, const CSpec& spec, const SourceCoupling& sc);
// max coefficient deviation between ∫e^{<J̄,ψ>+<ψ̄,J>}F dμ_G and
// e^{<J̄,GJ>}∫F(ψ+GJ, ψ̄+J̄G) dμ_G
double shift_identity_residual(const CElement& F, const CSpec& spec, const SourceCoupling& sc);

}  // namespace gn

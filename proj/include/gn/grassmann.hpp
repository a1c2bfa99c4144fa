#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace gn {

using cplx = std::complex<double>;
using Rational = boost::rational<long long>;

enum class Species : std::uint8_t { Psi = 0, PsiBar = 1, J = 2, JBar = 3 };

std::string species_name(Species s);

// Canonical order is the member order: species, site, spin, color.
struct Mode {
  Species species = Species::Psi;
  int site = 0;
  int spin = 0;   // 0 or 1
  int color = 0;  // 0 .. n_internal-1
  auto operator<=>(const Mode&) const = default;
};

// The ordered generator set of one algebra. At most 64 generators; the
// generator index is the rank of the mode in canonical order.
class Universe {
 public:
  explicit Universe(std::vector<Mode> modes);

  // All (site, spin, color) modes for each listed species.
  static std::shared_ptr<const Universe> lattice(int n_sites, int n_internal,
                                                 const std::vector<Species>& species);

  int size() const { return static_cast<int>(modes_.size()); }
  const Mode& mode(int g) const { return modes_.at(static_cast<std::size_t>(g)); }
  const std::vector<Mode>& modes() const { return modes_; }
  std::optional<int> find(const Mode& m) const;
  int index(const Mode& m) const;
  std::uint64_t species_mask(Species s) const;
  std::vector<int> generators(Species s) const;
  bool operator==(const Universe& o) const { return modes_ == o.modes_; }

 private:
  std::vector<Mode> modes_;
};

using UniversePtr = std::shared_ptr<const Universe>;

namespace bits {

inline std::uint64_t below(int g) { return g >= 64 ? ~0ULL : ((1ULL << g) - 1ULL); }

// Parity of #{(i in a, j in b) : i > j}: the sign of reordering a·b canonically.
inline bool product_odd(std::uint64_t a, std::uint64_t b) {
  int cnt = 0;
  while (b) {
    int j = std::countr_zero(b);
    b &= b - 1;
    cnt += std::popcount((a >> j) >> 1);
  }
  return cnt & 1;
}

// Parity of moving the generators in `sel` (a subset of `key`) to the front,
// keeping their relative order.
inline bool extraction_odd(std::uint64_t key, std::uint64_t sel) {
  std::uint64_t rest = key & ~sel;
  int cnt = 0;
  while (sel) {
    int g = std::countr_zero(sel);
    sel &= sel - 1;
    cnt += std::popcount(rest & below(g));
  }
  return cnt & 1;
}

}  // namespace bits

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<cplx> {
  static constexpr bool exact = false;
  static double abs(const cplx& c) { return std::abs(c); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static double abs(const Rational& r) { return std::abs(boost::rational_cast<double>(r)); }
};

struct HNorm {
  double h = 1.0;
  double h_bar = 1.0;
  double h_aux = 1.0;
};

// Coefficients below this modulus are dropped after each operation on new
// elements. Change it only through PruneToleranceScope.
inline std::atomic<double>& default_prune_tolerance() {
  static std::atomic<double> tol{1e-14};
  return tol;
}

class PruneToleranceScope {
 public:
  explicit PruneToleranceScope(double tol) : saved_(default_prune_tolerance().exchange(tol)) {}
  ~PruneToleranceScope() { default_prune_tolerance().store(saved_); }
  PruneToleranceScope(const PruneToleranceScope&) = delete;
  PruneToleranceScope& operator=(const PruneToleranceScope&) = delete;

 private:
  double saved_;
};

template <class T>
class Element {
 public:
  using Term = std::pair<std::uint64_t, T>;

  Element() = default;
  explicit Element(UniversePtr u, T constant = T(0)) : u_(std::move(u)) {
    if (!u_) throw std::invalid_argument("element needs a universe");
    if (constant != T(0)) terms_.push_back({0, constant});
  }

  static Element one(UniversePtr u) { return Element(std::move(u), T(1)); }
  static Element generator(UniversePtr u, int g, T c = T(1)) {
    Element e(std::move(u));
    if (c != T(0)) e.terms_.push_back({1ULL << g, c});
    return e;
  }

  // Builds from arbitrary (possibly repeated, unsorted) canonical keys.
  static Element from_terms(UniversePtr u, std::vector<Term> terms,
                            std::optional<int> cap = std::nullopt, std::optional<double> tol = std::nullopt) {
    Element e(std::move(u));
    e.cap_ = cap;
    if (tol) e.tol_ = *tol;
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.first < b.first; });
    for (auto& t : terms) {
      if (!e.terms_.empty() && e.terms_.back().first == t.first)
        e.terms_.back().second += t.second;
      else
        e.terms_.push_back(t);
    }
    e.normalize();
    return e;
  }

  const UniversePtr& universe() const { return u_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool flagged_zero() const { return flagged_zero_; }
  bool truncated() const { return truncated_; }
  std::optional<int> degree_cap() const { return cap_; }
  double prune_tolerance() const { return tol_; }

  Element& set_degree_cap(std::optional<int> cap) {
    cap_ = cap;
    normalize();
    return *this;
  }
  Element& set_prune_tolerance(double tol) {
    tol_ = tol;
    normalize();
    return *this;
  }
  Element& mark_flagged_zero() {
    flagged_zero_ = true;
    return *this;
  }
  Element& mark_truncated(bool t = true) {
    truncated_ = truncated_ || t;
    return *this;
  }

  T coefficient(std::uint64_t key) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, std::uint64_t k) { return t.first < k; });
    return (it != terms_.end() && it->first == key) ? it->second : T(0);
  }
  T constant_term() const { return coefficient(0); }

  bool is_even() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return std::popcount(t.first) % 2 == 0; });
  }
  int max_degree() const {
    int d = 0;
    for (auto& t : terms_) d = std::max(d, std::popcount(t.first));
    return d;
  }
  std::uint64_t support() const {
    std::uint64_t s = 0;
    for (auto& t : terms_) s |= t.first;
    return s;
  }

  Element filter(const std::function<bool(std::uint64_t)>& keep) const {
    Element e = empty_like();
    for (auto& t : terms_)
      if (keep(t.first)) e.terms_.push_back(t);
    return e;
  }

  // Same universe, cap, tolerance and flags; no terms.
  Element empty_like() const {
    Element e(u_);
    e.cap_ = cap_;
    e.tol_ = tol_;
    e.truncated_ = truncated_;
    return e;
  }

  Element operator-() const {
    Element e = *this;
    for (auto& t : e.terms_) t.second = -t.second;
    return e;
  }
  Element& operator*=(const T& s) {
    for (auto& t : terms_) t.second *= s;
    normalize();
    return *this;
  }
  friend Element operator*(Element e, const T& s) { return e *= s; }
  friend Element operator*(const T& s, Element e) { return e *= s; }

  friend Element operator+(const Element& a, const Element& b) { return combine(a, b, T(1)); }
  friend Element operator-(const Element& a, const Element& b) { return combine(a, b, T(-1)); }
  Element& operator+=(const Element& b) { return *this = combine(*this, b, T(1)); }
  Element& operator-=(const Element& b) { return *this = combine(*this, b, T(-1)); }

  // Exact term-by-term equality.
  bool operator==(const Element& o) const { return terms_ == o.terms_; }

  // Largest coefficient modulus of a − b.
  friend double max_abs_diff(const Element& a, const Element& b) {
    require_universe(a, b);
    double m = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].first < b.terms_[j].first)) {
        m = std::max(m, ScalarTraits<T>::abs(a.terms_[i++].second));
      } else if (i == a.terms_.size() || b.terms_[j].first < a.terms_[i].first) {
        m = std::max(m, ScalarTraits<T>::abs(b.terms_[j++].second));
      } else {
        m = std::max(m, ScalarTraits<T>::abs(a.terms_[i++].second - b.terms_[j++].second));
      }
    }
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (auto& t : terms_) m = std::max(m, ScalarTraits<T>::abs(t.second));
    return m;
  }

  // Removes zero/small coefficients and terms above the degree cap.
  void normalize() {
    std::size_t w = 0;
    for (std::size_t r = 0; r < terms_.size(); ++r) {
      auto& t = terms_[r];
      if (cap_ && std::popcount(t.first) > *cap_) {
        truncated_ = true;
        continue;
      }
      if (t.second == T(0)) continue;
      if constexpr (!ScalarTraits<T>::exact) {
        if (ScalarTraits<T>::abs(t.second) < tol_) continue;
      }
      terms_[w++] = t;
    }
    terms_.resize(w);
  }

  // Internal: direct access for algorithms that emit sorted unique keys.
  std::vector<Term>& mutable_terms() { return terms_; }

 private:
  static void require_universe(const Element& a, const Element& b) {
    if (!a.u_ || !b.u_ || !(a.u_ == b.u_ || *a.u_ == *b.u_))
      throw std::invalid_argument("elements belong to different mode universes");
  }

  static Element combine(const Element& a, const Element& b, T sb) {
    require_universe(a, b);
    Element e = a.empty_like();
    e.cap_ = merge_cap(a.cap_, b.cap_);
    e.truncated_ = a.truncated_ || b.truncated_;
    e.terms_.reserve(a.terms_.size() + b.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].first < b.terms_[j].first)) {
        e.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || b.terms_[j].first < a.terms_[i].first) {
        e.terms_.push_back({b.terms_[j].first, sb * b.terms_[j].second});
        ++j;
      } else {
        e.terms_.push_back({a.terms_[i].first, a.terms_[i].second + sb * b.terms_[j].second});
        ++i;
        ++j;
      }
    }
    e.normalize();
    return e;
  }

 public:
  static std::optional<int> merge_cap(std::optional<int> a, std::optional<int> b) {
    if (a && b) return std::min(*a, *b);
    return a ? a : b;
  }

 private:
  UniversePtr u_;
  std::vector<Term> terms_;
  std::optional<int> cap_;
  double tol_ = default_prune_tolerance().load();
  bool flagged_zero_ = false;
  bool truncated_ = false;
};

using CElement = Element<cplx>;
using QElement = Element<Rational>;

inline void require_same_universe(const UniversePtr& a, const UniversePtr& b) {
  if (!a || !b || !(a == b || *a == *b))
    throw std::invalid_argument("elements belong to different mode universes");
}

// Monomial in the given (arbitrary) order, canonicalized with its sorting sign.
// A repeated mode yields a flagged zero.
template <class T>
Element<T> make_monomial(const UniversePtr& u, const std::vector<Mode>& modes, T coeff) {
  std::vector<int> g;
  g.reserve(modes.size());
  for (auto& m : modes) g.push_back(u->index(m));
  Element<T> e(u);
  int inversions = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (g[i] == g[j]) return e.mark_flagged_zero();
      if (g[i] > g[j]) ++inversions;
    }
  std::uint64_t key = 0;
  for (int x : g) key |= 1ULL << x;
  if (coeff == T(0)) return e;
  e.mutable_terms().push_back({key, (inversions % 2) ? T(-coeff) : coeff});
  return e;
}

namespace detail {

// Order-preserving compression of a key onto the bits of `support`.
struct Compressor {
  std::vector<int> pos;  // support bit positions, ascending
  explicit Compressor(std::uint64_t support) {
    while (support) {
      pos.push_back(std::countr_zero(support));
      support &= support - 1;
    }
  }
  std::uint32_t compress(std::uint64_t key) const {
    std::uint32_t c = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (key >> pos[i] & 1ULL) c |= 1U << i;
    return c;
  }
  std::uint64_t expand(std::uint32_t c) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (c >> i & 1U) k |= 1ULL << pos[i];
    return k;
  }
};

inline constexpr int kDenseLimit = 20;

}  // namespace detail

// Graded product. Signs come from canonical reordering; terms beyond the
// degree cap are dropped and flagged.
template <class T>
Element<T> multiply(const Element<T>& F, const Element<T>& H) {
  require_same_universe(F.universe(), H.universe());
  Element<T> out(F.universe());
  auto cap = Element<T>::merge_cap(F.degree_cap(), H.degree_cap());
  out.set_degree_cap(cap);
  out.set_prune_tolerance(std::max(F.prune_tolerance(), H.prune_tolerance()));
  bool truncated = F.truncated() || H.truncated();
  if (F.is_zero() || H.is_zero()) return out.mark_truncated(truncated);

  const std::uint64_t support = F.support() | H.support();
  const int nb = std::popcount(support);
  std::vector<typename Element<T>::Term> result;

  if (nb <= detail::kDenseLimit) {
    detail::Compressor cz(support);
    const std::size_t full = std::size_t{1} << nb;
    std::vector<T> acc(full, T(0));
    std::vector<char> touched(full, 0);
    std::vector<std::pair<std::uint32_t, T>> f, h;
    for (auto& t : F.terms()) f.push_back({cz.compress(t.first), t.second});
    for (auto& t : H.terms()) h.push_back({cz.compress(t.first), t.second});
    std::vector<T> hd(full, T(0));
    std::vector<char> hp(full, 0);
    for (auto& t : h) {
      hd[t.first] = t.second;
      hp[t.first] = 1;
    }
    const std::uint32_t all = static_cast<std::uint32_t>(full - 1);
    for (auto& [a, ca] : f) {
      const int da = std::popcount(a);
      const std::uint32_t freebits = all & ~a;
      auto emit = [&](std::uint32_t b, const T& cb) {
        if (cap && da + std::popcount(b) > *cap) {
          truncated = true;
          return;
        }
        const std::uint32_t k = a | b;
        T v = ca * cb;
        if (bits::product_odd(a, b)) v = -v;
        acc[k] += v;
        touched[k] = 1;
      };
      if ((std::size_t{1} << std::popcount(freebits)) < h.size()) {
        std::uint32_t s = freebits;
        while (true) {
          if (hp[s]) emit(s, hd[s]);
          if (s == 0) break;
          s = (s - 1) & freebits;
        }
      } else {
        for (auto& [b, cb] : h)
          if (!(a & b)) emit(b, cb);
      }
    }
    for (std::size_t k = 0; k < full; ++k)
      if (touched[k]) result.push_back({cz.expand(static_cast<std::uint32_t>(k)), acc[k]});
  } else {
    std::unordered_map<std::uint64_t, T> acc;
    acc.reserve(F.size() * 4 + H.size() * 4);
    for (auto& [a, ca] : F.terms()) {
      const int da = std::popcount(a);
      for (auto& [b, cb] : H.terms()) {
        if (a & b) continue;
        if (cap && da + std::popcount(b) > *cap) {
          truncated = true;
          continue;
        }
        T v = ca * cb;
        if (bits::product_odd(a, b)) v = -v;
        acc[a | b] += v;
      }
    }
    result.assign(acc.begin(), acc.end());
  }
  auto e = Element<T>::from_terms(F.universe(), std::move(result), cap,
                                  std::max(F.prune_tolerance(), H.prune_tolerance()));
  return e.mark_truncated(truncated);
}

template <class T>
Element<T> operator*(const Element<T>& a, const Element<T>& b) {
  return multiply(a, b);
}

template <class T>
Element<T> power(const Element<T>& F, int n) {
  Element<T> r = Element<T>::one(F.universe());
  r.set_degree_cap(F.degree_cap());
  r.set_prune_tolerance(F.prune_tolerance());
  for (int i = 0; i < n; ++i) r = r * F;
  return r;
}

// Left derivative with respect to one generator.
template <class T>
Element<T> derivative_generator(const Element<T>& F, int g) {
  std::vector<typename Element<T>::Term> out;
  const std::uint64_t bit = 1ULL << g;
  for (auto& [k, c] : F.terms()) {
    if (!(k & bit)) continue;
    const bool odd = std::popcount(k & bits::below(g)) & 1;
    out.push_back({k ^ bit, odd ? T(-c) : c});
  }
  return Element<T>::from_terms(F.universe(), std::move(out), F.degree_cap(), F.prune_tolerance())
      .mark_truncated(F.truncated());
}

// Smeared left derivative: sum over modes m of the species of test(m)·∂/∂m.
// A generator in position j (1-based) of a canonical monomial contributes
// with sign (−1)^{j+1}.
template <class T>
Element<T> derivative(const Element<T>& F, const std::function<T(const Mode&)>& test,
                      Species species) {
  const auto& u = *F.universe();
  std::vector<T> weight(static_cast<std::size_t>(u.size()), T(0));
  const std::uint64_t mask = u.species_mask(species);
  for (int g = 0; g < u.size(); ++g)
    if (mask >> g & 1ULL) weight[static_cast<std::size_t>(g)] = test(u.mode(g));
  std::vector<typename Element<T>::Term> out;
  for (auto& [k, c] : F.terms()) {
    std::uint64_t hit = k & mask;
    while (hit) {
      const int g = std::countr_zero(hit);
      hit &= hit - 1;
      const T w = weight[static_cast<std::size_t>(g)];
      if (w == T(0)) continue;
      const bool odd = std::popcount(k & bits::below(g)) & 1;
      T v = c * w;
      out.push_back({k ^ (1ULL << g), odd ? T(-v) : v});
    }
  }
  return Element<T>::from_terms(F.universe(), std::move(out), F.degree_cap(), F.prune_tolerance())
      .mark_truncated(F.truncated());
}

namespace detail {
inline cplx scalar_exp(const cplx& c) { return std::exp(c); }
inline Rational scalar_exp(const Rational& c) {
  if (c != Rational(0)) throw std::domain_error("exact exponential needs zero constant term");
  return Rational(1);
}
inline cplx scalar_log1p(const cplx& c) { return std::log(cplx(1.0) + c); }
inline Rational scalar_log1p(const Rational& c) {
  if (c != Rational(0)) throw std::domain_error("exact logarithm needs zero constant term");
  return Rational(0);
}
}  // namespace detail

// exp(A) for even A: e^{c}·Σ N^n/n! with N the nilpotent part.
template <class T>
Element<T> exp_even(const Element<T>& A) {
  if (!A.is_even()) throw std::invalid_argument("exp_even: element is not even");
  const T c = A.constant_term();
  Element<T> N = A - Element<T>(A.universe(), c);
  N.set_degree_cap(A.degree_cap());
  Element<T> sum = Element<T>::one(A.universe());
  sum.set_degree_cap(A.degree_cap());
  sum.set_prune_tolerance(A.prune_tolerance());
  Element<T> term = sum;
  for (int n = 1; !N.is_zero(); ++n) {
    term = term * N;
    if (term.is_zero()) {
      sum.mark_truncated(term.truncated());
      break;
    }
    term *= T(1) / T(n);
    sum += term;
  }
  return sum * detail::scalar_exp(c);
}

// log(1+A) = log(1+c) + Σ_n (−1)^{n−1} (N/(1+c))^n / n with N the nilpotent part.
template <class T>
Element<T> log_one_plus(const Element<T>& A) {
  const T c = A.constant_term();
  if (ScalarTraits<T>::abs(c) >= 1.0)
    throw std::domain_error("log_one_plus: constant term has modulus >= 1");
  Element<T> N = (A - Element<T>(A.universe(), c)) * (T(1) / (T(1) + c));
  N.set_degree_cap(A.degree_cap());
  Element<T> sum(A.universe(), detail::scalar_log1p(c));
  sum.set_degree_cap(A.degree_cap());
  sum.set_prune_tolerance(A.prune_tolerance());
  Element<T> term = Element<T>::one(A.universe());
  term.set_degree_cap(A.degree_cap());
  term.set_prune_tolerance(A.prune_tolerance());
  for (int n = 1;; ++n) {
    term = term * N;
    if (term.is_zero()) {
      sum.mark_truncated(term.truncated());
      break;
    }
    T w = T(1) / T(n);
    if (n % 2 == 0) w = -w;
    sum += term * w;
  }
  return sum;
}

// Weighted ℓ¹ proxy of the kernel norm: Σ h^n h̄^m h_aux^{k+ℓ} |c| vol^{deg}.
template <class T>
double h_norm(const Element<T>& F, const HNorm& w, double cell_volume = 1.0) {
  if (w.h <= 0 || w.h_bar <= 0 || w.h_aux <= 0)
    throw std::invalid_argument("h_norm: weights must be positive");
  const auto& u = *F.universe();
  const std::uint64_t mpsi = u.species_mask(Species::Psi);
  const std::uint64_t mbar = u.species_mask(Species::PsiBar);
  const std::uint64_t maux = u.species_mask(Species::J) | u.species_mask(Species::JBar);
  double s = 0.0;
  for (auto& [k, c] : F.terms()) {
    const int n = std::popcount(k & mpsi), m = std::popcount(k & mbar),
              a = std::popcount(k & maux);
    s += std::pow(w.h, n) * std::pow(w.h_bar, m) * std::pow(w.h_aux, a) *
         std::pow(cell_volume, n + m + a) * ScalarTraits<T>::abs(c);
  }
  return s;
}

// Replaces every generator g by the element subs[g] (a missing entry keeps g).
// Each replacement must be odd so the result is again a graded substitution.
template <class T>
Element<T> substitute(const Element<T>& F, const std::vector<std::optional<Element<T>>>& subs,
                      const UniversePtr& target) {
  Element<T> out(target);
  out.set_degree_cap(F.degree_cap());
  out.set_prune_tolerance(F.prune_tolerance());
  for (auto& [k, c] : F.terms()) {
    Element<T> prod(target, c);
    prod.set_degree_cap(F.degree_cap());
    prod.set_prune_tolerance(0.0);
    std::uint64_t rest = k;
    while (rest && !prod.is_zero()) {
      const int g = std::countr_zero(rest);
      rest &= rest - 1;
      const auto& s = subs.at(static_cast<std::size_t>(g));
      if (s)
        prod = prod * *s;
      else
        prod = prod * Element<T>::generator(target, target->index(F.universe()->mode(g)));
    }
    out += prod;
  }
  return out;
}

}  // namespace gn

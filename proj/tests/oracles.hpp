#pragma once

// Slow, obviously-correct reference implementations used by the tests.
// Nothing here shares code with the library beyond the element container.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gn/berezin.hpp"
#include "gn/grassmann.hpp"
#include "gn/polymer.hpp"

namespace oracle {

using gn::cplx;
using Poly = std::map<std::uint64_t, cplx>;  // canonical key -> coefficient

inline std::vector<int> gens_of(std::uint64_t key) {
  std::vector<int> g;
  for (int i = 0; i < 64; ++i)
    if (key >> i & 1ULL) g.push_back(i);
  return g;
}

// Bubble-sorts g ascending; returns the permutation sign, or 0 on a repeat.
inline int sort_sign(std::vector<int>& g) {
  int swaps = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j + 1 < g.size() - i; ++j) {
      if (g[j] == g[j + 1]) return 0;
      if (g[j] > g[j + 1]) {
        std::swap(g[j], g[j + 1]);
        ++swaps;
      }
    }
  for (std::size_t j = 0; j + 1 < g.size(); ++j)
    if (g[j] == g[j + 1]) return 0;
  return swaps % 2 ? -1 : 1;
}

// Sign of the permutation turning list `from` into list `to` (same elements).
inline int relative_sign(const std::vector<int>& from, const std::vector<int>& to) {
  std::vector<int> pos(from.size());
  for (std::size_t i = 0; i < from.size(); ++i)
    pos[i] = static_cast<int>(std::find(to.begin(), to.end(), from[i]) - to.begin());
  return sort_sign(pos);
}

inline Poly to_poly(const gn::CElement& e) {
  Poly p;
  for (auto& [k, c] : e.terms()) p[k] += c;
  return p;
}

inline gn::CElement to_element(const gn::UniversePtr& u, const Poly& p) {
  std::vector<gn::CElement::Term> t(p.begin(), p.end());
  return gn::CElement::from_terms(u, std::move(t), std::nullopt, 0.0);
}

inline double max_diff(const Poly& a, const Poly& b) {
  double m = 0.0;
  for (auto& [k, c] : a) {
    auto it = b.find(k);
    m = std::max(m, std::abs(c - (it == b.end() ? cplx(0) : it->second)));
  }
  for (auto& [k, c] : b)
    if (!a.count(k)) m = std::max(m, std::abs(c));
  return m;
}

// Product by concatenating generator lists and sorting.
inline Poly product(const Poly& a, const Poly& b) {
  Poly out;
  for (auto& [ka, ca] : a)
    for (auto& [kb, cb] : b) {
      std::vector<int> g = gens_of(ka);
      auto gb = gens_of(kb);
      g.insert(g.end(), gb.begin(), gb.end());
      const int s = sort_sign(g);
      if (s == 0) continue;
      out[ka | kb] += double(s) * ca * cb;
    }
  return out;
}

inline Poly add(Poly a, const Poly& b, cplx s = 1.0) {
  for (auto& [k, c] : b) a[k] += s * c;
  return a;
}

// exp of an even element: e^c Σ N^n/n!.
inline Poly exp(const Poly& A) {
  cplx c = 0.0;
  Poly N;
  for (auto& [k, v] : A) (k == 0 ? c : N[k]) += v;
  Poly sum{{0, 1.0}}, term{{0, 1.0}};
  for (int n = 1; n < 64; ++n) {
    term = product(term, N);
    bool any = false;
    for (auto& [k, v] : term) {
      v /= double(n);
      any = any || v != cplx(0);
    }
    if (!any) break;
    sum = add(sum, term);
  }
  for (auto& [k, v] : sum) v *= std::exp(c);
  return sum;
}

// Σ_σ sgn(σ) Π M(i, σ(i)).
inline cplx permutation_det(const Eigen::MatrixXcd& M) {
  const int n = static_cast<int>(M.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  cplx s = 0.0;
  do {
    std::vector<int> q = p;
    const int sg = sort_sign(q);
    cplx t = double(sg);
    for (int i = 0; i < n; ++i) t *= M(i, p[i]);
    s += t;
  } while (std::next_permutation(p.begin(), p.end()));
  return s;
}

// Gaussian integral from its defining pairing rule
// ∫ ψ_{a1} ψ̄_{b1} ⋯ ψ_{an} ψ̄_{bn} dμ_G = det[G(a_i, b_j)],
// unintegrated generators are carried to the right.
inline Poly gaussian(const Poly& F, const gn::CSpec& spec) {
  Poly out;
  std::map<int, int> row, col;
  for (std::size_t i = 0; i < spec.psi.size(); ++i) row[spec.psi[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < spec.psibar.size(); ++j) col[spec.psibar[j]] = static_cast<int>(j);
  for (auto& [k, c] : F) {
    std::vector<int> g = gens_of(k), a, b, rest;
    for (int x : g) (row.count(x) ? a : col.count(x) ? b : rest).push_back(x);
    if (a.size() != b.size()) continue;
    std::vector<int> target;
    for (std::size_t i = 0; i < a.size(); ++i) {
      target.push_back(a[i]);
      target.push_back(b[i]);
    }
    target.insert(target.end(), rest.begin(), rest.end());
    const int sg = relative_sign(g, target);
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXcd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = spec.cov(row[a[i]], col[b[j]]);
    std::uint64_t rk = 0;
    for (int x : rest) rk |= 1ULL << x;
    out[rk] += double(sg) * c * permutation_det(M);
  }
  return out;
}

// G Σ_n (KG)^n until the terms are negligible.
inline Eigen::MatrixXcd neumann_tilt(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& K) {
  Eigen::MatrixXcd term = G, sum = G;
  for (int n = 0; n < 400 && term.cwiseAbs().maxCoeff() > 1e-18; ++n) {
    term = term * K * G;
    sum += term;
  }
  return sum;
}

// ---- weights ---------------------------------------------------------------

// θ straight from its definition with integer powers.
inline std::uint64_t theta(std::uint64_t s, int L, int d) {
  if (s <= 1) return 1;
  std::uint64_t base = 2;
  for (int i = 0; i < d + 1; ++i) base *= static_cast<std::uint64_t>(L);
  std::uint64_t lo = 1, val = 1;
  while (!(lo < s && s <= lo * static_cast<std::uint64_t>(L))) {
    lo *= static_cast<std::uint64_t>(L);
    val *= base;
  }
  return val;
}

inline int linf(const gn::Block& a, const gn::Block& b, int side) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int t = ((a[i] - b[i]) % side + side) % side;
    m = std::max(m, std::min(t, side - t));
  }
  return m;
}

// Minimum over all labeled spanning trees (Prüfer sequences) of Π θ(|ℓ|).
inline double tree_infimum(const gn::PavedSet& X, int L) {
  const auto& B = X.blocks();
  const int n = static_cast<int>(B.size());
  if (n <= 1) return 1.0;
  auto weight = [&](int i, int j) {
    return static_cast<double>(theta(static_cast<std::uint64_t>(linf(B[i], B[j], X.torus_side())), L, X.dim()));
  };
  if (n == 2) return weight(0, 1);
  double best = HUGE_VAL;
  std::vector<int> seq(n - 2, 0);
  while (true) {
    std::vector<int> degree(n, 1);
    for (int x : seq) ++degree[x];
    double prod = 1.0;
    for (int x : seq) {
      int leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      prod *= weight(leaf, x);
      --degree[leaf];
      --degree[x];
    }
    int u = -1, v = -1;
    for (int i = 0; i < n; ++i)
      if (degree[i] == 1) (u < 0 ? u : v) = i;
    prod *= weight(u, v);
    best = std::min(best, prod);
    int pos = 0;
    while (pos < n - 2 && ++seq[pos] == n) seq[pos++] = 0;
    if (pos == n - 2) break;
  }
  return best;
}

// ---- flow --------------------------------------------------------------------

// With constant coefficients and p = v = 0 the flow reduces to
// g' = g + βg², z' = z + θg², e' = c(e + s g³).
struct ScalarFlow {
  double g, z, e;
};
inline std::vector<ScalarFlow> reduced_flow(double g0, int N, double beta, double theta, double contraction,
                                            double e_source) {
  std::vector<ScalarFlow> out{{g0, 0.0, 0.0}};
  for (int k = 0; k < N; ++k) {
    const auto& s = out.back();
    out.push_back({s.g + beta * s.g * s.g, s.z + theta * s.g * s.g, contraction * (s.e + e_source * s.g * s.g * s.g)});
  }
  return out;
}

// ---- random data ---------------------------------------------------------------

struct Rng {
  std::mt19937_64 eng;
  std::uniform_real_distribution<double> u{-0.5, 0.5};
  explicit Rng(std::uint64_t s) : eng(s) {}
  double real() { return u(eng); }
  cplx complex() { return {u(eng), u(eng)}; }
  int below(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
  Eigen::MatrixXcd matrix(int r, int c, double scale = 1.0) {
    Eigen::MatrixXcd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = scale * complex();
    return m;
  }
};

// Random even element over the ψ/ψ̄ generators of u with degree ≤ max_deg.
inline gn::CElement random_even(const gn::UniversePtr& u, Rng& rng, int n_terms, int max_deg) {
  std::vector<int> g = u->generators(gn::Species::Psi);
  for (int x : u->generators(gn::Species::PsiBar)) g.push_back(x);
  std::vector<gn::CElement::Term> t;
  for (int i = 0; i < n_terms; ++i) {
    const int deg = 2 * rng.below(max_deg / 2 + 1);
    std::uint64_t key = 0;
    while (std::popcount(key) < deg) key |= 1ULL << g[static_cast<std::size_t>(rng.below(static_cast<int>(g.size())))];
    t.push_back({key, rng.complex()});
  }
  return gn::CElement::from_terms(u, std::move(t));
}

}  // namespace oracle

#include "gn/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace gn {

PavedSet::PavedSet(int d, int torus_side, std::vector<Block> blocks)
    : d_(d), side_(torus_side), blocks_(std::move(blocks)) {
  if (d < 1) throw std::invalid_argument("paved set dimension must be >= 1");
  if (torus_side < 1) throw std::invalid_argument("torus side must be >= 1");
  for (auto& b : blocks_) {
    if (static_cast<int>(b.size()) != d) throw std::invalid_argument("block has the wrong dimension");
    for (int& c : b) c = ((c % side_) + side_) % side_;
  }
  std::sort(blocks_.begin(), blocks_.end());
  blocks_.erase(std::unique(blocks_.begin(), blocks_.end()), blocks_.end());
}

bool PavedSet::contains(const Block& b) const {
  return std::binary_search(blocks_.begin(), blocks_.end(), b);
}

PavedSet PavedSet::translated(const Block& shift) const {
  std::vector<Block> out = blocks_;
  for (auto& b : out)
    for (int i = 0; i < d_; ++i) b[static_cast<std::size_t>(i)] += shift[static_cast<std::size_t>(i)];
  return PavedSet(d_, side_, std::move(out));
}

int torus_distance(const Block& a, const Block& b, int side) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int t = std::abs(a[i] - b[i]) % side;
    m = std::max(m, std::min(t, side - t));
  }
  return m;
}

WeightParams WeightParams::defaults(int L, int d) {
  WeightParams p;
  p.L = L;
  p.d = d;
  p.A = std::pow(static_cast<double>(L), d + 2);
  return p;
}

int theta_level(std::uint64_t s, int L) {
  if (s <= 1) return 0;
  int n = 0;
  std::uint64_t lo = 1;  // L^n
  while (!(lo < s && s <= lo * static_cast<std::uint64_t>(L))) {
    lo *= static_cast<std::uint64_t>(L);
    ++n;
  }
  return n;
}

namespace {

std::uint64_t checked_pow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i)
    if (__builtin_mul_overflow(r, b, &r)) throw std::overflow_error("theta exceeds 64 bits");
  return r;
}

}  // namespace

std::uint64_t theta_exact(std::uint64_t s, int L, int d) {
  if (L < 2) throw std::invalid_argument("L must be >= 2");
  if (s <= 1) return 1;
  const std::uint64_t base = 2 * checked_pow(static_cast<std::uint64_t>(L), d + 1);
  return checked_pow(base, theta_level(s, L));
}

double theta(std::uint64_t s, const WeightParams& p) {
  return static_cast<double>(theta_exact(s, p.L, p.d));
}

bool theta_bound_check(const WeightParams& p, std::uint64_t s_max) {
  for (std::uint64_t s = 1; s <= s_max; ++s)
    if (theta_exact(s, p.L, p.d) > checked_pow(s, p.d + 2)) return false;
  return true;
}

std::uint64_t theta_scaling_violation(int L, int d, std::uint64_t s_lo, std::uint64_t s_hi) {
  const std::uint64_t base = 2 * checked_pow(static_cast<std::uint64_t>(L), d + 1);
  const auto uL = static_cast<std::uint64_t>(L);
  for (std::uint64_t s = s_lo; s <= s_hi; ++s) {
    const std::uint64_t up = (s + uL - 1) / uL;
    if (theta_exact(up, L, d) * base != theta_exact(s, L, d)) return s;
  }
  return 0;
}

double big_theta(const PavedSet& X, const WeightParams& p) {
  const std::size_t n = X.size();
  if (n == 0) throw std::invalid_argument("Theta of an empty paved set");
  // Prim on the complete graph, minimizing lengths; ties do not matter since
  // the product of a nondecreasing θ is minimized by any MST.
  std::vector<int> best(n, std::numeric_limits<int>::max());
  std::vector<char> in(n, 0);
  best[0] = 0;
  double prod = 1.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v] && (u == n || best[v] < best[u])) u = v;
    in[u] = 1;
    if (it > 0) prod *= theta(static_cast<std::uint64_t>(best[u]), p);
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v]) best[v] = std::min(best[v], torus_distance(X.blocks()[u], X.blocks()[v], X.torus_side()));
  }
  return prod;
}

double gamma_weight(const PavedSet& X, const WeightParams& p, GammaVariant v) {
  const double sz = static_cast<double>(X.size());
  double g = std::pow(p.A, sz) * big_theta(X, p);
  if (v == GammaVariant::Bulk) g *= std::exp(p.n * sz);
  return g;
}

PolymerNormResult polymer_norm(const std::vector<std::pair<PavedSet, double>>& family,
                               const WeightParams& p, GammaVariant v) {
  PolymerNormResult r;
  int d = 0, side = 0;
  for (auto& [X, norm] : family) {
    if (d == 0) {
      d = X.dim();
      side = X.torus_side();
    } else if (X.dim() != d || X.torus_side() != side) {
      throw std::invalid_argument("polymer family mixes tori");
    }
    const double w = norm * gamma_weight(X, p, v);
    for (auto& b : X.blocks()) r.per_block[b] += w;
  }
  for (auto& [b, s] : r.per_block) r.value = std::max(r.value, s);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(side);
  if (d > 0 && r.per_block.size() == total) {
    const double first = r.per_block.begin()->second;
    r.translation_invariant = true;
    for (auto& [b, s] : r.per_block)
      if (std::abs(s - first) > 1e-12 * std::max(1.0, std::abs(first))) r.translation_invariant = false;
  }
  return r;
}

PolymerNormResult polymer_norm(const std::vector<std::pair<PavedSet, CElement>>& family,
                               const HNorm& w, double cell_volume, const WeightParams& p,
                               GammaVariant v) {
  std::vector<std::pair<PavedSet, double>> norms;
  for (auto& [X, E] : family) norms.emplace_back(X, h_norm(E, w, cell_volume));
  return polymer_norm(norms, p, v);
}

std::vector<std::pair<PavedSet, double>> load_polymer_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const auto j = nlohmann::json::parse(in);
  const int d = j.at("d").get<int>(), side = j.at("side").get<int>();
  std::vector<std::pair<PavedSet, double>> out;
  for (auto& poly : j.at("polymers"))
    out.emplace_back(PavedSet(d, side, poly.at("blocks").get<std::vector<Block>>()),
                     poly.at("norm").get<double>());
  return out;
}

}  // namespace gn

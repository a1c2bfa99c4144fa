#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gn/grassmann.hpp"

namespace gn {

using Block = std::vector<int>;

// A union of unit blocks on a d-dimensional torus of side torus_side.
// Coordinates are reduced mod side, sorted and deduplicated.
class PavedSet {
 public:
  PavedSet(int d, int torus_side, std::vector<Block> blocks);

  int dim() const { return d_; }
  int torus_side() const { return side_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool contains(const Block& b) const;
  PavedSet translated(const Block& shift) const;
  bool operator<(const PavedSet& o) const { return blocks_ < o.blocks_; }
  bool operator==(const PavedSet& o) const { return d_ == o.d_ && side_ == o.side_ && blocks_ == o.blocks_; }

 private:
  int d_, side_;
  std::vector<Block> blocks_;
};

// ℓ^∞ distance with wrap-around.
int torus_distance(const Block& a, const Block& b, int side);

struct WeightParams {
  int L = 2;
  int d = 2;
  double A = 16.0;
  double n = 0.0;  // bulk exponent of Γ_n
  static WeightParams defaults(int L, int d);  // A = L^{d+2}
};

// The level n with L^n < s ≤ L^{n+1}; 0 for s ≤ 1.
int theta_level(std::uint64_t s, int L);
// Exact θ(s); throws on overflow of 64 bits.
std::uint64_t theta_exact(std::uint64_t s, int L, int d);
double theta(std::uint64_t s, const WeightParams& p);
// θ(s) ≤ s^{d+2} for 1 ≤ s ≤ s_max.
bool theta_bound_check(const WeightParams& p, std::uint64_t s_max);
// First s in [s_lo, s_hi] where θ(⌈s/L⌉)·2L^{d+1} ≠ θ(s), or 0 if none.
std::uint64_t theta_scaling_violation(int L, int d, std::uint64_t s_lo, std::uint64_t s_hi);

// inf over spanning trees on block centers of Π θ(|ℓ|), via a minimum
// spanning tree on the edge lengths (θ is nondecreasing).
double big_theta(const PavedSet& X, const WeightParams& p);

enum class GammaVariant { Plain, Bulk };
// A^{|X|} Θ(X), times e^{n|X|} for the bulk variant.
double gamma_weight(const PavedSet& X, const WeightParams& p, GammaVariant v = GammaVariant::Plain);

struct PolymerNormResult {
  double value = 0.0;
  std::map<Block, double> per_block;  // Σ_{X ∋ □} ‖E(X)‖ Γ(X) for every covered □
  bool translation_invariant = false;  // all torus blocks carry the same sum
};

// sup_□ Σ_{X ∋ □} ‖E(X)‖ Γ(X), given the norms ‖E(X)‖.
PolymerNormResult polymer_norm(const std::vector<std::pair<PavedSet, double>>& family,
                               const WeightParams& p, GammaVariant v = GammaVariant::Plain);
PolymerNormResult polymer_norm(const std::vector<std::pair<PavedSet, CElement>>& family,
                               const HNorm& w, double cell_volume, const WeightParams& p,
                               GammaVariant v = GammaVariant::Plain);

// {"d":2,"side":6,"polymers":[{"blocks":[[0,0],[0,1]],"norm":0.5},...]}
std::vector<std::pair<PavedSet, double>> load_polymer_family(const std::string& path);

}  // namespace gn

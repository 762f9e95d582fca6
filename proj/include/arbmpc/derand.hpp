#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "arbmpc/graph.hpp"
#include "arbmpc/util.hpp"

namespace arbmpc {

using SeedBits = std::vector<char>;  // bit 0 first

inline u64 seed_to_u64(const SeedBits& s) {
  require(s.size() <= 63, "seed too long for u64 view");
  u64 v = 0;
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i]) v |= u64(1) << i;
  return v;
}

inline SeedBits seed_from_u64(u64 v, int bits) {
  SeedBits s(bits, 0);
  for (int i = 0; i < bits; ++i) s[i] = (v >> i) & 1;
  return s;
}

// Pessimistic-estimator interface for the chunked method of conditional
// expectations. The conditional score must be the exact expectation of the
// full-seed score over a uniform completion of the prefix; search soundness
// rests on that exactness, which the tests verify by enumeration on small
// seed spaces.
class ConditionalEstimator {
 public:
  virtual ~ConditionalEstimator() = default;
  virtual int seed_bits() const = 0;
  virtual bool maximize() const = 0;
  virtual Dyadic target() const = 0;
  // Exact E[score | prefix] where prefix = bits [0, len).
  virtual Dyadic conditional(const SeedBits& prefix) const = 0;
  virtual Dyadic eval(const SeedBits& full_seed) const = 0;
};

// Estimator backed by a score function, with conditionals computed by full
// enumeration of the completions. Exact by construction; seed space must be
// small. Used by tests and by small brute-force stages.
class EnumEstimator : public ConditionalEstimator {
 public:
  EnumEstimator(int seed_bits, bool maximize, Dyadic target,
                std::function<Dyadic(u64)> score);
  int seed_bits() const override { return bits_; }
  bool maximize() const override { return maximize_; }
  Dyadic target() const override { return target_; }
  Dyadic conditional(const SeedBits& prefix) const override;
  Dyadic eval(const SeedBits& full_seed) const override;

 private:
  int bits_;
  bool maximize_;
  Dyadic target_;
  std::function<Dyadic(u64)> score_;
};

struct SearchResult {
  SeedBits seed;
  Dyadic score;
  Dyadic expectation;  // conditional at the empty prefix
};

// Fixes the seed chunk by chunk, never letting the exact conditional
// expectation degrade; the winning seed's score therefore dominates the
// empty-prefix expectation. Throws EstimatorError if the target is missed
// when enforce_target is set.
SearchResult condexp_search(const ConditionalEstimator& est, int chunk_bits,
                            bool enforce_target = true);

// Exhaustive argmax/argmin over all 2^seed_bits seeds, smallest seed wins
// ties. seed space capped by `budget` (count of seeds).
SearchResult brute_force_search(const ConditionalEstimator& est, u64 budget,
                                bool enforce_target = true);

// ---------------------------------------------------------------------------
// Linial-style color reduction.
// ---------------------------------------------------------------------------

struct Coloring {
  std::vector<int> color;
  int palette = 0;  // colors are in [0, palette)
};

bool coloring_proper(const Graph& g, const Coloring& col);

// One cover-free reduction step maps C colors to at most 4 * Delta^2 *
// ceil(log2 C)^2 via Reed-Solomon pairs (q, p(x)); iterated to a fixed point
// and clamped so the palette never grows. Input must be proper.
Coloring linial_coloring(const Graph& g, const Coloring& initial);

// Proper coloring of the t-th graph power, computed by linial_coloring on
// G^t seeded with compacted ids.
Coloring square_color(const Graph& g, int power);
Graph graph_power(const Graph& g, int power);

// Variant against an orientation with outdegree <= d: cover-freeness is
// required only against out-neighbors, giving O(d^2)-style palettes on
// forest-decomposed graphs.
Coloring arb_linial_coloring(const Graph& g,
                             const std::vector<std::vector<Vertex>>& out_neighbors,
                             const Coloring& initial);

Coloring identity_coloring(Vertex n);

}  // namespace arbmpc

#include "arbmpc/derand.hpp"

#include <algorithm>
#include <deque>

namespace arbmpc {

EnumEstimator::EnumEstimator(int seed_bits, bool maximize, Dyadic target,
                             std::function<Dyadic(u64)> score)
    : bits_(seed_bits), maximize_(maximize), target_(target), score_(std::move(score)) {
  require(seed_bits >= 0 && seed_bits <= 24, "EnumEstimator seed space too large");
}

Dyadic EnumEstimator::conditional(const SeedBits& prefix) const {
  int fixed = static_cast<int>(prefix.size());
  require(fixed <= bits_, "prefix longer than seed");
  u64 base = 0;
  for (int i = 0; i < fixed; ++i)
    if (prefix[i]) base |= u64(1) << i;
  int free = bits_ - fixed;
  Dyadic sum = 0;
  for (u64 c = 0; c < (u64(1) << free); ++c)
    sum += score_(base | (c << fixed));
  return Dyadic::ratio_pow2(1, free) * sum;
}

Dyadic EnumEstimator::eval(const SeedBits& full_seed) const {
  require(static_cast<int>(full_seed.size()) == bits_, "seed length mismatch");
  return score_(seed_to_u64(full_seed));
}

SearchResult condexp_search(const ConditionalEstimator& est, int chunk_bits,
                            bool enforce_target) {
  require(chunk_bits >= 1 && chunk_bits <= 24, "chunk size out of range");
  const bool maxing = est.maximize();
  SeedBits prefix;
  Dyadic running = est.conditional(prefix);
  Dyadic expectation = running;
  int total = est.seed_bits();
  while (static_cast<int>(prefix.size()) < total) {
    int take = std::min<int>(chunk_bits, total - static_cast<int>(prefix.size()));
    bool have_best = false;
    Dyadic best_score = 0;
    u64 best_val = 0;
    SeedBits candidate = prefix;
    candidate.resize(prefix.size() + take);
    for (u64 v = 0; v < (u64(1) << take); ++v) {
      for (int i = 0; i < take; ++i) candidate[prefix.size() + i] = (v >> i) & 1;
      Dyadic s = est.conditional(candidate);
      if (!have_best || (maxing ? s > best_score : s < best_score)) {
        have_best = true;
        best_score = s;
        best_val = v;
      }
    }
    // Averaging over chunk values preserves the conditional expectation, so
    // the best extension can never fall behind the running value.
    if (maxing ? best_score < running : best_score > running)
      throw EstimatorError("conditional expectation regressed: estimator is inexact");
    for (int i = 0; i < take; ++i) candidate[prefix.size() + i] = (best_val >> i) & 1;
    prefix = candidate;
    running = best_score;
  }
  Dyadic final_score = est.eval(prefix);
  require(final_score == running,
          "conditional at the full prefix disagrees with the evaluator");
  if (enforce_target &&
      (maxing ? final_score < est.target() : final_score > est.target())) {
    throw EstimatorError("selected seed misses the certified target: score " +
                         final_score.to_string() + " vs target " +
                         est.target().to_string());
  }
  return {prefix, final_score, expectation};
}

SearchResult brute_force_search(const ConditionalEstimator& est, u64 budget,
                                bool enforce_target) {
  int bits = est.seed_bits();
  require(bits <= 62, "seed space not enumerable");
  u64 count = u64(1) << bits;
  require(count <= budget, "seed space " + std::to_string(count) +
                               " exceeds enumeration budget " + std::to_string(budget));
  const bool maxing = est.maximize();
  bool have = false;
  Dyadic best_score = 0;
  u64 best_seed = 0;
  for (u64 s = 0; s < count; ++s) {
    Dyadic v = est.eval(seed_from_u64(s, bits));
    if (!have || (maxing ? v > best_score : v < best_score)) {
      have = true;
      best_score = v;
      best_seed = s;
    }
  }
  Dyadic expectation = est.conditional({});
  if (enforce_target &&
      (maxing ? best_score < est.target() : best_score > est.target())) {
    throw EstimatorError("no seed reaches the certified target: best " +
                         best_score.to_string() + " vs target " +
                         est.target().to_string());
  }
  return {seed_from_u64(best_seed, bits), best_score, expectation};
}

bool coloring_proper(const Graph& g, const Coloring& col) {
  if (static_cast<Vertex>(col.color.size()) != g.n()) return false;
  for (auto [u, v] : g.edges())
    if (col.color[u] == col.color[v]) return false;
  for (int c : col.color)
    if (c < 0 || c >= col.palette) return false;
  return true;
}

Coloring identity_coloring(Vertex n) {
  Coloring c;
  c.color.resize(n);
  for (Vertex v = 0; v < n; ++v) c.color[v] = v;
  c.palette = std::max<Vertex>(n, 1);
  return c;
}

namespace {

// One cover-free step. Each input color c is assigned the Reed-Solomon set
// {(x, p_c(x)) : x in F_q} for a degree-<t polynomial p_c over F_q, with
// q > t * Delta prime; distinct polynomials agree on < q / Delta points, so
// every vertex finds a pair outside its neighbors' sets. New color = that
// pair, palette q^2.
Coloring cover_free_step(const Graph& g,
                         const std::vector<std::vector<Vertex>>& constraint,
                         const Coloring& input, u64 degree_bound) {
  u64 C = static_cast<u64>(input.palette);
  if (C <= 1 || degree_bound == 0) return input;
  u64 t = 1;
  u64 q = next_prime_above(degree_bound * t);
  auto covers = [&](u64 qq, u64 tt) {
    // need qq^(tt+1) >= C without overflow
    i128 p = 1;
    for (u64 i = 0; i + 1 > 0 && i <= tt; ++i) {
      p *= qq;
      if (p >= static_cast<i128>(C)) return true;
    }
    return p >= static_cast<i128>(C);
  };
  while (!covers(q, t)) {
    ++t;
    q = next_prime_above(degree_bound * t);
  }
  if (q * q >= C) return input;  // no shrink; keep the input palette

  Coloring out;
  out.color.resize(g.n());
  out.palette = static_cast<int>(q * q);
  // coefficients of p_c = base-q digits of c
  auto poly_eval = [&](u64 c, u64 x) {
    u64 acc = 0;
    std::vector<u64> digits;
    u64 cc = c;
    for (u64 i = 0; i <= t; ++i) {
      digits.push_back(cc % q);
      cc /= q;
    }
    for (size_t i = digits.size(); i-- > 0;) acc = (acc * x + digits[i]) % q;
    return acc;
  };
  for (Vertex v = 0; v < g.n(); ++v) {
    u64 mine = static_cast<u64>(input.color[v]);
    bool placed = false;
    for (u64 x = 0; x < q && !placed; ++x) {
      u64 y = poly_eval(mine, x);
      bool covered = false;
      for (Vertex u : constraint[v]) {
        if (poly_eval(static_cast<u64>(input.color[u]), x) == y) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        out.color[v] = static_cast<int>(x * q + y);
        placed = true;
      }
    }
    require(placed, "cover-free step failed to place vertex " + std::to_string(v));
  }
  return out;
}

Coloring reduce_to_fixed_point(const Graph& g,
                               const std::vector<std::vector<Vertex>>& constraint,
                               Coloring current, u64 degree_bound) {
  for (;;) {
    Coloring next = cover_free_step(g, constraint, current, degree_bound);
    if (next.palette >= current.palette) return current;
    current = std::move(next);
  }
}

}  // namespace

Coloring linial_coloring(const Graph& g, const Coloring& initial) {
  require(coloring_proper(g, initial), "linial_coloring: input coloring improper");
  std::vector<std::vector<Vertex>> constraint(g.n());
  for (Vertex v = 0; v < g.n(); ++v) constraint[v] = g.neighbors(v);
  return reduce_to_fixed_point(g, constraint, initial, g.max_degree());
}

Graph graph_power(const Graph& g, int power) {
  require(power >= 1, "graph power must be >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < g.n(); ++v) {
    auto dist = bfs_distances(g, {v}, power);
    for (Vertex u = v + 1; u < g.n(); ++u)
      if (dist[u] >= 1) edges.emplace_back(v, u);
  }
  return Graph(g.n(), std::move(edges));
}

Coloring square_color(const Graph& g, int power) {
  Graph pw = power == 1 ? g : graph_power(g, power);
  Coloring ids = identity_coloring(g.n());
  return linial_coloring(pw, ids);
}

Coloring arb_linial_coloring(const Graph& g,
                             const std::vector<std::vector<Vertex>>& out_neighbors,
                             const Coloring& initial) {
  require(coloring_proper(g, initial), "arb_linial_coloring: input improper");
  u64 outdeg = 0;
  for (const auto& o : out_neighbors) outdeg = std::max<u64>(outdeg, o.size());
  return reduce_to_fixed_point(g, out_neighbors, initial, outdeg);
}

}  // namespace arbmpc

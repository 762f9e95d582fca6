#pragma once

#include <cstdint>

#include "arbmpc/util.hpp"

namespace arbmpc {

// All tunable constants of the pipeline in one place, echoed into every run
// record. The defaults are the documented values used by the test suite;
// every assertion in the library states which constant it depends on.
struct Config {
  // --- simulated cluster ---
  double alpha = 0.5;          // local memory S = ceil(n^alpha)
  bool strict_memory = false;  // strict: throw on budget violation; else record
  double global_factor = 8.0;  // global budget = factor * (n + m) (linear mode)
  double superlinear_eps = 0.25;  // superlinear budget = factor * (n^{1+eps} + m)
  bool superlinear = false;
  int round_cost_primitive = 1;  // rounds charged per Lemma-2.2 primitive
  int round_cost_ball = 1;       // rounds charged per ball doubling step

  // --- degree reduction (degred) ---
  // Shrink-exponent constants; assertions cite them by name.
  int c1 = 1;  // single-stage per-class shrink target: |V_i| / Delta_i^c1
  int c2 = 5;  // higher-class spill term: Delta_j^c2 * |V_j|
  int c3 = 1;  // multi-stage shrink target: |V_>=i| / Delta_i^(c3*k)
  int c4 = 1;  // per-iteration shrink of mpc_single_class_reduce
  int c5 = 16;  // termination threshold: max degree <= max(arb,2)^c5
  int stage_threshold = 1;   // minimum stage count before c3 decay is asserted
  int lemma39_cprime = 12;   // minimum exponentiation radius for local search
  int local_radius_per_stage = 12;  // ball radius consumed by one local stage
  bool enforce_lemma39_condition2 = false;  // asymptotic memory-fit check
  int preprocess_reps = 1;   // reps passed to the preprocessing sweep
  int main_loop_reps = 1;    // multi-multi invocations per exponentiation level
  int max_exponentiation = 12;  // radius cap 2^max in the degree-reduction loop
  u64 seed_enum_budget = u64(1) << 22;  // brute-force seed-space cap

  // --- mis/mm ---
  // delta is the degree exponent of Lemmas D.1/D.2 and drives every Appendix-D
  // constant (targets delta|E|/2000, delta^2|E|/800, ...).
  double sparsify_delta = 0.25;
  u64 luby_assert_min_edges = 64;  // waive step-progress targets below this
  int low_arb_threshold = 8;       // route to the low-arboricity solver below
  double low_arb_eps = 1.0;        // H-partition degree d = ceil(arb^{1+eps})
  double dispatch_delta = 0.75;    // "very high degree" cutoff Delta > n^delta
  int heavy_match_seed_bits = 20;  // brute-force budget for heavy-vertex seeds

  // --- coloring ---
  double partition_exponent = 0.6;  // bins l = ceil(arb^0.6), power-of-2 rounded
  int partition_k = 18;             // independence of the binning family
  int c6 = 16;                      // candidate bin-size cap = c6 * n_layer
  double layer_delta = 0.5;         // peel degree Delta' = ceil(arb^{1+delta'})
  u64 candidate_scan_cap = u64(1) << 12;  // seeds scanned per layer family
  int c0_palette_slack = 4;         // additive rounding slack in palette bound

  // --- misc ---
  int threads = 1;

  // Dyadic view of sparsify_delta; the Appendix-D estimator targets must be
  // exact, so delta is constrained to a dyadic value.
  Dyadic delta_dyadic() const {
    double d = sparsify_delta;
    int denom_bits = 0;
    while (d != static_cast<i64>(d) && denom_bits < 20) {
      d *= 2;
      ++denom_bits;
    }
    require(d == static_cast<i64>(d), "sparsify_delta must be dyadic");
    return Dyadic::ratio_pow2(static_cast<i64>(d), denom_bits);
  }

  u64 effective_arb(u64 arb) const { return arb < 2 ? 2 : arb; }

  // Degree threshold at which degree reduction declares itself done.
  u64 degred_target_degree(u64 arb) const {
    u64 lam = effective_arb(arb);
    u64 t = 1;
    for (int i = 0; i < c5; ++i) {
      if (t > (u64(1) << 48) / lam) return u64(1) << 48;
      t *= lam;
    }
    return t;
  }
};

}  // namespace arbmpc

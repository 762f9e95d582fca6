#pragma once

#include <optional>
#include <vector>

#include "arbmpc/config.hpp"
#include "arbmpc/degred.hpp"
#include "arbmpc/derand.hpp"
#include "arbmpc/graph.hpp"
#include "arbmpc/mpc.hpp"

namespace arbmpc {

// Contract-validated stand-in for the constant-round sparsification black
// box. E' keeps each vertex's ceil(n^delta) lowest-id incident edges (an
// edge survives if both endpoints keep it); for MIS, Q is the set of
// vertices with degree at most q_cap.
struct SparsifiedInstance {
  SolKind kind = SolKind::Matching;
  u64 cap = 0;    // per-vertex E' degree cap
  u64 q_cap = 0;  // MIS: Q membership degree cap
  std::vector<char> edge_in_eprime;  // per edge index of g
  std::vector<char> in_q;            // MIS only
  std::vector<char> in_b;
  std::vector<char> b_zero;  // B membership via the zero-degree clause
  u64 b_mass = 0;            // sum of g-degrees over B
};

SparsifiedInstance sparsify(const Graph& g, SolKind kind, const Config& cfg);

// Throws InvariantError naming the violated property; property 3 failures
// carry the achieved mass.
void validate_sparsified(const Graph& g, const SparsifiedInstance& inst,
                         const Config& cfg);

struct LubyStepResult {
  PartialSolution solution;
  Dyadic score = 0;        // P(h*), scaled by 2000 (MM) or 800 (MIS)
  Dyadic expectation = 0;  // exact E[P(h)] at the empty prefix, same scale
  Dyadic target = 0;       // delta*|E| (MM) or delta^2*|E| (MIS), same scale
  u64 progress_edges = 0;  // edges removed (MM) / edges covered (MIS)
  bool target_enforced = false;
};

// One derandomized sampling round per Appendix-D: pairwise z-values drive
// edge (MM) or vertex (MIS) sampling, a pessimistic estimator is maximized
// by exact chunked conditional expectations, and the induced partial
// solution is returned. Estimator scores are scaled by 2000 (MM) / 800
// (MIS) so targets stay dyadic.
LubyStepResult luby_step_mm(const SparsifiedInstance& inst, const Graph& g,
                            const Config& cfg);
LubyStepResult luby_step_mis(const SparsifiedInstance& inst, const Graph& g,
                             const Config& cfg);

struct LubyRunResult {
  PartialSolution solution;
  int iterations = 0;
  std::vector<LubyStepResult> steps;
};

// Repeats sparsify + step + removal until the matching is maximal / every
// vertex is decided.
LubyRunResult derand_luby(const Graph& g, SolKind kind, const Config& cfg);

// Heavy-vertex matching: lower-layer neighbors mark one upper edge through a
// k-wise family; blocks of exactly 2d^2 edges per heavy vertex must all be
// marked by the selected seed, which matches every heavy vertex.
struct HeavyMatchResult {
  PartialSolution solution;
  std::vector<Vertex> heavy;
  int k_used = 0;
  Dyadic expectation = 0;  // E[#marked blocks]
  u64 blocks = 0;
};

HeavyMatchResult heavy_vertex_match(const Graph& g, const HPartition& hp, u64 d,
                                    double delta, const Config& cfg);

struct LowArbResult {
  PartialSolution solution;
  u64 d = 0;
  int colors_used = 0;  // MIS path: size of the oriented Linial palette
};

// Low-arboricity finisher: H-partition of degree max(2*arb+1, arb^{1+eps}),
// forest decomposition, then color-class MIS or per-forest matching.
LowArbResult low_arb_solve(const Graph& g, u64 arb, SolKind kind,
                           const Config& cfg);

bool verify_mis(const Graph& g, const std::vector<Vertex>& is);
bool verify_mm(const Graph& g, const std::vector<Edge>& mm);

struct SolveMetrics {
  u64 rounds = 0;
  u64 peak_local = 0;
  u64 peak_global = 0;
  int luby_iterations = 0;
  int exponentiation_levels = 0;
  int degred_iterations = 0;
  u64 arb_estimate = 0;
  std::string path;  // dispatch description
  bool memory_violated = false;
};

struct SolveResult {
  PartialSolution solution;
  SolveMetrics metrics;
};

// Theorem-1.2/1.3 dispatch: optional very-high-degree layer phase, degree
// reduction, then the medium (Luby + exponentiation) or low-arboricity
// finisher. budget selection comes from cfg.superlinear.
SolveResult solve(MpcCluster& c, const Graph& g, SolKind kind);

}  // namespace arbmpc

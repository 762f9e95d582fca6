#pragma once

#include <map>
#include <optional>
#include <vector>

#include "arbmpc/config.hpp"
#include "arbmpc/derand.hpp"
#include "arbmpc/graph.hpp"
#include "arbmpc/kwise.hpp"
#include "arbmpc/mpc.hpp"

namespace arbmpc {

enum class SolKind { IS, Matching };

// Independent set or matching together with the vertices its removal takes
// out of the graph (members plus neighbors for IS, matched endpoints for MM).
struct PartialSolution {
  SolKind kind = SolKind::IS;
  std::vector<Vertex> is_members;
  std::vector<Edge> matching;
  std::vector<Vertex> removed;

  void append(const PartialSolution& other);
  bool empty() const { return is_members.empty() && matching.empty(); }
};

// Checks membership validity (independence / disjointness) in g and that
// `removed` is consistent with the kind. Maximality is checked elsewhere.
bool partial_solution_valid(const Graph& g, const PartialSolution& sol);

// Bipartitioned subgraph around one degree class: high vertices keep exactly
// beta^4 selected low neighbors (E1) and the low side keeps its induced
// edges (E2).
struct BetaHighGraph {
  u64 beta = 0;
  std::vector<Vertex> v_high;
  std::vector<std::vector<Vertex>> picked;  // picked[i] = T(v_high[i]), sorted
  std::vector<Vertex> v_low;                // union of picked, sorted
  std::vector<Edge> low_edges;              // E2: induced edges on v_low
  // Bookkeeping for the preparation lemma's measured properties.
  u64 class_size = 0;  // |V(G, Delta_i)|
  u64 bad_high = 0;    // |V(G, Delta_i) \ v_high|

  bool empty() const { return v_high.empty(); }
  void check_invariants() const;
};

// beta for class cap Delta_i: floor(Delta_i^{1/16}).
u64 beta_for_cap(u64 delta_i);
// Smallest class index whose cap reaches max(arb,2)^16.
int i_min_for_arb(u64 arb);

// Appendix-C preparation on one class: high set {deg > sqrt(Delta_i)},
// majority-low filter, trim to 2*beta^8 low edges, shell goodness, T(v)
// selection. All tie-breaks by ascending vertex id.
BetaHighGraph prepare_single(const Graph& g, u64 delta_i, u64 arb);

// Multi-class preparation: class-local graphs via the distance-4 maximum
// degree, then prepare_single per class. Guarantees pairwise distance >= 2
// between distinct per-class subgraphs.
std::map<int, BetaHighGraph> prepare_multi(const Graph& g, u64 arb,
                                           std::optional<int> i_min_override = std::nullopt);

// Output-bit widths of the shared pairwise family. The IS width uses
// max(beta,4) so the sampling probability stays at most 1/(4 beta^2).
int stage_out_bits(SolKind kind, u64 beta);

// One pairwise-independent stage on a beta-high graph under a proper
// conflict coloring. IS: a low vertex joins iff its hash value is zero and no
// low neighbor's is; MM: a low vertex proposes to the high neighbor indexed
// by its hash value (ascending-id numbering), each high vertex accepts its
// smallest proposer.
PartialSolution pairwise_stage(const Graph& g, const BetaHighGraph& h, SolKind kind,
                               const Coloring& conflict_colors,
                               const KWiseFamily& family, u64 seed);

// Conflict graph on v_low: cliques over each T(v) plus the induced low-low
// edges; exactly the pairs whose independence the stage analysis uses.
Graph conflict_graph(const BetaHighGraph& h, std::vector<Vertex>* low_ids);

// Number of high vertices of h whose coverage event fails under the seed
// (IS: no picked neighbor joined; MM: no proposal received).
u64 surviving_high(const BetaHighGraph& h, SolKind kind,
                   const Coloring& conflict_colors, const KWiseFamily& family,
                   u64 seed, const Graph& g);

struct StageResult {
  PartialSolution solution;
  u64 survivors = 0;
  Dyadic mean_survivors = 0;  // exact, full seed enumeration
  u64 seed = 0;
  int widenings = 0;  // target relaxations needed (each doubles the slack)
};

// Brute-force derandomization of pairwise_stage: picks the seed minimizing
// the survivor count; certifies survivors <= (5/beta)|V_high| style targets,
// doubling the slack (and recording it) when a tiny instance sits at the
// constant's edge.
StageResult derand_pairwise_stage(const Graph& g, const BetaHighGraph& h, SolKind kind,
                                  const Coloring& conflict_colors, const Config& cfg);

struct MultiStageReport {
  PartialSolution solution;
  std::map<int, u64> class_before;     // |V_i(G)|
  std::map<int, u64> survivors;        // per class, chosen seed
  std::map<int, Dyadic> class_target;  // certified bound per class
  int widenings = 0;
  u64 seed = 0;
};

// One shared seed drives every class's stage simultaneously (Lemma-3.5
// shape); the chosen seed certifies the per-class survivor targets built
// from c1/c2.
MultiStageReport multi_single_stage(const Graph& g, u64 arb, SolKind kind,
                                    const Coloring& dist4_colors, const Config& cfg);

struct MultiMultiReport {
  PartialSolution solution;
  std::vector<MultiStageReport> stages;
  std::map<int, u64> vge_before;  // |V_>=i| entering stage 1
  std::map<int, u64> vge_after;
};

// k sequential stages, fresh seed segment each, graph shrunk in between.
MultiMultiReport multi_multi_stage(const Graph& g, u64 arb, SolKind kind, int k,
                                   const Coloring& dist4_colors, const Config& cfg);

// --- MPC lifts ---

struct ReduceReport {
  PartialSolution solution;
  u64 class_before = 0;
  u64 class_after = 0;
  int widenings = 0;
};

// Lemma-3.7 shape: reps iterations of prepare / conflict coloring / seed
// search / removal for one class cap.
ReduceReport mpc_single_class_reduce(MpcCluster& c, Graph& g, u64 delta_i, u64 arb,
                                     SolKind kind, int reps);

// Lemma-3.8 preprocessing: single-class reduction from i_max down to i_min.
PartialSolution mpc_preprocess(MpcCluster& c, Graph& g, u64 arb, SolKind kind,
                               int reps,
                               std::map<int, std::pair<u64, u64>>* shrink = nullptr);

// Lemma-3.9 shape: simulate kappa = floor(k / local_radius_per_stage) stages
// per active vertex from its radius-k ball alone, under one shared seed
// sequence found globally; also returns the equivalent global replay for the
// equivalence oracle.
struct LocalSimReport {
  PartialSolution solution;
  int kappa = 0;
  std::vector<u64> stage_seeds;
  bool condition2_holds = false;  // the Lemma's numeric memory-fit condition
};

LocalSimReport mpc_multi_multi(MpcCluster& c, const BallStore& store, const Graph& g,
                               u64 arb, SolKind kind, const Coloring& dist4_colors,
                               const Config& cfg);

// Global replay of the same seed sequence, for the local==global oracle.
PartialSolution replay_multi_multi(const Graph& g, u64 arb, SolKind kind,
                                   const std::vector<u64>& stage_seeds,
                                   const Coloring& dist4_colors, const Config& cfg);

struct DegredReport {
  PartialSolution solution;
  u64 final_max_degree = 0;
  int main_loop_iterations = 0;
  int widenings = 0;
  u64 frozen = 0;
};

// Theorem-1.1 pipeline: preprocessing, then exponentiation rounds that
// interleave local multi-stage reductions with ball doubling and removal
// notification, freezing vertices whose 8-hop neighborhood is already low
// degree. Stops once the maximum degree is at most max(arb,2)^c5.
DegredReport degree_reduce(MpcCluster& c, const Graph& g, u64 arb, SolKind kind);

}  // namespace arbmpc

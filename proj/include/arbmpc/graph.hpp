#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arbmpc/util.hpp"

namespace arbmpc {

using Vertex = int;
using Edge = std::pair<Vertex, Vertex>;  // canonical: first < second

// Immutable undirected simple graph. Adjacency lists are sorted; the edge
// list is the canonical (u < v) enumeration in lexicographic order.
class Graph {
 public:
  Graph() = default;
  Graph(Vertex n, std::vector<Edge> edges);

  Vertex n() const { return n_; }
  u64 m() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adj_[v]; }
  u64 degree(Vertex v) const { return adj_[v].size(); }
  u64 max_degree() const;
  bool has_edge(Vertex u, Vertex v) const;

  // Subgraph induced by `keep` (ids preserved; dropped vertices isolated).
  Graph induced(const std::vector<char>& keep) const;
  // Subgraph on the kept vertices with ids compacted to 0..k-1.
  Graph induced_compact(const std::vector<Vertex>& verts,
                        std::vector<Vertex>* old_id = nullptr) const;
  Graph without_vertices(const std::vector<char>& removed) const;

 private:
  Vertex n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
};

Graph load_graph(const std::string& path);
Graph parse_edge_list(const std::string& text);
std::string format_edge_list(const Graph& g);
void save_graph(const Graph& g, const std::string& path);

// Union of `arb` uniformly random spanning trees on [n] (duplicates dropped),
// so the arboricity is at most `arb` by construction. Deterministic in seed.
Graph gen_bounded_arboricity(Vertex n, u64 arb, u64 seed);

// Smallest power of two lam such that peeling vertices of degree <= 2*lam
// exhausts the graph within ceil(log2 n) + 1 passes. Satisfies
// density/2 <= lam <= 4*density for the Nash-Williams density.
u64 estimate_arboricity(const Graph& g);

// H-partition: layer[v] in [1, L]; every layered v in layer i has at most d
// neighbors in layers >= i. Vertices left over from a capped run are reported
// in `unlayered` with layer[v] == 0.
struct HPartition {
  u64 d = 0;
  int L = 0;
  std::vector<int> layer;           // 0 = unlayered
  std::vector<Vertex> unlayered;    // empty iff complete
  bool complete() const { return unlayered.empty(); }
};

// Repeatedly peels vertices of residual degree <= d. Without a cap, a round
// that peels nothing raises NonProgressError; with a cap the residual is
// reported as unlayered.
HPartition h_partition(const Graph& g, u64 d,
                       std::optional<int> max_layers = std::nullopt);

// Acyclic orientation (toward the higher layer, ties toward the greater id)
// plus per-vertex forest labels 1..d on outgoing edges.
struct ForestDecomposition {
  // For edge index e (into g.edges()): true if oriented first->second.
  std::vector<char> toward_second;
  std::vector<int> label;  // 1..d
  u64 d = 0;
  Vertex oriented_head(const Graph& g, u64 e) const {
    return toward_second[e] ? g.edges()[e].second : g.edges()[e].first;
  }
  Vertex oriented_tail(const Graph& g, u64 e) const {
    return toward_second[e] ? g.edges()[e].first : g.edges()[e].second;
  }
};

ForestDecomposition forest_decomposition(const Graph& g, const HPartition& hp);

// Lemma-style arboricity sanity report for a claimed bound `arb`.
struct ArbReport {
  bool edge_count_ok = false;        // m < arb * n
  bool degree_tail_ok = false;       // #{deg >= t} < arb*n/(t-arb), t = 2^j > arb
  bool edge_tail_ok = false;         // both-endpoint version on edges
  bool subgraph_monotone_ok = false; // estimate on 20 random induced subgraphs
  bool all() const {
    return edge_count_ok && degree_tail_ok && edge_tail_ok && subgraph_monotone_ok;
  }
};

ArbReport check_arb_properties(const Graph& g, u64 arb, u64 probe_seed = 1);

// Quadratically spaced degree classes Delta_i = 2^(2^i).
u64 degree_class_cap(int i);             // Delta_i, saturating at 2^48
int degree_class(u64 deg, int i_min);    // smallest i >= i_min with deg <= Delta_i
int degree_class_max(u64 max_degree);    // i_max = ceil(log2 log2 Delta)

// BFS distances from a seed set, capped at `radius` (-1 beyond the cap).
std::vector<int> bfs_distances(const Graph& g, const std::vector<Vertex>& sources,
                               int radius);

}  // namespace arbmpc

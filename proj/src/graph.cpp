#include "arbmpc/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

namespace arbmpc {

Graph::Graph(Vertex n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  require(n_ >= 0, "vertex count must be nonnegative");
  for (auto& [u, v] : edges_) {
    if (u > v) std::swap(u, v);
    require(u != v, "self-loop");
    require(u >= 0 && v < n_, "edge endpoint out of range");
  }
  std::sort(edges_.begin(), edges_.end());
  for (size_t i = 1; i < edges_.size(); ++i)
    require(edges_[i] != edges_[i - 1], "duplicate edge");
  adj_.assign(n_, {});
  for (auto [u, v] : edges_) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& a : adj_) std::sort(a.begin(), a.end());
}

u64 Graph::max_degree() const {
  u64 d = 0;
  for (Vertex v = 0; v < n_; ++v) d = std::max<u64>(d, degree(v));
  return d;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  if (u == v || u < 0 || v >= n_ || v < 0 || u >= n_) return false;
  const auto& a = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
  Vertex w = adj_[u].size() <= adj_[v].size() ? v : u;
  return std::binary_search(a.begin(), a.end(), w);
}

Graph Graph::induced(const std::vector<char>& keep) const {
  std::vector<Edge> es;
  for (auto [u, v] : edges_)
    if (keep[u] && keep[v]) es.emplace_back(u, v);
  return Graph(n_, std::move(es));
}

Graph Graph::induced_compact(const std::vector<Vertex>& verts,
                             std::vector<Vertex>* old_id) const {
  std::vector<Vertex> sorted = verts;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Vertex> remap(n_, -1);
  for (size_t i = 0; i < sorted.size(); ++i) remap[sorted[i]] = static_cast<Vertex>(i);
  std::vector<Edge> es;
  for (auto [u, v] : edges_)
    if (remap[u] >= 0 && remap[v] >= 0) es.emplace_back(remap[u], remap[v]);
  if (old_id) *old_id = sorted;
  return Graph(static_cast<Vertex>(sorted.size()), std::move(es));
}

Graph Graph::without_vertices(const std::vector<char>& removed) const {
  std::vector<char> keep(n_, 1);
  for (Vertex v = 0; v < n_; ++v)
    if (removed[v]) keep[v] = 0;
  return induced(keep);
}

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("empty graph file");
  std::istringstream head(line);
  long long n = -1, m = -1;
  if (!(head >> n >> m) || n < 0 || m < 0)
    throw ParseError("line 1: expected header \"n m\"");
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(m));
  for (long long i = 0; i < m; ++i) {
    if (!next_line()) throw ParseError("unexpected end of file: expected " +
                                       std::to_string(m) + " edges");
    std::istringstream es(line);
    long long u = -1, v = -1;
    if (!(es >> u >> v))
      throw ParseError("line " + std::to_string(lineno) + ": expected \"u v\"");
    if (u == v)
      throw ParseError("line " + std::to_string(lineno) + ": self-loop");
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ParseError("line " + std::to_string(lineno) + ": endpoint out of range");
    edges.emplace_back(static_cast<Vertex>(std::min(u, v)),
                       static_cast<Vertex>(std::max(u, v)));
  }
  std::sort(edges.begin(), edges.end());
  for (size_t i = 1; i < edges.size(); ++i)
    if (edges[i] == edges[i - 1])
      throw ParseError("duplicate edge (" + std::to_string(edges[i].first) + ", " +
                       std::to_string(edges[i].second) + ")");
  return Graph(static_cast<Vertex>(n), std::move(edges));
}

Graph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_edge_list(buf.str());
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.m() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write " + path);
  f << format_edge_list(g);
}

Graph gen_bounded_arboricity(Vertex n, u64 arb, u64 seed) {
  require(n >= 1, "n must be positive");
  require(arb >= 1, "arboricity target must be positive");
  std::vector<Edge> edges;
  Rng rng(seed * 0x100000001b3ULL + 0xcbf29ce484222325ULL);
  for (u64 f = 0; f < arb && n >= 2; ++f) {
    // Uniform labeled tree via a random Pruefer sequence (min-heap decode).
    std::vector<Vertex> pruefer(n - 2);
    for (auto& x : pruefer) x = static_cast<Vertex>(rng.below(n));
    std::vector<int> deg(n, 1);
    for (Vertex x : pruefer) deg[x]++;
    std::vector<Vertex> leaves;
    for (Vertex v = 0; v < n; ++v)
      if (deg[v] == 1) leaves.push_back(v);
    std::make_heap(leaves.begin(), leaves.end(), std::greater<>());
    for (Vertex x : pruefer) {
      std::pop_heap(leaves.begin(), leaves.end(), std::greater<>());
      Vertex leaf = leaves.back();
      leaves.pop_back();
      edges.emplace_back(std::min(leaf, x), std::max(leaf, x));
      if (--deg[x] == 1) {
        leaves.push_back(x);
        std::push_heap(leaves.begin(), leaves.end(), std::greater<>());
      }
    }
    std::pop_heap(leaves.begin(), leaves.end(), std::greater<>());
    Vertex a = leaves.back();
    leaves.pop_back();
    Vertex b = leaves.front();
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph(n, std::move(edges));
}

namespace {

// One peeling experiment: does threshold-t peeling exhaust g in <= passes?
bool peels_out(const Graph& g, u64 threshold, int passes) {
  std::vector<i64> deg(g.n());
  std::vector<char> gone(g.n(), 0);
  i64 alive = g.n();
  for (Vertex v = 0; v < g.n(); ++v) deg[v] = static_cast<i64>(g.degree(v));
  for (int p = 0; p < passes && alive > 0; ++p) {
    std::vector<Vertex> peel;
    for (Vertex v = 0; v < g.n(); ++v)
      if (!gone[v] && deg[v] <= static_cast<i64>(threshold)) peel.push_back(v);
    if (peel.empty()) return false;
    for (Vertex v : peel) gone[v] = 1;
    for (Vertex v : peel)
      for (Vertex u : g.neighbors(v))
        if (!gone[u]) deg[u]--;
    alive -= static_cast<i64>(peel.size());
  }
  return alive == 0;
}

}  // namespace

u64 estimate_arboricity(const Graph& g) {
  if (g.m() == 0) return 1;
  int passes = ceil_log2(static_cast<u64>(std::max<Vertex>(g.n(), 2))) + 1;
  for (u64 lam = 1;; lam *= 2) {
    if (peels_out(g, 2 * lam, passes)) return lam;
    require(lam < (u64(1) << 40), "arboricity estimate diverged");
  }
}

HPartition h_partition(const Graph& g, u64 d, std::optional<int> max_layers) {
  require(d >= 1, "H-partition degree must be positive");
  HPartition hp;
  hp.d = d;
  hp.layer.assign(g.n(), 0);
  std::vector<i64> deg(g.n());
  for (Vertex v = 0; v < g.n(); ++v) deg[v] = static_cast<i64>(g.degree(v));
  i64 alive = g.n();
  int layer = 0;
  while (alive > 0) {
    if (max_layers && layer >= *max_layers) break;
    ++layer;
    std::vector<Vertex> peel;
    for (Vertex v = 0; v < g.n(); ++v)
      if (hp.layer[v] == 0 && deg[v] <= static_cast<i64>(d)) peel.push_back(v);
    if (peel.empty()) {
      if (max_layers) {
        --layer;
        break;
      }
      throw NonProgressError("H-partition: no vertex of degree <= " +
                             std::to_string(d) + " after layer " +
                             std::to_string(layer - 1));
    }
    for (Vertex v : peel) hp.layer[v] = layer;
    for (Vertex v : peel)
      for (Vertex u : g.neighbors(v))
        if (hp.layer[u] == 0) deg[u]--;
    alive -= static_cast<i64>(peel.size());
  }
  hp.L = layer;
  for (Vertex v = 0; v < g.n(); ++v)
    if (hp.layer[v] == 0) hp.unlayered.push_back(v);
  return hp;
}

ForestDecomposition forest_decomposition(const Graph& g, const HPartition& hp) {
  require(hp.complete(), "forest decomposition needs a complete H-partition");
  ForestDecomposition fd;
  fd.d = hp.d;
  fd.toward_second.assign(g.m(), 0);
  fd.label.assign(g.m(), 0);
  for (u64 e = 0; e < g.m(); ++e) {
    auto [u, v] = g.edges()[e];
    bool to_v = hp.layer[v] > hp.layer[u] ||
                (hp.layer[v] == hp.layer[u] && v > u);
    fd.toward_second[e] = to_v ? 1 : 0;
  }
  // Labels assigned per tail in ascending head id (edge list is sorted, but a
  // vertex's outgoing edges interleave as first and second endpoint).
  std::vector<std::vector<std::pair<Vertex, u64>>> outgoing(g.n());
  for (u64 e = 0; e < g.m(); ++e)
    outgoing[fd.oriented_tail(g, e)].emplace_back(fd.oriented_head(g, e), e);
  for (Vertex v = 0; v < g.n(); ++v) {
    std::sort(outgoing[v].begin(), outgoing[v].end());
    require(outgoing[v].size() <= hp.d,
            "outdegree exceeds d at vertex " + std::to_string(v));
    int lab = 1;
    for (auto [head, e] : outgoing[v]) fd.label[e] = lab++;
  }
  return fd;
}

ArbReport check_arb_properties(const Graph& g, u64 arb, u64 probe_seed) {
  ArbReport r;
  u64 n = static_cast<u64>(g.n());
  r.edge_count_ok = g.m() < arb * std::max<u64>(n, 1);

  r.degree_tail_ok = true;
  r.edge_tail_ok = true;
  for (u64 t = 1; t <= 2 * g.max_degree() + 2; t *= 2) {
    if (t <= arb) continue;
    u64 heavy = 0;
    for (Vertex v = 0; v < g.n(); ++v)
      if (g.degree(v) >= t) ++heavy;
    // strict bounds hold with < when the count is nonzero; the degenerate
    // all-zero case passes vacuously
    if (heavy * (t - arb) >= arb * n && heavy > 0) r.degree_tail_ok = false;
    u64 heavy_edges = 0;
    for (auto [u, v] : g.edges())
      if (g.degree(u) >= t && g.degree(v) >= t) ++heavy_edges;
    if (heavy_edges * (t - arb) >= arb * g.m() && heavy_edges > 0)
      r.edge_tail_ok = false;
  }

  r.subgraph_monotone_ok = true;
  Rng rng(probe_seed);
  u64 cap = pow2_ceil(4 * arb);
  for (int probe = 0; probe < 20; ++probe) {
    std::vector<char> keep(g.n(), 0);
    for (Vertex v = 0; v < g.n(); ++v) keep[v] = rng.below(2) ? 1 : 0;
    Graph sub = g.induced(keep);
    if (estimate_arboricity(sub) > cap) r.subgraph_monotone_ok = false;
  }
  return r;
}

u64 degree_class_cap(int i) {
  if (i < 0) return 1;
  if (i >= 6) return u64(1) << 48;  // saturate; degrees here are < 2^32
  return u64(1) << (u64(1) << i);
}

int degree_class(u64 deg, int i_min) {
  int i = i_min;
  while (deg > degree_class_cap(i)) ++i;
  return i;
}

int degree_class_max(u64 max_degree) {
  if (max_degree < 2) return 0;
  int i = 0;
  while (degree_class_cap(i) < max_degree) ++i;
  return i;
}

std::vector<int> bfs_distances(const Graph& g, const std::vector<Vertex>& sources,
                               int radius) {
  std::vector<int> dist(g.n(), -1);
  std::deque<Vertex> q;
  for (Vertex s : sources) {
    if (dist[s] == 0) continue;
    dist[s] = 0;
    q.push_back(s);
  }
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    if (dist[v] >= radius) continue;
    for (Vertex u : g.neighbors(v)) {
      if (dist[u] == -1) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
    }
  }
  return dist;
}

}  // namespace arbmpc

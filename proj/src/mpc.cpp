#include "arbmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace arbmpc {

MpcCluster::MpcCluster(u64 n, u64 m, const Config& cfg) : cfg_(cfg) {
  require(n >= 2, "cluster needs n >= 2");
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must lie in (0,1)");
  S_ = static_cast<u64>(std::ceil(std::pow(static_cast<double>(n), cfg.alpha)));
  double base = cfg.superlinear
                    ? std::pow(static_cast<double>(n), 1.0 + cfg.superlinear_eps) +
                          static_cast<double>(m)
                    : static_cast<double>(n + m);
  global_budget_ = static_cast<u64>(std::ceil(cfg.global_factor * base));
}

void MpcCluster::charge(u64 local_words, u64 global_words, const std::string& what) {
  peak_local_ = std::max(peak_local_, local_words);
  peak_global_ = std::max(peak_global_, global_words);
  if (local_words > S_) {
    std::string msg = what + ": local load " + std::to_string(local_words) +
                      " exceeds S=" + std::to_string(S_);
    violated_ = true;
    violations_.push_back(msg);
    if (cfg_.strict_memory) throw MemoryViolation(msg);
  }
  if (global_words > global_budget_) {
    std::string msg = what + ": global load " + std::to_string(global_words) +
                      " exceeds budget " + std::to_string(global_budget_);
    violated_ = true;
    violations_.push_back(msg);
    if (cfg_.strict_memory) throw MemoryViolation(msg);
  }
}

void MpcCluster::charge_items(u64 item_words, const std::string& what) {
  u64 machines = std::max<u64>(1, (item_words + S_ - 1) / S_);
  u64 per_machine = (item_words + machines - 1) / machines;
  charge(per_machine, item_words, what);
  rounds_ += cfg_.round_cost_primitive;
}

std::vector<u64> MpcCluster::prim_sort(std::vector<u64> items) {
  charge_items(items.size(), "sort");
  std::sort(items.begin(), items.end());
  return items;
}

std::vector<u64> MpcCluster::prim_filter(const std::vector<u64>& items,
                                         const std::function<bool(u64)>& pred) {
  charge_items(items.size(), "filter");
  std::vector<u64> out;
  for (u64 x : items)
    if (pred(x)) out.push_back(x);
  return out;
}

std::vector<u64> MpcCluster::prim_prefix_sum(const std::vector<u64>& items) {
  charge_items(items.size(), "prefix_sum");
  std::vector<u64> out(items.size());
  u64 acc = 0;
  for (size_t i = 0; i < items.size(); ++i) out[i] = (acc += items[i]);
  return out;
}

std::vector<i64> MpcCluster::prim_predecessor(const std::vector<u64>& sorted_base,
                                              const std::vector<u64>& queries) {
  charge_items(sorted_base.size() + queries.size(), "predecessor");
  std::vector<i64> out(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) {
    auto it = std::upper_bound(sorted_base.begin(), sorted_base.end(), queries[i]);
    out[i] = static_cast<i64>(it - sorted_base.begin()) - 1;
  }
  return out;
}

std::vector<u64> MpcCluster::prim_dedup(std::vector<u64> items) {
  charge_items(items.size(), "dedup");
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::map<u64, u64> MpcCluster::prim_colored_sum(
    const std::vector<std::pair<u64, u64>>& pairs) {
  charge_items(2 * pairs.size(), "colored_sum");
  std::map<u64, u64> out;
  for (auto [color, value] : pairs) out[color] += value;
  return out;
}

namespace {

Ball bfs_ball(const Graph& g, Vertex v, int radius) {
  Ball ball;
  std::vector<int> dist(g.n(), -1);
  std::deque<Vertex> q{v};
  dist[v] = 0;
  ball.verts.push_back(v);
  while (!q.empty()) {
    Vertex x = q.front();
    q.pop_front();
    if (dist[x] >= radius) continue;
    for (Vertex u : g.neighbors(x)) {
      if (dist[u] == -1) {
        dist[u] = dist[x] + 1;
        ball.verts.push_back(u);
        q.push_back(u);
      }
    }
  }
  std::sort(ball.verts.begin(), ball.verts.end());
  for (Vertex x : ball.verts)
    for (Vertex u : g.neighbors(x))
      if (x < u && dist[u] != -1) ball.edges.emplace_back(x, u);
  std::sort(ball.edges.begin(), ball.edges.end());
  return ball;
}

u64 doubling_steps(int radius) {
  if (radius <= 1) return 1;
  return static_cast<u64>(floor_log2(static_cast<u64>(radius))) + 1;
}

}  // namespace

BallStore collect_balls(MpcCluster& c, const Graph& g, int radius,
                        const std::vector<Vertex>& active) {
  require(radius >= 0, "radius must be nonnegative");
  BallStore store;
  store.radius = radius;
  u64 total = 0, biggest = 0;
  Vertex worst = -1;
  for (Vertex v : active) {
    Ball b = radius == 0 ? Ball{{v}, {}} : bfs_ball(g, v, radius);
    total += b.words();
    if (b.words() > biggest) {
      biggest = b.words();
      worst = v;
    }
    store.balls.emplace(v, std::move(b));
  }
  c.add_rounds(doubling_steps(radius) * c.config().round_cost_ball);
  std::string what = "collect_balls(r=" + std::to_string(radius) + ")";
  if (biggest > c.local_budget() && worst >= 0)
    what += " vertex " + std::to_string(worst);
  c.charge(biggest, total, what);
  return store;
}

BallStore double_balls(MpcCluster& c, const BallStore& store, const Graph& g) {
  BallStore out;
  out.radius = std::max(1, store.radius * 2);
  u64 total = 0, biggest = 0;
  Vertex worst = -1;
  std::map<Vertex, std::vector<Vertex>> fetched;  // balls of frozen members
  for (const auto& [v, ball] : store.balls) {
    // Vertex set doubles by unioning members' balls; edges among the union
    // are then filled from the distributed adjacency (one exchange). Members
    // outside the store (frozen vertices) hold no ball, so their static
    // neighborhood is pulled from the graph instead.
    std::vector<Vertex> verts;
    for (Vertex u : ball.verts) {
      auto it = store.balls.find(u);
      if (it != store.balls.end()) {
        verts.insert(verts.end(), it->second.verts.begin(), it->second.verts.end());
      } else {
        auto fit = fetched.find(u);
        if (fit == fetched.end())
          fit = fetched.emplace(u, bfs_ball(g, u, store.radius).verts).first;
        verts.insert(verts.end(), fit->second.begin(), fit->second.end());
      }
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    Ball nb;
    nb.verts = std::move(verts);
    std::vector<char> in_ball(g.n(), 0);
    for (Vertex u : nb.verts) in_ball[u] = 1;
    for (Vertex u : nb.verts)
      for (Vertex w : g.neighbors(u))
        if (u < w && in_ball[w]) nb.edges.emplace_back(u, w);
    std::sort(nb.edges.begin(), nb.edges.end());
    total += nb.words();
    if (nb.words() > biggest) {
      biggest = nb.words();
      worst = v;
    }
    out.balls.emplace(v, std::move(nb));
  }
  c.add_rounds(c.config().round_cost_ball);
  std::string what = "double_balls(r=" + std::to_string(out.radius) + ")";
  if (biggest > c.local_budget() && worst >= 0)
    what += " vertex " + std::to_string(worst);
  c.charge(biggest, total, what);
  return out;
}

BallStore remove_and_notify(MpcCluster& c, const BallStore& store,
                            const std::vector<Vertex>& removed) {
  std::vector<char> gone;
  Vertex maxv = 0;
  for (const auto& [v, ball] : store.balls)
    for (Vertex u : ball.verts) maxv = std::max(maxv, u);
  gone.assign(static_cast<size_t>(maxv) + 1, 0);
  for (Vertex v : removed) {
    require(v >= 0 && v <= maxv, "removed vertex outside the store");
    gone[v] = 1;
  }
  BallStore out;
  out.radius = store.radius;
  u64 total = 0, biggest = 0;
  for (const auto& [v, ball] : store.balls) {
    if (gone[v]) continue;
    Ball nb;
    for (Vertex u : ball.verts)
      if (!gone[u]) nb.verts.push_back(u);
    for (auto [a, b] : ball.edges)
      if (!gone[a] && !gone[b]) nb.edges.emplace_back(a, b);
    total += nb.words();
    biggest = std::max(biggest, nb.words());
    out.balls.emplace(v, std::move(nb));
  }
  c.add_rounds(1);
  c.charge(biggest, total, "remove_and_notify");
  return out;
}

Graph ball_graph(const Ball& ball, std::vector<Vertex>* old_id) {
  std::vector<Vertex> remap_src = ball.verts;  // already sorted unique
  std::vector<Edge> edges;
  edges.reserve(ball.edges.size());
  auto idx = [&](Vertex v) {
    return static_cast<Vertex>(std::lower_bound(remap_src.begin(), remap_src.end(), v) -
                               remap_src.begin());
  };
  for (auto [u, v] : ball.edges) edges.emplace_back(idx(u), idx(v));
  if (old_id) *old_id = remap_src;
  return Graph(static_cast<Vertex>(remap_src.size()), std::move(edges));
}

}  // namespace arbmpc

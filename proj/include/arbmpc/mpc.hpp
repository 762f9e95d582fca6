#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "arbmpc/config.hpp"
#include "arbmpc/graph.hpp"
#include "arbmpc/util.hpp"

namespace arbmpc {

// Simulated low-space machine ensemble. Fidelity is at the accounting level:
// machines are not materialized; sharding is arithmetic (ceil(load / S)).
// Every operation charges rounds plus per-machine and global word loads; in
// strict mode a budget overrun throws, in report mode it is recorded.
class MpcCluster {
 public:
  MpcCluster(u64 n, u64 m, const Config& cfg);

  u64 local_budget() const { return S_; }
  u64 global_budget() const { return global_budget_; }
  u64 rounds() const { return rounds_; }
  u64 peak_local() const { return peak_local_; }
  u64 peak_global() const { return peak_global_; }
  bool violated() const { return violated_; }
  const std::vector<std::string>& violations() const { return violations_; }
  const Config& config() const { return cfg_; }

  void add_rounds(u64 r) { rounds_ += r; }
  // Charge one round's memory shape: the largest single-machine load plus the
  // total words held across machines.
  void charge(u64 local_words, u64 global_words, const std::string& what);

  // Lemma-2.2 style primitives; each costs round_cost_primitive rounds and
  // charges the item load sharded across ceil(items / S) machines.
  std::vector<u64> prim_sort(std::vector<u64> items);
  std::vector<u64> prim_filter(const std::vector<u64>& items,
                               const std::function<bool(u64)>& pred);
  std::vector<u64> prim_prefix_sum(const std::vector<u64>& items);
  // For each query, index of the greatest base element <= q, or -1.
  std::vector<i64> prim_predecessor(const std::vector<u64>& sorted_base,
                                    const std::vector<u64>& queries);
  std::vector<u64> prim_dedup(std::vector<u64> items);
  std::map<u64, u64> prim_colored_sum(const std::vector<std::pair<u64, u64>>& pairs);

 private:
  Config cfg_;
  u64 S_;
  u64 global_budget_;
  u64 rounds_ = 0;
  u64 peak_local_ = 0;
  u64 peak_global_ = 0;
  bool violated_ = false;
  std::vector<std::string> violations_;

  void charge_items(u64 item_words, const std::string& what);
};

// Serialized radius-r balls for an active vertex set. ball(v) holds exactly
// the vertices within distance r of v and all edges among them, both sorted.
struct Ball {
  std::vector<Vertex> verts;
  std::vector<Edge> edges;
  u64 words() const { return verts.size() + 2 * edges.size(); }
  bool operator==(const Ball& o) const = default;
};

struct BallStore {
  int radius = 0;
  std::map<Vertex, Ball> balls;  // keyed by active vertex
  bool operator==(const BallStore& o) const = default;
};

BallStore collect_balls(MpcCluster& c, const Graph& g, int radius,
                        const std::vector<Vertex>& active);
BallStore double_balls(MpcCluster& c, const BallStore& store, const Graph& g);
BallStore remove_and_notify(MpcCluster& c, const BallStore& store,
                            const std::vector<Vertex>& removed);

// Materialize ball(v) as a compact graph; old_id maps new ids back.
Graph ball_graph(const Ball& ball, std::vector<Vertex>* old_id);

}  // namespace arbmpc

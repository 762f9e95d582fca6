#include "arbmpc/mismm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "arbmpc/kwise.hpp"

namespace arbmpc {

namespace {

// Exact fraction on 128-bit integers; only used for the relevant-set sums
// and sparsifier property checks, where denominators stay tiny.
struct Frac {
  i128 num = 0;
  i128 den = 1;
  static i128 gcd(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  void reduce() {
    i128 g = gcd(num, den);
    num /= g;
    den /= g;
  }
  Frac plus_inv(u64 d) const {  // this + 1/d
    Frac r{num * static_cast<i128>(d) + den, den * static_cast<i128>(d)};
    r.reduce();
    return r;
  }
  bool ge(i64 p, i64 q) const {  // >= p/q
    return num * q >= den * p;
  }
  bool le(i64 p, i64 q) const { return num * q <= den * p; }
};

// ---------------------------------------------------------------------------
// Pessimistic estimator over a bit-plane pairwise family. Terms are single
// events [z_i < T_i] and pair events [z_i < T_i][z_j < T_j] with integer
// weights; conditional expectations under any seed-bit prefix have closed
// dyadic form because unfixed planes contribute independent uniform bit
// pairs. Seed layout matches BitPlaneFamily: per plane, the field
// coefficient bits then the offset bit, MSB plane first.
// ---------------------------------------------------------------------------
class PlanePairEstimator final : public ConditionalEstimator {
 public:
  PlanePairEstimator(u64 domain, int ell, Dyadic target)
      : fam_(domain, ell), ell_(ell), target_(target) {}

  // key must be unique per hashed entity (edge id or vertex id).
  // threshold = |{z : sampled}|; 0 = never, 2^ell = always.
  int add_item(u64 key, u64 threshold) {
    items_.push_back({fam_.g_form(key), threshold});
    return static_cast<int>(items_.size()) - 1;
  }
  void add_const(i64 w) { const_base_ += Dyadic(w); }
  void add_single(int item, i64 w) { raw_terms_.push_back({item, -1, w}); }
  void add_pair(int a, int b, i64 w) {
    require(a != b, "pair term needs distinct items");
    require(items_[a].gx != items_[b].gx, "pair term needs distinct keys");
    raw_terms_.push_back({a, b, w});
  }
  void finalize() {
    reset();
    finalized_ = true;
  }

  u64 eval_z(const SeedBits& seed, u64 key) const { return fam_.eval_bits(seed, key); }

  int seed_bits() const override { return fam_.seed_bits(); }
  bool maximize() const override { return true; }
  Dyadic target() const override { return target_; }

  Dyadic conditional(const SeedBits& prefix) const override {
    require(finalized_, "estimator not finalized");
    auto* self = const_cast<PlanePairEstimator*>(this);
    return self->sync_and_score(prefix);
  }
  Dyadic eval(const SeedBits& full_seed) const override {
    require(static_cast<int>(full_seed.size()) == seed_bits(), "seed length");
    return conditional(full_seed);
  }

 private:
  struct Item {
    u64 gx;
    u64 threshold;
  };
  struct Term {
    int a;
    int b;  // -1 for singles
    i64 w;
  };
  enum class St : char { Tight, True, False };

  BitPlaneFamily fam_;
  int ell_;
  Dyadic target_;
  Dyadic const_base_ = 0;
  std::vector<Item> items_;
  std::vector<Term> raw_terms_;
  bool finalized_ = false;

  // engine state
  SeedBits committed_;
  int plane_ = 0;
  u64 a_val_ = 0;
  u64 a_free_ = 0;  // mask of unfixed coefficient bits in the current plane
  bool c_fixed_ = false;
  int c_val_ = 0;
  std::vector<char> af_;  // per item: parity of fixed coefficient part
  std::vector<St> state_;
  std::vector<Term> active_;
  Dyadic const_acc_ = 0;

  int bprime() const { return fam_.field_bits(); }
  int per_plane() const { return fam_.plane_seed_bits(); }

  void reset() {
    committed_.clear();
    plane_ = 0;
    a_val_ = 0;
    a_free_ = (u64(1) << bprime()) - 1;
    c_fixed_ = false;
    c_val_ = 0;
    af_.assign(items_.size(), 0);
    state_.assign(items_.size(), St::Tight);
    const_acc_ = const_base_;
    for (size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].threshold == 0) state_[i] = St::False;
      if (items_[i].threshold >= (u64(1) << ell_)) state_[i] = St::True;
    }
    active_.clear();
    for (const Term& t : raw_terms_) {
      Term cur = t;
      // shed decided factors
      if (cur.b >= 0 && state_[cur.b] == St::True) cur.b = -1;
      if (cur.b >= 0 && state_[cur.a] == St::True) {
        cur.a = cur.b;
        cur.b = -1;
      }
      if (state_[cur.a] == St::False || (cur.b >= 0 && state_[cur.b] == St::False))
        continue;
      if (state_[cur.a] == St::True && cur.b < 0) {
        const_acc_ += Dyadic(cur.w);
        continue;
      }
      active_.push_back(cur);
    }
  }

  // distribution of an item's current-plane bit: -1 = uniform, else the
  // determined value. hyp_pos/hyp_val describe one hypothetically fixed bit
  // of this plane's seed (-1 = none).
  int bit_of(int item, int hyp_pos, int hyp_val) const {
    bool cfix = c_fixed_ || hyp_pos == bprime();
    if (!cfix) return -1;
    int cv = (hyp_pos == bprime()) ? hyp_val : c_val_;
    u64 gx = items_[item].gx;
    u64 free_mask = a_free_;
    int af = af_[item];
    if (hyp_pos >= 0 && hyp_pos < bprime()) {
      free_mask &= ~(u64(1) << hyp_pos);
      af ^= hyp_val & static_cast<int>((gx >> hyp_pos) & 1);
    }
    if (gx & free_mask) return -1;
    return af ^ cv;
  }

  // xor of the two bits when it is determined, else -1; valid only while
  // c is unfixed or for the coefficient part in general (the offset cancels)
  int xor_of(int a, int b, int hyp_pos, int hyp_val) const {
    u64 d = items_[a].gx ^ items_[b].gx;
    u64 free_mask = a_free_;
    int fixed = af_[a] ^ af_[b];
    if (hyp_pos >= 0 && hyp_pos < bprime()) {
      free_mask &= ~(u64(1) << hyp_pos);
      fixed ^= hyp_val & static_cast<int>((d >> hyp_pos) & 1);
    }
    if (d & free_mask) return -1;
    return fixed;
  }

  // tight-item factor for plane bit b: probability that the item's sampling
  // event holds given its z-prefix matches the threshold prefix and this
  // plane's bit is b.
  Dyadic tight_factor(int item, int b) const {
    int shift = ell_ - 1 - plane_;
    int tb = static_cast<int>((items_[item].threshold >> shift) & 1);
    if (b < tb) return Dyadic(1);
    if (b > tb) return Dyadic(0);
    u64 rem = items_[item].threshold & ((u64(1) << shift) - 1);
    return Dyadic::ratio_pow2(static_cast<i128>(rem), shift);
  }

  Dyadic item_marginal(int item, int hyp_pos, int hyp_val) const {
    if (state_[item] == St::True) return Dyadic(1);
    if (state_[item] == St::False) return Dyadic(0);
    int b = bit_of(item, hyp_pos, hyp_val);
    if (b >= 0) return tight_factor(item, b);
    return Dyadic::ratio_pow2(1, 1) * (tight_factor(item, 0) + tight_factor(item, 1));
  }

  Dyadic pair_joint(int ia, int ib, int hyp_pos, int hyp_val) const {
    // both items tight
    int b1 = bit_of(ia, hyp_pos, hyp_val);
    int b2 = bit_of(ib, hyp_pos, hyp_val);
    auto f1 = [&](int b) { return tight_factor(ia, b); };
    auto f2 = [&](int b) { return tight_factor(ib, b); };
    if (b1 >= 0 && b2 >= 0) return f1(b1) * f2(b2);
    if (b1 >= 0) return f1(b1) * Dyadic::ratio_pow2(1, 1) * (f2(0) + f2(1));
    if (b2 >= 0) return f2(b2) * Dyadic::ratio_pow2(1, 1) * (f1(0) + f1(1));
    int w = xor_of(ia, ib, hyp_pos, hyp_val);
    bool cfix = c_fixed_ || hyp_pos == bprime();
    if (!cfix) {
      // offset bit free: first bit uniform; xor term fixed or uniform
      if (w < 0) {
        Dyadic quarter = Dyadic::ratio_pow2(1, 2);
        return quarter * (f1(0) + f1(1)) * (f2(0) + f2(1));
      }
      Dyadic half = Dyadic::ratio_pow2(1, 1);
      return half * (f1(0) * f2(w) + f1(1) * f2(1 ^ w));
    }
    // offset fixed, both bits undetermined: forms are distinct nonzero unless
    // their xor is pinned
    if (w < 0) {
      Dyadic quarter = Dyadic::ratio_pow2(1, 2);
      return quarter * (f1(0) + f1(1)) * (f2(0) + f2(1));
    }
    Dyadic half = Dyadic::ratio_pow2(1, 1);
    return half * (f1(0) * f2(w) + f1(1) * f2(1 ^ w));
  }

  Dyadic score_with(int hyp_pos, int hyp_val) const {
    Dyadic s = const_acc_;
    for (const Term& t : active_) {
      if (t.b < 0) {
        s += Dyadic(t.w) * item_marginal(t.a, hyp_pos, hyp_val);
      } else if (state_[t.a] != St::Tight) {
        s += Dyadic(t.w) * item_marginal(t.b, hyp_pos, hyp_val);
      } else if (state_[t.b] != St::Tight) {
        s += Dyadic(t.w) * item_marginal(t.a, hyp_pos, hyp_val);
      } else {
        s += Dyadic(t.w) * pair_joint(t.a, t.b, hyp_pos, hyp_val);
      }
    }
    return s;
  }

  void commit_bit(int v) {
    int pos = static_cast<int>(committed_.size()) % per_plane();
    committed_.push_back(static_cast<char>(v));
    if (pos < bprime()) {
      a_free_ &= ~(u64(1) << pos);
      if (v) {
        a_val_ |= u64(1) << pos;
        for (size_t i = 0; i < items_.size(); ++i)
          af_[i] ^= static_cast<char>((items_[i].gx >> pos) & 1);
      }
      return;
    }
    // offset bit completes the plane
    c_fixed_ = true;
    c_val_ = v;
    int shift = ell_ - 1 - plane_;
    for (size_t i = 0; i < items_.size(); ++i) {
      if (state_[i] != St::Tight) continue;
      int b = af_[i] ^ c_val_;
      int tb = static_cast<int>((items_[i].threshold >> shift) & 1);
      if (b < tb) state_[i] = St::True;
      if (b > tb) state_[i] = St::False;
    }
    ++plane_;
    if (plane_ == ell_)
      for (auto& st : state_)
        if (st == St::Tight) st = St::False;  // z equals the threshold
    // fold resolved terms
    std::vector<Term> next;
    for (Term t : active_) {
      if (t.b >= 0 && state_[t.b] == St::True) t.b = -1;
      if (t.b >= 0 && state_[t.a] == St::True) {
        t.a = t.b;
        t.b = -1;
      }
      if (state_[t.a] == St::False || (t.b >= 0 && state_[t.b] == St::False))
        continue;
      if (t.b < 0 && state_[t.a] == St::True) {
        const_acc_ += Dyadic(t.w);
        continue;
      }
      next.push_back(t);
    }
    active_ = std::move(next);
    a_val_ = 0;
    a_free_ = (u64(1) << bprime()) - 1;
    c_fixed_ = false;
    af_.assign(items_.size(), 0);
  }

  Dyadic sync_and_score(const SeedBits& prefix) {
    size_t shared = std::min(prefix.size(), committed_.size());
    bool ok = prefix.size() >= committed_.size();
    for (size_t i = 0; ok && i < shared; ++i)
      if (prefix[i] != committed_[i]) ok = false;
    if (!ok) reset();
    if (prefix.empty()) return score_with(-1, 0);
    while (committed_.size() + 1 < prefix.size())
      commit_bit(prefix[committed_.size()]);
    if (committed_.size() == prefix.size()) return score_with(-1, 0);
    int pos = static_cast<int>(committed_.size()) % per_plane();
    return score_with(pos, prefix.back());
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Sparsification substitute.
// ---------------------------------------------------------------------------

SparsifiedInstance sparsify(const Graph& g, SolKind kind, const Config& cfg) {
  SparsifiedInstance inst;
  inst.kind = kind;
  double nd = std::pow(static_cast<double>(std::max<Vertex>(g.n(), 2)),
                       cfg.sparsify_delta);
  inst.cap = static_cast<u64>(std::ceil(nd));
  inst.q_cap = std::max<u64>(inst.cap, 32);
  inst.edge_in_eprime.assign(g.m(), 0);

  // keep an edge iff both endpoints rank it within their first cap edges
  std::vector<u64> kept_count(g.n(), 0);
  std::vector<u64> keep_votes(g.m(), 0);
  std::vector<std::vector<u64>> incident(g.n());
  for (u64 e = 0; e < g.m(); ++e) {
    incident[g.edges()[e].first].push_back(e);
    incident[g.edges()[e].second].push_back(e);
  }
  for (Vertex v = 0; v < g.n(); ++v)
    for (u64 i = 0; i < incident[v].size() && i < inst.cap; ++i)
      keep_votes[incident[v][i]]++;
  for (u64 e = 0; e < g.m(); ++e)
    if (keep_votes[e] == 2) inst.edge_in_eprime[e] = 1;

  std::vector<u64> deg_eprime(g.n(), 0);
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e]) {
      deg_eprime[g.edges()[e].first]++;
      deg_eprime[g.edges()[e].second]++;
    }

  inst.in_b.assign(g.n(), 0);
  inst.b_zero.assign(g.n(), 0);
  if (kind == SolKind::Matching) {
    // edge degree within E'
    std::vector<u64> edeg(g.m(), 0);
    for (u64 e = 0; e < g.m(); ++e) {
      if (!inst.edge_in_eprime[e]) continue;
      auto [u, v] = g.edges()[e];
      edeg[e] = (deg_eprime[u] - 1) + (deg_eprime[v] - 1);
    }
    for (Vertex v = 0; v < g.n(); ++v) {
      Frac sum;
      bool zero_clause = false;
      for (u64 e : incident[v]) {
        if (!inst.edge_in_eprime[e]) continue;
        if (edeg[e] == 0)
          zero_clause = true;
        else
          sum = sum.plus_inv(edeg[e]);
      }
      if (zero_clause) {
        inst.in_b[v] = 1;
        inst.b_zero[v] = 1;
      } else if (sum.ge(1, 27)) {
        inst.in_b[v] = 1;
      }
    }
  } else {
    inst.in_q.assign(g.n(), 0);
    for (Vertex v = 0; v < g.n(); ++v)
      if (g.degree(v) <= inst.q_cap) inst.in_q[v] = 1;
    std::vector<u64> deg_q(g.n(), 0);
    for (auto [u, v] : g.edges()) {
      if (inst.in_q[v]) deg_q[u]++;
      if (inst.in_q[u]) deg_q[v]++;
    }
    Dyadic delta = cfg.delta_dyadic();
    for (Vertex v = 0; v < g.n(); ++v) {
      bool zero_clause = false;
      for (Vertex u : g.neighbors(v))
        if (inst.in_q[u] && deg_q[u] == 0) zero_clause = true;
      if (zero_clause) {
        inst.in_b[v] = 1;
        inst.b_zero[v] = 1;
        continue;
      }
      // sum over E'-neighbors in Q of 1/deg_Q, compared to delta/10 exactly
      Frac sum;
      for (u64 e : incident[v]) {
        if (!inst.edge_in_eprime[e]) continue;
        Vertex u = g.edges()[e].first == v ? g.edges()[e].second : g.edges()[e].first;
        if (inst.in_q[u] && deg_q[u] > 0) sum = sum.plus_inv(deg_q[u]);
      }
      // sum >= delta/10 with delta = p/2^k: num * 10 * 2^k >= p * den
      i128 lhs = sum.num * (i128(10) << delta.log2den());
      i128 rhs = delta.num() * sum.den;
      if (lhs >= rhs) inst.in_b[v] = 1;
    }
  }
  for (Vertex v = 0; v < g.n(); ++v)
    if (inst.in_b[v]) inst.b_mass += g.degree(v);
  return inst;
}

void validate_sparsified(const Graph& g, const SparsifiedInstance& inst,
                         const Config& cfg) {
  std::vector<u64> deg_eprime(g.n(), 0);
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e]) {
      deg_eprime[g.edges()[e].first]++;
      deg_eprime[g.edges()[e].second]++;
    }
  for (Vertex v = 0; v < g.n(); ++v)
    require(deg_eprime[v] <= inst.cap, "sparsifier property 1: E'-degree cap");
  if (inst.kind == SolKind::IS) {
    std::vector<u64> deg_q(g.n(), 0);
    for (auto [u, v] : g.edges()) {
      if (inst.in_q[v]) deg_q[u]++;
      if (inst.in_q[u]) deg_q[v]++;
    }
    for (Vertex v = 0; v < g.n(); ++v)
      if (inst.in_q[v] || inst.in_b[v])
        require(deg_q[v] <= std::max(inst.q_cap, inst.cap),
                "sparsifier property 1: Q-degree cap");
  }
  // property 2 is definitional for B (recomputing equals membership); check
  // the zero-clause consistency instead
  for (Vertex v = 0; v < g.n(); ++v)
    if (inst.b_zero[v]) require(inst.in_b[v], "zero-clause vertex outside B");
  // property 3
  Dyadic delta = cfg.delta_dyadic();
  Dyadic lhs = Dyadic(static_cast<i64>(inst.b_mass)) * Dyadic(8);
  Dyadic rhs = delta * Dyadic(static_cast<i64>(g.m()));
  if (lhs < rhs)
    throw InvariantError("sparsifier property 3: B mass " +
                         std::to_string(inst.b_mass) + " below delta|E|/8");
}

// ---------------------------------------------------------------------------
// Luby steps.
// ---------------------------------------------------------------------------

namespace {

int sampling_bits(Vertex n) {
  u64 nn = std::max<Vertex>(n, 2);
  require(nn <= (u64(1) << 20), "graph too large for the n^3 sampling range");
  return ceil_log2(nn * nn * nn);
}

u64 sample_threshold(u64 degree, int ell) {
  if (degree == 0) return u64(1) << ell;  // always sampled
  return (((u64(1) << ell) - 1) / (3 * degree)) + 1;
}

// relevant prefix: ascending ids, skipping entries that would push the mass
// past `hi`; falls back to a single heavy entry when the prefix stalls.
std::vector<u64> relevant_prefix(const std::vector<std::pair<u64, u64>>& entries,
                                 i64 lo_num, i64 lo_den) {
  Frac sum;
  std::vector<u64> out;
  for (auto [id, deg] : entries) {
    Frac next = sum.plus_inv(deg);
    if (!next.le(1, 1)) continue;
    sum = next;
    out.push_back(id);
    if (sum.ge(lo_num, lo_den)) return out;
  }
  for (auto [id, deg] : entries) {
    Frac single = Frac{}.plus_inv(deg);
    if (single.ge(lo_num, lo_den) && single.le(1, 1)) return {id};
  }
  return {};
}

}  // namespace

LubyStepResult luby_step_mm(const SparsifiedInstance& inst, const Graph& g,
                            const Config& cfg) {
  require(inst.kind == SolKind::Matching, "instance kind mismatch");
  LubyStepResult res;
  res.solution.kind = SolKind::Matching;
  const i64 scale = 2000;
  int ell = sampling_bits(g.n());
  Dyadic delta = cfg.delta_dyadic();
  res.target = delta * Dyadic(static_cast<i64>(g.m()));

  std::vector<std::vector<u64>> incident(g.n());
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e]) {
      incident[g.edges()[e].first].push_back(e);
      incident[g.edges()[e].second].push_back(e);
    }
  std::vector<u64> edeg(g.m(), 0);
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e]) {
      auto [u, v] = g.edges()[e];
      edeg[e] = (incident[u].size() - 1) + (incident[v].size() - 1);
    }

  PlanePairEstimator est(std::max<u64>(g.m(), 2), ell, res.target);
  std::vector<int> item_of(g.m(), -1);
  auto item = [&](u64 e) {
    if (item_of[e] < 0) item_of[e] = est.add_item(e, sample_threshold(edeg[e], ell));
    return item_of[e];
  };

  std::vector<std::vector<u64>> relevant(g.n());
  for (Vertex v = 0; v < g.n(); ++v) {
    if (!inst.in_b[v]) continue;
    if (inst.b_zero[v]) {
      est.add_const(scale * static_cast<i64>(g.degree(v)));
      continue;
    }
    std::vector<std::pair<u64, u64>> entries;
    for (u64 e : incident[v])
      if (edeg[e] > 0) entries.emplace_back(e, edeg[e]);
    relevant[v] = relevant_prefix(entries, 1, 27);
    i64 w = scale * static_cast<i64>(g.degree(v));
    const auto& S = relevant[v];
    for (u64 e : S) est.add_single(item(e), w);
    for (size_t i = 0; i < S.size(); ++i)
      for (size_t j = i + 1; j < S.size(); ++j)
        est.add_pair(item(S[i]), item(S[j]), -2 * w);
    for (u64 e : S) {
      auto [a, b] = g.edges()[e];
      Vertex u = (a == v) ? b : a;
      for (u64 ep : incident[u])
        if (ep != e) est.add_pair(item(e), item(ep), -w);
    }
  }
  est.finalize();

  bool enforce = g.m() >= cfg.luby_assert_min_edges;
  SearchResult sr = condexp_search(est, 1, enforce);
  res.score = sr.score;
  res.expectation = sr.expectation;
  res.target_enforced = enforce;

  // apply the winning seed
  std::vector<char> sampled(g.m(), 0);
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e])
      sampled[e] = static_cast<i128>(3) * edeg[e] * est.eval_z(sr.seed, e) <
                           (i128(1) << ell)
                       ? 1
                       : 0;
  std::vector<u64> sampled_at(g.n(), 0);
  for (u64 e = 0; e < g.m(); ++e)
    if (sampled[e]) {
      sampled_at[g.edges()[e].first]++;
      sampled_at[g.edges()[e].second]++;
    }
  std::set<u64> chosen;
  for (u64 e = 0; e < g.m(); ++e) {
    if (!sampled[e]) continue;
    auto [u, v] = g.edges()[e];
    if (sampled_at[u] == 1 && sampled_at[v] == 1) chosen.insert(e);  // classic
  }
  // claimed edges: exactly one sampled relevant edge whose far endpoint is
  // otherwise clean
  for (Vertex v = 0; v < g.n(); ++v) {
    if (relevant[v].empty()) continue;
    u64 hit = 0, last = 0;
    for (u64 e : relevant[v])
      if (sampled[e]) {
        ++hit;
        last = e;
      }
    if (hit != 1) continue;
    auto [a, b] = g.edges()[last];
    Vertex u = (a == v) ? b : a;
    if (sampled_at[u] == 1) chosen.insert(last);
  }
  std::vector<char> used(g.n(), 0);
  for (u64 e : chosen) {
    auto [u, v] = g.edges()[e];
    require(!used[u] && !used[v], "luby step produced overlapping edges");
    used[u] = used[v] = 1;
    res.solution.matching.emplace_back(u, v);
  }
  for (Vertex v = 0; v < g.n(); ++v)
    if (used[v]) res.solution.removed.push_back(v);
  for (auto [u, v] : g.edges())
    if (used[u] || used[v]) ++res.progress_edges;
  if (enforce) {
    Dyadic got = Dyadic(static_cast<i64>(res.progress_edges)) * Dyadic(4000);
    if (got < res.target)
      throw EstimatorError("luby MM step removed " +
                           std::to_string(res.progress_edges) +
                           " edges, below delta|E|/4000");
  }
  return res;
}

LubyStepResult luby_step_mis(const SparsifiedInstance& inst, const Graph& g,
                             const Config& cfg) {
  require(inst.kind == SolKind::IS, "instance kind mismatch");
  LubyStepResult res;
  res.solution.kind = SolKind::IS;
  const i64 scale = 800;
  int ell = sampling_bits(g.n());
  Dyadic delta = cfg.delta_dyadic();
  res.target = delta * delta * Dyadic(static_cast<i64>(g.m()));

  std::vector<u64> deg_q(g.n(), 0);
  for (auto [u, v] : g.edges()) {
    if (inst.in_q[v]) deg_q[u]++;
    if (inst.in_q[u]) deg_q[v]++;
  }

  PlanePairEstimator est(std::max<Vertex>(g.n(), 2), ell, res.target);
  std::vector<int> item_of(g.n(), -1);
  auto item = [&](Vertex u) {
    require(inst.in_q[u], "sampling a vertex outside Q");
    if (item_of[u] < 0)
      item_of[u] = est.add_item(static_cast<u64>(u),
                                sample_threshold(deg_q[u], ell));
    return item_of[u];
  };

  std::vector<std::vector<Vertex>> eprime_nbrs(g.n());
  for (u64 e = 0; e < g.m(); ++e)
    if (inst.edge_in_eprime[e]) {
      auto [u, v] = g.edges()[e];
      eprime_nbrs[u].push_back(v);
      eprime_nbrs[v].push_back(u);
    }

  // delta/10 as an exact fraction p / (10 * 2^k)
  i64 p_num = static_cast<i64>(delta.num());
  i64 p_den = i64(10) << delta.log2den();

  for (Vertex v = 0; v < g.n(); ++v) {
    if (!inst.in_b[v]) continue;
    if (inst.b_zero[v]) {
      est.add_const(scale * static_cast<i64>(g.degree(v)));
      continue;
    }
    std::vector<std::pair<u64, u64>> entries;
    for (Vertex u : eprime_nbrs[v])
      if (inst.in_q[u] && deg_q[u] > 0)
        entries.emplace_back(static_cast<u64>(u), deg_q[u]);
    std::sort(entries.begin(), entries.end());
    std::vector<u64> S = relevant_prefix(entries, p_num, p_den);
    i64 w = scale * static_cast<i64>(g.degree(v));
    for (u64 u : S) est.add_single(item(static_cast<Vertex>(u)), w);
    for (size_t i = 0; i < S.size(); ++i)
      for (size_t j = i + 1; j < S.size(); ++j)
        est.add_pair(item(static_cast<Vertex>(S[i])),
                     item(static_cast<Vertex>(S[j])), -2 * w);
    for (u64 su : S) {
      Vertex u = static_cast<Vertex>(su);
      for (Vertex x : g.neighbors(u))
        if (inst.in_q[x]) est.add_pair(item(u), item(x), -w);
    }
  }
  est.finalize();

  bool enforce = g.m() >= cfg.luby_assert_min_edges;
  SearchResult sr = condexp_search(est, 1, enforce);
  res.score = sr.score;
  res.expectation = sr.expectation;
  res.target_enforced = enforce;

  std::vector<char> sampled(g.n(), 0);
  for (Vertex u = 0; u < g.n(); ++u)
    if (inst.in_q[u])
      sampled[u] = static_cast<i128>(3) * deg_q[u] *
                           est.eval_z(sr.seed, static_cast<u64>(u)) <
                           (i128(1) << ell)
                       ? 1
                       : 0;
  for (Vertex u = 0; u < g.n(); ++u) {
    if (!sampled[u]) continue;
    bool blocked = false;
    for (Vertex x : g.neighbors(u))
      if (inst.in_q[x] && sampled[x]) {
        blocked = true;
        break;
      }
    if (!blocked) res.solution.is_members.push_back(u);
  }
  std::vector<char> removed(g.n(), 0);
  for (Vertex u : res.solution.is_members) {
    removed[u] = 1;
    for (Vertex x : g.neighbors(u)) removed[x] = 1;
  }
  for (Vertex v = 0; v < g.n(); ++v)
    if (removed[v]) res.solution.removed.push_back(v);
  for (auto [u, v] : g.edges())
    if (removed[u] || removed[v]) ++res.progress_edges;
  if (enforce) {
    Dyadic got = Dyadic(static_cast<i64>(res.progress_edges)) * Dyadic(1600);
    if (got < delta * Dyadic(static_cast<i64>(g.m())))
      throw EstimatorError("luby MIS step covered " +
                           std::to_string(res.progress_edges) +
                           " edges, below delta|E|/1600");
  }
  return res;
}

LubyRunResult derand_luby(const Graph& g, SolKind kind, const Config& cfg) {
  LubyRunResult run;
  run.solution.kind = kind;
  Graph cur = g;
  std::vector<char> alive(g.n(), 1);
  int guard = 4 * ceil_log2(std::max<u64>(g.m(), 2)) + 64;
  for (;;) {
    bool done = kind == SolKind::Matching
                    ? cur.m() == 0
                    : std::none_of(alive.begin(), alive.end(),
                                   [](char a) { return a == 1; });
    if (done) break;
    require(run.iterations < guard, "luby loop exceeded its iteration guard");
    ++run.iterations;
    SparsifiedInstance inst = sparsify(cur, kind, cfg);
    validate_sparsified(cur, inst, cfg);
    LubyStepResult step = kind == SolKind::Matching ? luby_step_mm(inst, cur, cfg)
                                                    : luby_step_mis(inst, cur, cfg);
    if (step.solution.empty()) {
      // zero-score seeds can stall tiny instances; take the least entity
      if (kind == SolKind::Matching) {
        auto [u, v] = cur.edges()[0];
        step.solution.matching = {{u, v}};
        step.solution.removed = {u, v};
      } else {
        Vertex v = 0;
        while (!alive[v]) ++v;
        step.solution.is_members = {v};
        step.solution.removed = {v};
        for (Vertex x : cur.neighbors(v)) step.solution.removed.push_back(x);
        std::sort(step.solution.removed.begin(), step.solution.removed.end());
      }
    }
    run.solution.append(step.solution);
    for (Vertex v : step.solution.removed) alive[v] = 0;
    cur = cur.without_vertices([&] {
      std::vector<char> rm(cur.n(), 0);
      for (Vertex v : step.solution.removed) rm[v] = 1;
      return rm;
    }());
    run.steps.push_back(std::move(step));
  }
  return run;
}

// ---------------------------------------------------------------------------
// Heavy-vertex matching.
// ---------------------------------------------------------------------------

HeavyMatchResult heavy_vertex_match(const Graph& g, const HPartition& hp, u64 d,
                                    double delta, const Config& cfg) {
  require(hp.complete(), "heavy matching needs a complete H-partition");
  require(d >= 2, "degree parameter too small");
  HeavyMatchResult out;
  out.solution.kind = SolKind::Matching;
  u64 d3 = d * d * d;
  u64 block = 2 * d * d;
  for (Vertex v = 0; v < g.n(); ++v)
    if (g.degree(v) >= d3) out.heavy.push_back(v);
  if (out.heavy.empty()) return out;

  // lower-layer neighbors and each one's index for its upper neighbors
  std::vector<std::vector<Vertex>> upper(g.n());
  for (Vertex u = 0; u < g.n(); ++u)
    for (Vertex w : g.neighbors(u))
      if (hp.layer[w] > hp.layer[u]) upper[u].push_back(w);

  struct BlockRef {
    Vertex heavy;
    std::vector<std::pair<Vertex, u64>> members;  // (marker u, index of heavy)
  };
  std::vector<BlockRef> blocks;
  for (Vertex v : out.heavy) {
    std::vector<Vertex> lower;
    for (Vertex u : g.neighbors(v))
      if (hp.layer[u] < hp.layer[v]) lower.push_back(u);
    u64 full = lower.size() / block;
    require(full >= 1, "heavy vertex " + std::to_string(v) +
                           " lacks a full block of lower neighbors");
    for (u64 b = 0; b < full; ++b) {
      BlockRef br;
      br.heavy = v;
      for (u64 i = 0; i < block; ++i) {
        Vertex u = lower[b * block + i];
        u64 idx = static_cast<u64>(
            std::lower_bound(upper[u].begin(), upper[u].end(), v) -
            upper[u].begin());
        br.members.emplace_back(u, idx);
      }
      blocks.push_back(std::move(br));
    }
  }
  out.blocks = blocks.size();

  // color the block-mate conflict graph so block members hash independently
  std::vector<std::vector<Vertex>> mates(g.n());
  for (const auto& br : blocks)
    for (size_t i = 0; i < br.members.size(); ++i)
      for (size_t j = i + 1; j < br.members.size(); ++j) {
        mates[br.members[i].first].push_back(br.members[j].first);
        mates[br.members[j].first].push_back(br.members[i].first);
      }
  std::vector<int> color(g.n(), -1);
  int palette = 1;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (mates[v].empty()) continue;
    std::set<int> usedc;
    for (Vertex u : mates[v])
      if (color[u] >= 0) usedc.insert(color[u]);
    int pick = 0;
    while (usedc.count(pick)) ++pick;
    color[v] = pick;
    palette = std::max(palette, pick + 1);
  }

  int lprime = std::max(1, ceil_log2(d));
  int k_spec = static_cast<int>(std::ceil(21.0 / delta));
  if (k_spec % 2) ++k_spec;
  k_spec = std::max(k_spec, 2);
  int b = std::max(ceil_log2(static_cast<u64>(std::max(palette, 2))), lprime);
  int k_used = std::min<int>(k_spec, std::max(2, cfg.heavy_match_seed_bits / b));
  if (k_used % 2) --k_used;
  k_used = std::max(k_used, 2);
  out.k_used = k_used;
  KWiseFamily fam(static_cast<u64>(std::max(palette, 2)), lprime, k_used);

  auto unmarked = [&](u64 seed) {
    i64 bad = 0;
    for (const auto& br : blocks) {
      bool marked = false;
      for (auto [u, idx] : br.members)
        if (fam.eval(seed, static_cast<u64>(color[u])) == idx) {
          marked = true;
          break;
        }
      if (!marked) ++bad;
    }
    return bad;
  };
  EnumEstimator est(fam.seed_bits(), false, Dyadic(0),
                    [&](u64 s) { return Dyadic(unmarked(s)); });
  SearchResult sr = brute_force_search(est, cfg.seed_enum_budget, false);
  out.expectation = Dyadic(static_cast<i64>(blocks.size())) - sr.expectation;
  if (sr.score != Dyadic(0))
    throw EstimatorError(
        "no seed marks every block (k=" + std::to_string(k_used) +
        "); the independence parameter is misconfigured for this instance");

  // every heavy vertex picks its least marked edge
  u64 seed = seed_to_u64(sr.seed);
  std::vector<char> used(g.n(), 0);
  for (Vertex v : out.heavy) {
    if (used[v]) continue;
    Vertex pick = -1;
    for (Vertex u : g.neighbors(v)) {
      if (hp.layer[u] >= hp.layer[v] || used[u] || mates[u].empty()) continue;
      u64 idx = static_cast<u64>(
          std::lower_bound(upper[u].begin(), upper[u].end(), v) - upper[u].begin());
      if (fam.eval(seed, static_cast<u64>(color[u])) == idx) {
        pick = u;
        break;
      }
    }
    if (pick >= 0) {
      used[v] = used[pick] = 1;
      out.solution.matching.emplace_back(std::min(v, pick), std::max(v, pick));
    }
  }
  std::set<Vertex> rem;
  for (auto [u, v] : out.solution.matching) {
    rem.insert(u);
    rem.insert(v);
  }
  out.solution.removed.assign(rem.begin(), rem.end());
  std::sort(out.solution.matching.begin(), out.solution.matching.end());
  return out;
}

// ---------------------------------------------------------------------------
// Low-arboricity finisher.
// ---------------------------------------------------------------------------

namespace {

// Cole-Vishkin style 3-coloring of a functional forest given by parent[].
std::vector<int> forest_3color(Vertex n, const std::vector<Vertex>& parent) {
  std::vector<i64> col(n);
  for (Vertex v = 0; v < n; ++v) col[v] = v;
  i64 maxc = std::max<Vertex>(n, 2);
  while (maxc > 6) {
    std::vector<i64> next(n);
    for (Vertex v = 0; v < n; ++v) {
      i64 pc = parent[v] >= 0 ? col[parent[v]] : (col[v] == 0 ? 1 : 0);
      int bit = 0;
      while (((col[v] >> bit) & 1) == ((pc >> bit) & 1)) ++bit;
      next[v] = 2 * bit + ((col[v] >> bit) & 1);
    }
    col = next;
    i64 nm = 0;
    for (Vertex v = 0; v < n; ++v) nm = std::max(nm, col[v] + 1);
    if (nm >= maxc) break;
    maxc = nm;
  }
  // shift colors 3..5 down one class at a time
  for (int c = 5; c >= 3; --c) {
    for (Vertex v = 0; v < n; ++v) {
      if (col[v] != c) continue;
      std::set<i64> banned;
      if (parent[v] >= 0) banned.insert(col[parent[v]]);
      for (Vertex u = 0; u < n; ++u)
        if (parent[u] == v) banned.insert(col[u]);
      int pick = 0;
      while (banned.count(pick)) ++pick;
      col[v] = pick;
    }
  }
  std::vector<int> out(n);
  for (Vertex v = 0; v < n; ++v) {
    require(col[v] >= 0 && col[v] <= 2, "forest 3-coloring failed");
    out[v] = static_cast<int>(col[v]);
  }
  return out;
}

}  // namespace

LowArbResult low_arb_solve(const Graph& g, u64 arb, SolKind kind,
                           const Config& cfg) {
  LowArbResult out;
  out.solution.kind = kind;
  u64 d = std::max<u64>(
      2 * arb + 1,
      static_cast<u64>(std::ceil(std::pow(static_cast<double>(std::max<u64>(arb, 1)),
                                          1.0 + cfg.low_arb_eps))));
  d = std::max<u64>(d, 3);
  out.d = d;
  if (g.n() == 0) return out;
  HPartition hp = h_partition(g, d);
  ForestDecomposition fd = forest_decomposition(g, hp);

  if (kind == SolKind::IS) {
    std::vector<std::vector<Vertex>> outn(g.n());
    for (u64 e = 0; e < g.m(); ++e)
      outn[fd.oriented_tail(g, e)].push_back(fd.oriented_head(g, e));
    Coloring col = arb_linial_coloring(g, outn, identity_coloring(g.n()));
    out.colors_used = col.palette;
    // color classes joined in ascending order
    std::vector<char> in_is(g.n(), 0), blocked(g.n(), 0);
    std::vector<std::vector<Vertex>> by_color(col.palette);
    for (Vertex v = 0; v < g.n(); ++v) by_color[col.color[v]].push_back(v);
    for (const auto& cls : by_color)
      for (Vertex v : cls) {
        if (blocked[v]) continue;
        in_is[v] = 1;
        for (Vertex u : g.neighbors(v)) blocked[u] = 1;
      }
    for (Vertex v = 0; v < g.n(); ++v)
      if (in_is[v]) out.solution.is_members.push_back(v);
    std::set<Vertex> rem(out.solution.is_members.begin(),
                         out.solution.is_members.end());
    for (Vertex v : out.solution.is_members)
      for (Vertex u : g.neighbors(v)) rem.insert(u);
    out.solution.removed.assign(rem.begin(), rem.end());
    return out;
  }

  // matching: per forest label, 3-color the functional forest then match
  // color classes toward parents
  std::vector<char> matched(g.n(), 0);
  for (u64 label = 1; label <= d; ++label) {
    std::vector<Vertex> parent(g.n(), -1);
    for (u64 e = 0; e < g.m(); ++e)
      if (static_cast<u64>(fd.label[e]) == label)
        parent[fd.oriented_tail(g, e)] = fd.oriented_head(g, e);
    bool any = std::any_of(parent.begin(), parent.end(),
                           [](Vertex p) { return p >= 0; });
    if (!any) continue;
    std::vector<int> col = forest_3color(g.n(), parent);
    for (int c = 0; c < 3; ++c)
      for (Vertex v = 0; v < g.n(); ++v) {
        if (col[v] != c || parent[v] < 0) continue;
        if (matched[v] || matched[parent[v]]) continue;
        matched[v] = matched[parent[v]] = 1;
        out.solution.matching.emplace_back(std::min(v, parent[v]),
                                           std::max(v, parent[v]));
      }
  }
  std::sort(out.solution.matching.begin(), out.solution.matching.end());
  for (Vertex v = 0; v < g.n(); ++v)
    if (matched[v]) out.solution.removed.push_back(v);
  return out;
}

bool verify_mis(const Graph& g, const std::vector<Vertex>& is) {
  std::vector<char> in(g.n(), 0);
  for (Vertex v : is) {
    if (v < 0 || v >= g.n() || in[v]) return false;
    in[v] = 1;
  }
  for (auto [u, v] : g.edges())
    if (in[u] && in[v]) return false;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (in[v]) continue;
    bool dominated = false;
    for (Vertex u : g.neighbors(v))
      if (in[u]) dominated = true;
    if (!dominated) return false;
  }
  return true;
}

bool verify_mm(const Graph& g, const std::vector<Edge>& mm) {
  std::vector<char> matched(g.n(), 0);
  for (auto [u, v] : mm) {
    if (!g.has_edge(u, v)) return false;
    if (matched[u] || matched[v]) return false;
    matched[u] = matched[v] = 1;
  }
  for (auto [u, v] : g.edges())
    if (!matched[u] && !matched[v]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

SolveResult solve(MpcCluster& c, const Graph& g, SolKind kind) {
  const Config& cfg = c.config();
  SolveResult out;
  out.solution.kind = kind;
  out.metrics.arb_estimate = g.m() ? estimate_arboricity(g) : 1;
  u64 arb = out.metrics.arb_estimate;
  Graph cur = g;

  auto strip = [&](const PartialSolution& sol) {
    cur = cur.without_vertices([&] {
      std::vector<char> rm(cur.n(), 0);
      for (Vertex v : sol.removed) rm[v] = 1;
      return rm;
    }());
  };

  // degenerate: everything fits on one machine
  if (static_cast<u64>(g.n()) + 2 * g.m() <= c.local_budget()) {
    out.metrics.path = "gathered";
    c.charge(g.n() + 2 * g.m(), g.n() + 2 * g.m(), "gather");
    c.add_rounds(1);
    if (kind == SolKind::IS) {
      std::vector<char> blocked(g.n(), 0);
      for (Vertex v = 0; v < g.n(); ++v) {
        if (blocked[v]) continue;
        out.solution.is_members.push_back(v);
        for (Vertex u : g.neighbors(v)) blocked[u] = 1;
      }
      std::set<Vertex> rem(out.solution.is_members.begin(),
                           out.solution.is_members.end());
      for (Vertex v : out.solution.is_members)
        for (Vertex u : g.neighbors(v)) rem.insert(u);
      out.solution.removed.assign(rem.begin(), rem.end());
    } else {
      std::vector<char> used(g.n(), 0);
      for (auto [u, v] : g.edges()) {
        if (used[u] || used[v]) continue;
        used[u] = used[v] = 1;
        out.solution.matching.emplace_back(u, v);
      }
      for (Vertex v = 0; v < g.n(); ++v)
        if (used[v]) out.solution.removed.push_back(v);
    }
    out.metrics.rounds = c.rounds();
    out.metrics.peak_local = c.peak_local();
    out.metrics.peak_global = c.peak_global();
    out.metrics.memory_violated = c.violated();
    return out;
  }

  double n_d = static_cast<double>(std::max<Vertex>(g.n(), 2));
  bool high_arb = static_cast<double>(arb) >
                  std::pow(n_d, cfg.dispatch_delta / 4.0);
  bool very_high_degree =
      static_cast<double>(cur.max_degree()) > std::pow(n_d, cfg.dispatch_delta);
  std::string path;

  std::vector<char> decided(g.n(), 0);
  auto note_decided = [&](const PartialSolution& sol) {
    for (Vertex v : sol.removed) decided[v] = 1;
  };

  if (very_high_degree && !high_arb) {
    path += "layered+";
    u64 d = static_cast<u64>(std::ceil(std::pow(n_d, cfg.dispatch_delta / 3.0)));
    d = std::max(d, 2 * arb + 1);
    HPartition hp = h_partition(cur, d);
    c.add_rounds(hp.L);
    if (kind == SolKind::Matching) {
      HeavyMatchResult hm = heavy_vertex_match(cur, hp, d, cfg.dispatch_delta, cfg);
      out.solution.append(hm.solution);
      note_decided(hm.solution);
      strip(hm.solution);
      c.add_rounds(2);
    }
    for (int layer = 1; layer <= hp.L; ++layer) {
      std::vector<Vertex> members;
      for (Vertex v = 0; v < cur.n(); ++v)
        if (hp.layer[v] == layer && !decided[v]) members.push_back(v);
      if (members.empty()) continue;
      std::vector<Vertex> old_id;
      Graph sub = cur.induced_compact(members, &old_id);
      LubyRunResult lr = derand_luby(sub, kind, cfg);
      PartialSolution part;
      part.kind = kind;
      if (kind == SolKind::IS) {
        std::set<Vertex> rem;
        for (Vertex v : lr.solution.is_members) {
          part.is_members.push_back(old_id[v]);
          rem.insert(old_id[v]);
          for (Vertex u : cur.neighbors(old_id[v])) rem.insert(u);
        }
        part.removed.assign(rem.begin(), rem.end());
      } else {
        std::set<Vertex> rem;
        for (auto [a, b] : lr.solution.matching) {
          Vertex u = old_id[a], v = old_id[b];
          part.matching.emplace_back(std::min(u, v), std::max(u, v));
          rem.insert(u);
          rem.insert(v);
        }
        part.removed.assign(rem.begin(), rem.end());
      }
      out.solution.append(part);
      note_decided(part);
      strip(part);
      out.metrics.luby_iterations += lr.iterations;
      c.add_rounds(1);
    }
  }

  if (!high_arb && cur.max_degree() > cfg.degred_target_degree(arb)) {
    path += "degred+";
    DegredReport dr = degree_reduce(c, cur, arb, kind);
    out.solution.append(dr.solution);
    strip(dr.solution);
    out.metrics.degred_iterations = dr.main_loop_iterations;
  }

  auto undecided_sub = [&](std::vector<Vertex>* old_id) {
    std::vector<Vertex> undecided;
    for (Vertex v = 0; v < g.n(); ++v)
      if (!decided[v]) undecided.push_back(v);
    return cur.induced_compact(undecided, old_id);
  };
  auto remap = [&](const PartialSolution& sol, const std::vector<Vertex>& old_id) {
    PartialSolution part;
    part.kind = sol.kind;
    for (Vertex v : sol.is_members) part.is_members.push_back(old_id[v]);
    for (auto [a, b] : sol.matching)
      part.matching.emplace_back(std::min(old_id[a], old_id[b]),
                                 std::max(old_id[a], old_id[b]));
    for (Vertex v : sol.removed) part.removed.push_back(old_id[v]);
    std::sort(part.removed.begin(), part.removed.end());
    std::sort(part.is_members.begin(), part.is_members.end());
    std::sort(part.matching.begin(), part.matching.end());
    return part;
  };

  if (arb <= static_cast<u64>(cfg.low_arb_threshold)) {
    path += "low-arb";
    std::vector<Vertex> old_id;
    Graph sub = undecided_sub(&old_id);
    LowArbResult la = low_arb_solve(sub, arb, kind, cfg);
    PartialSolution part = remap(la.solution, old_id);
    c.add_rounds(static_cast<u64>(la.d) + 2);
    c.charge(sub.n() + 2 * sub.m(), sub.n() + 2 * sub.m(), "low-arb stage");
    out.solution.append(part);
    note_decided(part);
    strip(part);
  } else {
    path += "medium";
    // derandomized Luby, reps steps per exponentiation level
    int reps = std::max(1, ceil_log2(std::max<u64>(cur.max_degree(), 2)));
    int level = 0;
    while (cur.m() > 0) {
      int did = 0;
      for (int r = 0; r < reps && cur.m() > 0; ++r) {
        std::vector<Vertex> old_id;
        Graph sub = undecided_sub(&old_id);
        SparsifiedInstance inst = sparsify(sub, kind, cfg);
        validate_sparsified(sub, inst, cfg);
        LubyStepResult st = kind == SolKind::Matching
                                ? luby_step_mm(inst, sub, cfg)
                                : luby_step_mis(inst, sub, cfg);
        if (st.solution.empty()) break;
        PartialSolution part = remap(st.solution, old_id);
        out.solution.append(part);
        note_decided(part);
        strip(part);
        ++out.metrics.luby_iterations;
        ++did;
        c.add_rounds(3);
        u64 words = static_cast<u64>(sub.n()) + 2 * sub.m();
        u64 machines =
            std::max<u64>(1, (words + c.local_budget() - 1) / c.local_budget());
        c.charge((words + machines - 1) / machines, words, "luby step");
      }
      if (cur.m() == 0) break;
      if (did == 0) {
        // no sampled progress at this level: finish with the generic loop
        std::vector<Vertex> old_id;
        Graph sub = undecided_sub(&old_id);
        LubyRunResult lr = derand_luby(sub, kind, cfg);
        PartialSolution part = remap(lr.solution, old_id);
        out.solution.append(part);
        note_decided(part);
        strip(part);
        out.metrics.luby_iterations += lr.iterations;
        break;
      }
      c.add_rounds(1);  // exponentiation step
      ++level;
      ++out.metrics.exponentiation_levels;
      require(level < 64, "medium path failed to converge");
    }
  }

  // IS: any still-undecided isolated vertices join outright
  if (kind == SolKind::IS) {
    PartialSolution tail;
    tail.kind = kind;
    for (Vertex v = 0; v < g.n(); ++v)
      if (!decided[v]) tail.is_members.push_back(v);
    for (Vertex v : tail.is_members) tail.removed.push_back(v);
    if (!tail.is_members.empty()) {
      require(cur.m() == 0, "finisher left adjacent undecided vertices");
      out.solution.append(tail);
    }
  }

  out.metrics.path = path.empty() ? "finisher" : path;
  out.metrics.rounds = c.rounds();
  out.metrics.peak_local = c.peak_local();
  out.metrics.peak_global = c.peak_global();
  out.metrics.memory_violated = c.violated();
  return out;
}

}  // namespace arbmpc

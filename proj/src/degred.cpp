#include "arbmpc/degred.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace arbmpc {

void PartialSolution::append(const PartialSolution& other) {
  require(kind == other.kind, "cannot merge solutions of different kinds");
  is_members.insert(is_members.end(), other.is_members.begin(),
                    other.is_members.end());
  matching.insert(matching.end(), other.matching.begin(), other.matching.end());
  removed.insert(removed.end(), other.removed.begin(), other.removed.end());
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  std::sort(is_members.begin(), is_members.end());
  std::sort(matching.begin(), matching.end());
}

bool partial_solution_valid(const Graph& g, const PartialSolution& sol) {
  std::vector<char> removed(g.n(), 0);
  for (Vertex v : sol.removed) {
    if (v < 0 || v >= g.n()) return false;
    removed[v] = 1;
  }
  if (sol.kind == SolKind::IS) {
    if (!sol.matching.empty()) return false;
    std::vector<char> member(g.n(), 0);
    for (Vertex v : sol.is_members) {
      if (v < 0 || v >= g.n() || member[v]) return false;
      member[v] = 1;
    }
    for (Vertex v : sol.is_members)
      for (Vertex u : g.neighbors(v))
        if (member[u]) return false;
    // removed must cover members and their neighborhoods
    std::vector<char> expect(g.n(), 0);
    for (Vertex v : sol.is_members) {
      expect[v] = 1;
      for (Vertex u : g.neighbors(v)) expect[u] = 1;
    }
    return std::equal(expect.begin(), expect.end(), removed.begin());
  }
  if (!sol.is_members.empty()) return false;
  std::vector<char> matched(g.n(), 0);
  std::vector<char> expect(g.n(), 0);
  for (auto [u, v] : sol.matching) {
    if (!g.has_edge(u, v)) return false;
    if (matched[u] || matched[v]) return false;
    matched[u] = matched[v] = 1;
    expect[u] = expect[v] = 1;
  }
  return std::equal(expect.begin(), expect.end(), removed.begin());
}

u64 beta_for_cap(u64 delta_i) {
  u64 b = 1;
  while (true) {
    u64 next = b + 1;
    i128 p = 1;
    bool over = false;
    for (int t = 0; t < 16; ++t) {
      p *= next;
      if (p > static_cast<i128>(delta_i)) {
        over = true;
        break;
      }
    }
    if (over) return b;
    b = next;
  }
}

namespace {

u64 sat_pow(u64 base, int exp, u64 cap = u64(1) << 62) {
  u64 r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap;
    r *= base;
  }
  return std::min(r, cap);
}

u64 sat_mul(u64 a, u64 b, u64 cap = u64(1) << 62) {
  if (a != 0 && b > cap / a) return cap;
  return std::min(a * b, cap);
}

u64 sat_add(u64 a, u64 b, u64 cap = u64(1) << 62) {
  return (a > cap - b) ? cap : a + b;
}

}  // namespace

int i_min_for_arb(u64 arb) {
  u64 lam = arb < 2 ? 2 : arb;
  u64 want = sat_pow(lam, 16, u64(1) << 50);
  int i = 0;
  while (degree_class_cap(i) < want) ++i;
  return i;
}

void BetaHighGraph::check_invariants() const {
  u64 b4 = sat_pow(beta, 4);
  require(v_high.size() == picked.size(), "picked/high size mismatch");
  std::set<Vertex> low_set(v_low.begin(), v_low.end());
  for (size_t i = 0; i < v_high.size(); ++i) {
    require(picked[i].size() == b4, "|T(v)| != beta^4");
    for (Vertex u : picked[i]) require(low_set.count(u), "picked outside v_low");
  }
  // low-side degree caps: <= beta toward high, <= beta^2 within low
  std::map<Vertex, u64> high_deg, low_deg;
  for (size_t i = 0; i < v_high.size(); ++i)
    for (Vertex u : picked[i]) high_deg[u]++;
  for (auto [a, b] : low_edges) {
    low_deg[a]++;
    low_deg[b]++;
  }
  for (Vertex u : v_low) {
    require(high_deg[u] <= beta, "low vertex exceeds beta high-degree");
    require(low_deg[u] <= beta * beta, "low vertex exceeds beta^2 low-degree");
  }
}

BetaHighGraph prepare_single(const Graph& g, u64 delta_i, u64 arb) {
  BetaHighGraph h;
  h.beta = beta_for_cap(delta_i);
  require(h.beta >= 2 && h.beta >= arb,
          "class cap " + std::to_string(delta_i) + " below threshold for arb " +
              std::to_string(arb));
  u64 sqrt_cap = 1;
  while (sat_mul(sqrt_cap + 1, sqrt_cap + 1) <= delta_i) ++sqrt_cap;

  std::vector<char> is_high(g.n(), 0);
  std::vector<Vertex> v_hi;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (g.degree(v) > sqrt_cap) {
      is_high[v] = 1;
      v_hi.push_back(v);
    }
  }
  h.class_size = v_hi.size();
  if (v_hi.empty()) return h;

  u64 b4 = sat_pow(h.beta, 4);
  u64 b8 = sat_pow(h.beta, 8);
  u64 need = 2 * b8;

  // Majority-low filter, then trim survivors to exactly 2*beta^8 low edges
  // (ascending neighbor id).
  std::vector<std::vector<Vertex>> tilde(g.n());  // per high vertex: kept lows
  std::vector<Vertex> candidates;
  for (Vertex v : v_hi) {
    u64 deg_hi = 0;
    for (Vertex u : g.neighbors(v))
      if (is_high[u]) ++deg_hi;
    if (2 * deg_hi >= g.degree(v)) continue;  // the J set
    u64 deg_low = g.degree(v) - deg_hi;
    if (deg_low < need) continue;
    auto& kept = tilde[v];
    for (Vertex u : g.neighbors(v)) {
      if (!is_high[u]) {
        kept.push_back(u);
        if (kept.size() == need) break;
      }
    }
    candidates.push_back(v);
  }

  std::vector<u64> tilde_deg(g.n(), 0);  // low side: # kept edges toward high
  std::vector<char> in_shell(g.n(), 0);
  for (Vertex v : candidates)
    for (Vertex u : tilde[v]) {
      tilde_deg[u]++;
      in_shell[u] = 1;
    }
  std::vector<char> shell_good(g.n(), 0);
  for (Vertex u = 0; u < g.n(); ++u) {
    if (!in_shell[u] || tilde_deg[u] >= h.beta) continue;
    u64 shell_nbrs = 0;
    for (Vertex w : g.neighbors(u))
      if (in_shell[w]) ++shell_nbrs;
    if (shell_nbrs < h.beta * h.beta) shell_good[u] = 1;
  }

  std::set<Vertex> low_union;
  for (Vertex v : candidates) {
    std::vector<Vertex> good_nbrs;
    for (Vertex u : tilde[v])
      if (shell_good[u]) good_nbrs.push_back(u);
    if (good_nbrs.size() < b8) continue;
    good_nbrs.resize(b4);  // ascending id, T(v) = first beta^4
    h.v_high.push_back(v);
    h.picked.push_back(good_nbrs);
    low_union.insert(good_nbrs.begin(), good_nbrs.end());
  }
  h.v_low.assign(low_union.begin(), low_union.end());
  std::vector<char> in_low(g.n(), 0);
  for (Vertex u : h.v_low) in_low[u] = 1;
  for (auto [a, b] : g.edges())
    if (in_low[a] && in_low[b]) h.low_edges.emplace_back(a, b);
  h.bad_high = h.class_size - h.v_high.size();
  return h;
}

std::map<int, BetaHighGraph> prepare_multi(const Graph& g, u64 arb,
                                           std::optional<int> i_min_override) {
  int i_min = i_min_override.value_or(i_min_for_arb(arb));
  std::map<int, BetaHighGraph> out;
  u64 max_deg = g.max_degree();
  if (max_deg <= degree_class_cap(i_min - 1)) return out;
  int i_max = degree_class_max(max_deg);

  // D(v) = max degree within distance 4, by four neighbor-max rounds.
  std::vector<u64> d(g.n());
  for (Vertex v = 0; v < g.n(); ++v) d[v] = g.degree(v);
  for (int round = 0; round < 4; ++round) {
    std::vector<u64> nd = d;
    for (Vertex v = 0; v < g.n(); ++v)
      for (Vertex u : g.neighbors(v)) nd[v] = std::max(nd[v], d[u]);
    d = nd;
  }

  for (int i = i_min; i <= i_max; ++i) {
    u64 lo = degree_class_cap(i - 1), hi = degree_class_cap(i);
    std::vector<Vertex> class_core;
    for (Vertex v = 0; v < g.n(); ++v)
      if (g.degree(v) > lo && g.degree(v) <= hi) class_core.push_back(v);
    if (class_core.empty()) continue;
    auto dist3 = bfs_distances(g, class_core, 3);
    std::vector<char> keep(g.n(), 0);
    for (Vertex v = 0; v < g.n(); ++v)
      keep[v] = (d[v] > lo && d[v] <= hi && dist3[v] >= 0) ? 1 : 0;
    Graph gi = g.induced(keep);
    BetaHighGraph h = prepare_single(gi, hi, arb);
    if (!h.empty()) out.emplace(i, std::move(h));
  }
  return out;
}

int stage_out_bits(SolKind kind, u64 beta) {
  if (kind == SolKind::IS) return 3 * ceil_log2(std::max<u64>(beta, 4));
  return std::max(1, ceil_log2(beta));
}

Graph conflict_graph(const BetaHighGraph& h, std::vector<Vertex>* low_ids) {
  std::vector<Vertex> lows = h.v_low;
  auto pos = [&](Vertex v) {
    return static_cast<Vertex>(std::lower_bound(lows.begin(), lows.end(), v) -
                               lows.begin());
  };
  std::set<Edge> edges;
  for (const auto& t : h.picked)
    for (size_t i = 0; i < t.size(); ++i)
      for (size_t j = i + 1; j < t.size(); ++j)
        edges.emplace(std::min(pos(t[i]), pos(t[j])),
                      std::max(pos(t[i]), pos(t[j])));
  for (auto [a, b] : h.low_edges)
    edges.emplace(std::min(pos(a), pos(b)), std::max(pos(a), pos(b)));
  if (low_ids) *low_ids = lows;
  return Graph(static_cast<Vertex>(lows.size()),
               std::vector<Edge>(edges.begin(), edges.end()));
}

namespace {

// Precomputed per-class stage structure over positions into h.v_low.
struct ClassStage {
  int index = 0;  // degree class i; 0 for the single-class path
  const BetaHighGraph* h = nullptr;
  int out_bits = 0;
  std::vector<u64> low_color;
  std::vector<std::vector<int>> t_pos;     // per high: member positions
  std::vector<std::vector<int>> low_adj;   // E2 adjacency, positions
  std::vector<std::vector<int>> high_of;   // per low: indices into v_high, by id

  static ClassStage build(const BetaHighGraph& h, SolKind kind,
                          const Coloring& colors, int index) {
    ClassStage cs;
    cs.index = index;
    cs.h = &h;
    cs.out_bits = stage_out_bits(kind, h.beta);
    const auto& lows = h.v_low;
    auto pos = [&](Vertex v) {
      return static_cast<int>(std::lower_bound(lows.begin(), lows.end(), v) -
                              lows.begin());
    };
    cs.low_color.resize(lows.size());
    for (size_t p = 0; p < lows.size(); ++p)
      cs.low_color[p] = static_cast<u64>(colors.color[lows[p]]);
    cs.t_pos.resize(h.v_high.size());
    for (size_t i = 0; i < h.v_high.size(); ++i)
      for (Vertex u : h.picked[i]) cs.t_pos[i].push_back(pos(u));
    cs.low_adj.resize(lows.size());
    for (auto [a, b] : h.low_edges) {
      cs.low_adj[pos(a)].push_back(pos(b));
      cs.low_adj[pos(b)].push_back(pos(a));
    }
    // proposal numbering: per low, its high neighbors ascending by vertex id
    // (v_high is ascending already since prepare walks vertices in order)
    cs.high_of.resize(lows.size());
    for (size_t i = 0; i < h.v_high.size(); ++i)
      for (Vertex u : h.picked[i]) cs.high_of[pos(u)].push_back(static_cast<int>(i));
    for (size_t p = 0; p < lows.size(); ++p)
      std::sort(cs.high_of[p].begin(), cs.high_of[p].end(),
                [&](int x, int y) { return h.v_high[x] < h.v_high[y]; });
    return cs;
  }

  // Survivor count for hash value m[p] ^ w truncated to out_bits.
  u64 survivors(SolKind kind, const std::vector<u64>& m, u64 w,
                std::vector<char>& scratch) const {
    u64 mask = (u64(1) << out_bits) - 1;
    u64 covered = 0;
    if (kind == SolKind::IS) {
      scratch.assign(low_color.size(), 0);
      for (size_t p = 0; p < low_color.size(); ++p)
        scratch[p] = ((m[p] ^ w) & mask) == 0 ? 1 : 0;
      for (size_t i = 0; i < t_pos.size(); ++i) {
        bool cov = false;
        for (int p : t_pos[i]) {
          if (!scratch[p]) continue;
          bool blocked = false;
          for (int q : low_adj[p])
            if (scratch[q]) {
              blocked = true;
              break;
            }
          if (!blocked) {
            cov = true;
            break;
          }
        }
        if (cov) ++covered;
      }
    } else {
      std::vector<char> proposed(t_pos.size(), 0);
      for (size_t p = 0; p < low_color.size(); ++p) {
        u64 idx = (m[p] ^ w) & mask;
        if (idx < high_of[p].size()) proposed[high_of[p][idx]] = 1;
      }
      for (char c : proposed)
        if (c) ++covered;
    }
    return t_pos.size() - covered;
  }
};

struct StageEnum {
  int field_bits = 0;
  int lmax = 0;
  u64 palette = 0;
  std::vector<ClassStage> classes;
  GF2 field{1};

  static StageEnum build(const std::vector<const BetaHighGraph*>& hs,
                         const std::vector<int>& indices, SolKind kind,
                         const Coloring& colors) {
    StageEnum se;
    se.palette = static_cast<u64>(std::max(colors.palette, 2));
    for (size_t i = 0; i < hs.size(); ++i)
      se.classes.push_back(ClassStage::build(*hs[i], kind, colors, indices[i]));
    for (const auto& cs : se.classes) se.lmax = std::max(se.lmax, cs.out_bits);
    se.lmax = std::max(se.lmax, 1);
    se.field_bits = std::max(ceil_log2(se.palette), se.lmax);
    se.field = GF2(se.field_bits);
    return se;
  }

  u64 seed_space() const { return u64(1) << (2 * field_bits); }
  u64 seed_of(u64 a, u64 w) const { return w | (a << field_bits); }

  // Visits behaviors in ascending seed order: a major, then w = low bits of
  // the constant coefficient. fn(a, w, survivors_per_class).
  template <typename Fn>
  void enumerate(SolKind kind, Fn&& fn) const {
    u64 mask = (u64(1) << lmax) - 1;
    std::vector<std::vector<u64>> m(classes.size());
    std::vector<char> scratch;
    std::vector<u64> surv(classes.size());
    for (u64 a = 0; a < (u64(1) << field_bits); ++a) {
      for (size_t ci = 0; ci < classes.size(); ++ci) {
        const auto& cs = classes[ci];
        m[ci].resize(cs.low_color.size());
        for (size_t p = 0; p < cs.low_color.size(); ++p)
          m[ci][p] = field.mul(a, cs.low_color[p]) & mask;
      }
      for (u64 w = 0; w <= mask; ++w) {
        for (size_t ci = 0; ci < classes.size(); ++ci)
          surv[ci] = classes[ci].survivors(kind, m[ci], w, scratch);
        fn(a, w, surv);
      }
    }
  }
};

void check_conflict_properness(const BetaHighGraph& h, const Coloring& colors) {
  for (const auto& t : h.picked)
    for (size_t i = 0; i < t.size(); ++i)
      for (size_t j = i + 1; j < t.size(); ++j)
        require(colors.color[t[i]] != colors.color[t[j]],
                "conflict coloring improper inside a picked set");
  for (auto [a, b] : h.low_edges)
    require(colors.color[a] != colors.color[b],
            "conflict coloring improper on a low-low edge");
}

PartialSolution stage_solution(const Graph& g, const BetaHighGraph& h, SolKind kind,
                               const Coloring& colors, const KWiseFamily& family,
                               u64 seed, int out_bits_override) {
  PartialSolution sol;
  sol.kind = kind;
  int bits = out_bits_override > 0 ? out_bits_override : family.out_bits();
  u64 mask = (u64(1) << bits) - 1;
  auto hash = [&](Vertex u) {
    return family.eval(seed, static_cast<u64>(colors.color[u])) & mask;
  };
  if (kind == SolKind::IS) {
    std::map<Vertex, char> sampled;
    for (Vertex u : h.v_low) sampled[u] = hash(u) == 0 ? 1 : 0;
    std::map<Vertex, std::vector<Vertex>> low_adj;
    for (auto [a, b] : h.low_edges) {
      low_adj[a].push_back(b);
      low_adj[b].push_back(a);
    }
    for (Vertex u : h.v_low) {
      if (!sampled[u]) continue;
      bool blocked = false;
      for (Vertex w : low_adj[u])
        if (sampled[w]) {
          blocked = true;
          break;
        }
      if (!blocked) sol.is_members.push_back(u);
    }
    std::set<Vertex> rem(sol.is_members.begin(), sol.is_members.end());
    for (Vertex u : sol.is_members)
      for (Vertex w : g.neighbors(u)) rem.insert(w);
    sol.removed.assign(rem.begin(), rem.end());
  } else {
    // low u proposes to its hash-indexed high neighbor; high keeps the
    // smallest proposer
    std::map<Vertex, std::vector<Vertex>> highs_of;
    for (size_t i = 0; i < h.v_high.size(); ++i)
      for (Vertex u : h.picked[i]) highs_of[u].push_back(h.v_high[i]);
    std::map<Vertex, Vertex> accepted;  // high -> smallest proposer
    for (Vertex u : h.v_low) {
      auto& hs = highs_of[u];
      std::sort(hs.begin(), hs.end());
      u64 idx = hash(u);
      if (idx >= hs.size()) continue;
      Vertex v = hs[idx];
      auto it = accepted.find(v);
      if (it == accepted.end() || u < it->second) accepted[v] = u;
    }
    std::set<Vertex> rem;
    for (auto [v, u] : accepted) {
      sol.matching.emplace_back(std::min(u, v), std::max(u, v));
      rem.insert(u);
      rem.insert(v);
    }
    sol.removed.assign(rem.begin(), rem.end());
  }
  return sol;
}

}  // namespace

PartialSolution pairwise_stage(const Graph& g, const BetaHighGraph& h, SolKind kind,
                               const Coloring& conflict_colors,
                               const KWiseFamily& family, u64 seed) {
  check_conflict_properness(h, conflict_colors);
  require(family.domain() >= static_cast<u64>(conflict_colors.palette),
          "family domain smaller than the palette");
  int bits = stage_out_bits(kind, h.beta);
  require(family.out_bits() >= bits, "family output too narrow for this class");
  return stage_solution(g, h, kind, conflict_colors, family, seed, bits);
}

u64 surviving_high(const BetaHighGraph& h, SolKind kind,
                   const Coloring& conflict_colors, const KWiseFamily& family,
                   u64 seed, const Graph& g) {
  (void)g;
  ClassStage cs = ClassStage::build(h, kind, conflict_colors, 0);
  u64 mask_all = (u64(1) << family.out_bits()) - 1;
  std::vector<u64> m(cs.low_color.size());
  for (size_t p = 0; p < cs.low_color.size(); ++p)
    m[p] = family.eval(seed, cs.low_color[p]) & mask_all;
  std::vector<char> scratch;
  // seed already folded into m; pass w = 0
  return cs.survivors(kind, m, 0, scratch);
}

StageResult derand_pairwise_stage(const Graph& g, const BetaHighGraph& h, SolKind kind,
                                  const Coloring& conflict_colors, const Config& cfg) {
  StageResult res;
  res.solution.kind = kind;
  if (h.empty()) return res;
  check_conflict_properness(h, conflict_colors);

  StageEnum se = StageEnum::build({&h}, {0}, kind, conflict_colors);
  require(se.seed_space() <= cfg.seed_enum_budget,
          "pairwise-stage seed space exceeds the enumeration budget");

  u64 total_high = h.v_high.size();
  u64 sum_surv = 0;
  u64 best_surv = total_high + 1;
  u64 best_seed = 0;
  se.enumerate(kind, [&](u64 a, u64 w, const std::vector<u64>& surv) {
    sum_surv += surv[0];
    if (surv[0] < best_surv) {
      best_surv = surv[0];
      best_seed = se.seed_of(a, w);
    }
  });
  // Every seed whose constant term shares the low lmax bits behaves alike, so
  // the behavior mean over (a, w) equals the mean over the full seed space.
  res.mean_survivors = Dyadic::ratio_pow2(static_cast<i128>(sum_surv), 0) *
                       Dyadic::ratio_pow2(1, se.field_bits + se.lmax);

  // Certified target: survivors <= 5|V_high| / beta, slack doubled (and
  // logged) per pass while tiny instances sit at the constant's edge.
  u64 base = (5 * total_high) / h.beta;
  int pass = 0;
  while (best_surv > sat_add(sat_mul(base, u64(1) << pass), (u64(1) << pass) - 1)) {
    ++pass;
    require(pass < 62, "pairwise-stage widening diverged");
  }
  res.widenings = pass;
  res.survivors = best_surv;
  res.seed = best_seed;

  KWiseFamily family(se.palette, se.lmax, 2);
  res.solution = stage_solution(g, h, kind, conflict_colors, family, best_seed,
                                stage_out_bits(kind, h.beta));
  return res;
}

MultiStageReport multi_single_stage(const Graph& g, u64 arb, SolKind kind,
                                    const Coloring& dist4_colors, const Config& cfg) {
  MultiStageReport rep;
  rep.solution.kind = kind;
  auto classes = prepare_multi(g, arb);
  if (classes.empty()) return rep;
  for (auto& [i, h] : classes) check_conflict_properness(h, dist4_colors);

  std::vector<const BetaHighGraph*> hs;
  std::vector<int> idx;
  for (auto& [i, h] : classes) {
    hs.push_back(&h);
    idx.push_back(i);
  }
  StageEnum se = StageEnum::build(hs, idx, kind, dist4_colors);
  require(se.seed_space() <= cfg.seed_enum_budget,
          "shared-seed space exceeds the enumeration budget");

  // Per-class survivor targets from c1/c2, floored for integer comparison.
  std::vector<u64> base(hs.size());
  std::map<int, u64> class_sizes;
  {
    int i_min = i_min_for_arb(arb);
    int i_max = degree_class_max(g.max_degree());
    for (int i = i_min; i <= i_max; ++i) {
      u64 lo = degree_class_cap(i - 1), hi = degree_class_cap(i);
      u64 cnt = 0;
      for (Vertex v = 0; v < g.n(); ++v)
        if (g.degree(v) > lo && g.degree(v) <= hi) ++cnt;
      class_sizes[i] = cnt;
    }
  }
  for (size_t c = 0; c < hs.size(); ++c) {
    int i = idx[c];
    u64 t = class_sizes[i] / sat_pow(degree_class_cap(i), cfg.c1);
    for (auto& [j, cnt] : class_sizes)
      if (j > i) t = sat_add(t, sat_mul(sat_pow(degree_class_cap(j), cfg.c2), cnt));
    base[c] = t;
    rep.class_before[i] = class_sizes[i];
  }

  // Enumerate once per widening pass; accept the smallest qualifying seed.
  for (int pass = 0;; ++pass) {
    require(pass < 62, "multi-stage widening diverged");
    std::vector<u64> allowed(hs.size());
    for (size_t c = 0; c < hs.size(); ++c)
      allowed[c] =
          sat_add(sat_mul(base[c], u64(1) << pass), (u64(1) << pass) - 1);
    bool found = false;
    u64 found_seed = 0;
    std::vector<u64> found_surv;
    se.enumerate(kind, [&](u64 a, u64 w, const std::vector<u64>& surv) {
      if (found) return;
      for (size_t c = 0; c < hs.size(); ++c)
        if (surv[c] > allowed[c]) return;
      found = true;
      found_seed = se.seed_of(a, w);
      found_surv = surv;
    });
    if (!found) continue;
    rep.widenings = pass;
    rep.seed = found_seed;
    KWiseFamily family(se.palette, se.lmax, 2);
    for (size_t c = 0; c < hs.size(); ++c) {
      rep.survivors[idx[c]] = found_surv[c];
      rep.class_target[idx[c]] = Dyadic(static_cast<i64>(allowed[c]));
      PartialSolution part =
          stage_solution(g, *hs[c], kind, dist4_colors, family, found_seed,
                         stage_out_bits(kind, hs[c]->beta));
      rep.solution.append(part);
    }
    return rep;
  }
}

MultiMultiReport multi_multi_stage(const Graph& g, u64 arb, SolKind kind, int k,
                                   const Coloring& dist4_colors, const Config& cfg) {
  require(k >= 1, "stage count must be positive");
  MultiMultiReport out;
  out.solution.kind = kind;
  int i_min = i_min_for_arb(arb);
  int i_max = std::max(degree_class_max(g.max_degree()), i_min);
  auto vge = [&](const Graph& gr) {
    std::map<int, u64> counts;
    for (int i = i_min; i <= i_max; ++i) {
      u64 lo = degree_class_cap(i - 1);
      u64 cnt = 0;
      for (Vertex v = 0; v < gr.n(); ++v)
        if (gr.degree(v) > lo) ++cnt;
      counts[i] = cnt;
    }
    return counts;
  };
  out.vge_before = vge(g);
  Graph cur = g;
  for (int stage = 0; stage < k; ++stage) {
    MultiStageReport sr = multi_single_stage(cur, arb, kind, dist4_colors, cfg);
    if (sr.solution.empty() && sr.class_before.empty()) break;  // no classes left
    cur = cur.without_vertices([&] {
      std::vector<char> rm(cur.n(), 0);
      for (Vertex v : sr.solution.removed) rm[v] = 1;
      return rm;
    }());
    out.solution.append(sr.solution);
    out.stages.push_back(std::move(sr));
  }
  out.vge_after = vge(cur);
  return out;
}

ReduceReport mpc_single_class_reduce(MpcCluster& c, Graph& g, u64 delta_i, u64 arb,
                                     SolKind kind, int reps) {
  ReduceReport rep;
  rep.solution.kind = kind;
  u64 sqrt_cap = 1;
  while (sat_mul(sqrt_cap + 1, sqrt_cap + 1) <= delta_i) ++sqrt_cap;
  auto class_count = [&](const Graph& gr) {
    u64 cnt = 0;
    for (Vertex v = 0; v < gr.n(); ++v)
      if (gr.degree(v) > sqrt_cap) ++cnt;
    return cnt;
  };
  rep.class_before = class_count(g);
  for (int r = 0; r < reps; ++r) {
    BetaHighGraph h = prepare_single(g, delta_i, arb);
    c.add_rounds(2);  // preparation is a constant number of primitive rounds
    if (h.empty()) continue;
    std::vector<Vertex> low_ids;
    Graph conf = conflict_graph(h, &low_ids);
    c.charge(conf.max_degree() + 1, 2 * conf.m() + conf.n(), "conflict graph");
    c.add_rounds(1);
    Coloring compact = linial_coloring(conf, identity_coloring(conf.n()));
    c.add_rounds(2);
    Coloring colors;
    colors.color.assign(g.n(), 0);
    colors.palette = compact.palette;
    for (size_t p = 0; p < low_ids.size(); ++p)
      colors.color[low_ids[p]] = compact.color[p];
    StageResult sr = derand_pairwise_stage(g, h, kind, colors, c.config());
    // seed table held on one machine during the vote
    StageEnum se = StageEnum::build({&h}, {0}, kind, colors);
    c.charge(se.seed_space(), se.seed_space(), "seed search");
    int chi = std::max(1, floor_log2(std::max<u64>(c.local_budget(), 2)));
    c.add_rounds((2 * se.field_bits + chi - 1) / chi);
    rep.widenings += sr.widenings;
    g = g.without_vertices([&] {
      std::vector<char> rm(g.n(), 0);
      for (Vertex v : sr.solution.removed) rm[v] = 1;
      return rm;
    }());
    c.add_rounds(1);
    rep.solution.append(sr.solution);
  }
  rep.class_after = class_count(g);
  return rep;
}

PartialSolution mpc_preprocess(MpcCluster& c, Graph& g, u64 arb, SolKind kind,
                               int reps,
                               std::map<int, std::pair<u64, u64>>* shrink) {
  PartialSolution sol;
  sol.kind = kind;
  int i_min = i_min_for_arb(arb);
  int i_max = std::max(degree_class_max(g.max_degree()), i_min);
  for (int i = i_max; i >= i_min; --i) {
    ReduceReport r =
        mpc_single_class_reduce(c, g, degree_class_cap(i), arb, kind, reps);
    if (shrink) (*shrink)[i] = {r.class_before, r.class_after};
    sol.append(r.solution);
  }
  return sol;
}

namespace {

u64 iterated_log2(u64 n, int times) {
  u64 v = n;
  for (int t = 0; t < times; ++t) {
    v = static_cast<u64>(std::max(1, floor_log2(std::max<u64>(v, 2))));
    if (v <= 1) return 1;
  }
  return std::max<u64>(v, 1);
}

}  // namespace

LocalSimReport mpc_multi_multi(MpcCluster& c, const BallStore& store, const Graph& g,
                               u64 arb, SolKind kind, const Coloring& dist4_colors,
                               const Config& cfg) {
  LocalSimReport out;
  out.solution.kind = kind;
  int k = store.radius;
  require(k >= cfg.lemma39_cprime,
          "radius " + std::to_string(k) + " below c' = " +
              std::to_string(cfg.lemma39_cprime) + "; exponentiate further");
  {
    u64 dsup = std::max<u64>(g.max_degree(), 2);
    double bound = std::log2(static_cast<double>(std::max<Vertex>(g.n(), 2))) /
                   std::log2(static_cast<double>(
                       std::max<u64>(dsup * iterated_log2(g.n(), k), 2)));
    out.condition2_holds = static_cast<double>(k) <= bound;
    if (cfg.enforce_lemma39_condition2)
      require(out.condition2_holds, "Lemma-3.9 memory-fit condition fails at k=" +
                                        std::to_string(k));
  }
  out.kappa = std::max(1, k / cfg.local_radius_per_stage);

  // The per-stage winning seeds are agreed globally (each stage is one voting
  // round over the shared family); the output is then reconstructed per
  // vertex from ball data alone.
  Graph mirror = g;
  for (int t = 0; t < out.kappa; ++t) {
    MultiStageReport sr = multi_single_stage(mirror, arb, kind, dist4_colors, cfg);
    if (sr.class_before.empty()) break;
    out.stage_seeds.push_back(sr.seed);
    mirror = mirror.without_vertices([&] {
      std::vector<char> rm(mirror.n(), 0);
      for (Vertex v : sr.solution.removed) rm[v] = 1;
      return rm;
    }());
    c.add_rounds(1);
  }
  if (out.stage_seeds.empty()) return out;
  u64 family_words =
      u64(1) << std::min(40, 2 * ceil_log2(std::max<u64>(dist4_colors.palette, 2)));
  c.charge(family_words, family_words, "seed sequences");

  // Local reconstruction: each stored vertex derives its own fate from its
  // ball. Tie-breaks survive the id compaction because sorting preserves
  // order; colors travel with the ball.
  std::set<Vertex> is_set;
  std::set<Edge> match_set;
  std::set<Vertex> removed;
  for (const auto& [v, ball] : store.balls) {
    std::vector<Vertex> old_id;
    Graph bg = ball_graph(ball, &old_id);
    Coloring bc;
    bc.palette = dist4_colors.palette;
    bc.color.resize(bg.n());
    for (Vertex p = 0; p < bg.n(); ++p) bc.color[p] = dist4_colors.color[old_id[p]];
    Vertex self = static_cast<Vertex>(
        std::lower_bound(old_id.begin(), old_id.end(), v) - old_id.begin());
    PartialSolution local = replay_multi_multi(bg, arb, kind, out.stage_seeds,
                                               bc, cfg);
    for (Vertex u : local.is_members)
      if (u == self) is_set.insert(v);
    for (auto [a, b] : local.matching)
      if (a == self || b == self)
        match_set.emplace(std::min(old_id[a], old_id[b]),
                          std::max(old_id[a], old_id[b]));
    for (Vertex u : local.removed)
      if (u == self) removed.insert(v);
  }
  out.solution.is_members.assign(is_set.begin(), is_set.end());
  out.solution.matching.assign(match_set.begin(), match_set.end());
  out.solution.removed.assign(removed.begin(), removed.end());
  c.add_rounds(1);
  return out;
}

PartialSolution replay_multi_multi(const Graph& g, u64 arb, SolKind kind,
                                   const std::vector<u64>& stage_seeds,
                                   const Coloring& dist4_colors, const Config& cfg) {
  PartialSolution sol;
  sol.kind = kind;
  Graph cur = g;
  for (u64 seed : stage_seeds) {
    auto classes = prepare_multi(cur, arb);
    if (classes.empty()) break;
    std::vector<const BetaHighGraph*> hs;
    std::vector<int> idx;
    for (auto& [i, h] : classes) {
      hs.push_back(&h);
      idx.push_back(i);
    }
    StageEnum se = StageEnum::build(hs, idx, kind, dist4_colors);
    KWiseFamily family(se.palette, se.lmax, 2);
    PartialSolution stage;
    stage.kind = kind;
    for (size_t ci = 0; ci < hs.size(); ++ci) {
      PartialSolution part =
          stage_solution(cur, *hs[ci], kind, dist4_colors, family, seed,
                         stage_out_bits(kind, hs[ci]->beta));
      stage.append(part);
    }
    cur = cur.without_vertices([&] {
      std::vector<char> rm(cur.n(), 0);
      for (Vertex v : stage.removed) rm[v] = 1;
      return rm;
    }());
    sol.append(stage);
  }
  return sol;
}

DegredReport degree_reduce(MpcCluster& c, const Graph& g, u64 arb, SolKind kind) {
  const Config& cfg = c.config();
  DegredReport rep;
  rep.solution.kind = kind;
  u64 target = cfg.degred_target_degree(arb);
  Graph cur = g;
  if (cur.max_degree() <= target) {
    rep.final_max_degree = cur.max_degree();
    return rep;
  }

  if (cfg.preprocess_reps > 0) {
    PartialSolution pre = mpc_preprocess(c, cur, arb, kind, cfg.preprocess_reps);
    rep.solution.append(pre);
  }

  if (cur.max_degree() <= target) {
    rep.final_max_degree = cur.max_degree();
    return rep;
  }

  // Distance-4 coloring shared by every stage; vertex removal only grows
  // distances, so one computation stays proper throughout.
  Coloring dist4 = [&] {
    Graph p4 = graph_power(cur, 4);
    Coloring col;
    col.color.assign(cur.n(), -1);
    int palette = 0;
    for (Vertex v = 0; v < cur.n(); ++v) {
      std::set<int> used;
      for (Vertex u : p4.neighbors(v))
        if (col.color[u] >= 0) used.insert(col.color[u]);
      int pick = 0;
      while (used.count(pick)) ++pick;
      col.color[v] = pick;
      palette = std::max(palette, pick + 1);
    }
    col.palette = palette;
    return col;
  }();
  c.add_rounds(2);

  // Freeze vertices whose 8-hop neighborhood never sees a class member.
  u64 freeze_cutoff = degree_class_cap(i_min_for_arb(arb) - 1);
  auto active_set = [&](const Graph& gr) {
    std::vector<u64> d(gr.n());
    for (Vertex v = 0; v < gr.n(); ++v) d[v] = gr.degree(v);
    for (int round = 0; round < 8; ++round) {
      std::vector<u64> nd = d;
      for (Vertex v = 0; v < gr.n(); ++v)
        for (Vertex u : gr.neighbors(v)) nd[v] = std::max(nd[v], d[u]);
      d = nd;
    }
    std::vector<Vertex> act;
    for (Vertex v = 0; v < gr.n(); ++v)
      if (d[v] > freeze_cutoff) act.push_back(v);
    return act;
  };

  std::vector<Vertex> active = active_set(cur);
  rep.frozen = static_cast<u64>(cur.n()) - active.size();
  BallStore store = collect_balls(c, cur, 1, active);

  for (int level = 0; level <= cfg.max_exponentiation; ++level) {
    if (cur.max_degree() <= target) break;
    if (store.radius >= cfg.lemma39_cprime) {
      for (int r = 0; r < cfg.main_loop_reps; ++r) {
        LocalSimReport lr = mpc_multi_multi(c, store, cur, arb, kind, dist4, cfg);
        if (lr.solution.removed.empty()) break;
        store = remove_and_notify(c, store, lr.solution.removed);
        cur = cur.without_vertices([&] {
          std::vector<char> rm(cur.n(), 0);
          for (Vertex v : lr.solution.removed) rm[v] = 1;
          return rm;
        }());
        rep.solution.append(lr.solution);
        if (cur.max_degree() <= target) break;
      }
    }
    if (cur.max_degree() <= target || level == cfg.max_exponentiation) break;
    store = double_balls(c, store, cur);
    ++rep.main_loop_iterations;
  }
  if (cur.max_degree() > target)
    throw NonProgressError("degree reduction stalled at max degree " +
                           std::to_string(cur.max_degree()) + " (target " +
                           std::to_string(target) + ")");
  rep.final_max_degree = cur.max_degree();
  return rep;
}

}  // namespace arbmpc

#include "cem/mln.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "cem/union_find.hpp"

namespace cem {
namespace {

// Evaluates one rule over `scope` by backtracking through its relation atoms.
class RuleGrounder {
 public:
  RuleGrounder(const WeightedRule& rule, const Instance& instance, const EntitySet& scope)
      : instance_(instance), scope_(scope) {
    vars_ = rule.variables();
    binding_.assign(vars_.size(), kUnbound);
    for (const auto& atom : rule.body) {
      if (atom.is_match()) {
        match_atom_ = &atom;
        continue;
      }
      if (!instance.relations().find(atom.predicate)) {
        throw std::invalid_argument("rule '" + rule.to_string() + "' uses unknown relation " +
                                    atom.predicate);
      }
      atoms_.push_back(&atom);
    }
    // Put atoms sharing variables with earlier ones first so that every atom
    // after the first is joined through an index lookup.
    std::vector<const Atom*> ordered;
    std::vector<bool> bound(vars_.size(), false);
    while (!atoms_.empty()) {
      auto best = atoms_.begin();
      int best_bound = -1;
      for (auto it = atoms_.begin(); it != atoms_.end(); ++it) {
        int n = 0;
        for (const auto& v : (*it)->vars) n += bound[slot(v)] ? 1 : 0;
        if (n > best_bound) {
          best_bound = n;
          best = it;
        }
      }
      for (const auto& v : (*best)->vars) bound[slot(v)] = true;
      ordered.push_back(*best);
      atoms_.erase(best);
    }
    atoms_ = std::move(ordered);
  }

  template <typename Emit>
  void run(Emit&& emit) {
    step(0, emit);
  }

  std::size_t slot(const std::string& var) const {
    return static_cast<std::size_t>(std::find(vars_.begin(), vars_.end(), var) - vars_.begin());
  }
  EntityIndex value(const std::string& var) const { return binding_[slot(var)]; }
  const Atom* match_atom() const { return match_atom_; }
  const std::vector<EntityIndex>& binding() const { return binding_; }

 private:
  static constexpr EntityIndex kUnbound = ~EntityIndex{0};

  bool holds(const Atom& atom, EntityIndex a, EntityIndex b) const {
    if (a == b) return false;
    if (atom.predicate == rel::kSimilar) {
      const int level = instance_.similar_level(EntityPair::make(a, b));
      return level > 0 && (!atom.level || *atom.level == level);
    }
    const auto out = instance_.out_neighbors(atom.predicate, a);
    return std::binary_search(out.begin(), out.end(), b);
  }

  template <typename Emit>
  void step(std::size_t i, Emit& emit) {
    if (i == atoms_.size()) {
      emit();
      return;
    }
    const Atom& atom = *atoms_[i];
    const std::size_t su = slot(atom.vars[0]);
    const std::size_t sv = slot(atom.vars[1]);
    const EntityIndex u = binding_[su];
    const EntityIndex v = binding_[sv];
    if (u != kUnbound && v != kUnbound) {
      if (holds(atom, u, v)) step(i + 1, emit);
      return;
    }
    auto try_bind = [&](std::size_t s, EntityIndex e, EntityIndex other) {
      if (!scope_.contains(e)) return;
      if (!holds(atom, s == su ? e : other, s == su ? other : e)) return;
      binding_[s] = e;
      step(i + 1, emit);
      binding_[s] = kUnbound;
    };
    if (u != kUnbound) {
      for (EntityIndex e : instance_.out_neighbors(atom.predicate, u)) try_bind(sv, e, u);
      return;
    }
    if (v != kUnbound) {
      for (EntityIndex e : instance_.in_neighbors(atom.predicate, v)) try_bind(su, e, v);
      return;
    }
    if (su == sv) return;  // relations are irreflexive
    for (EntityIndex a : scope_) {
      binding_[su] = a;
      for (EntityIndex b : instance_.out_neighbors(atom.predicate, a)) try_bind(sv, b, a);
      binding_[su] = kUnbound;
    }
  }

  const Instance& instance_;
  const EntitySet& scope_;
  std::vector<std::string> vars_;
  std::vector<EntityIndex> binding_;
  std::vector<const Atom*> atoms_;
  const Atom* match_atom_ = nullptr;
};

bool gr_less(const GroundRule& a, const GroundRule& b) {
  return std::tie(a.rule, a.head, a.body, a.support) < std::tie(b.rule, b.head, b.body, b.support);
}

enum class Value { kFalse, kTrue, kFree };

struct Problem {
  std::vector<EntityPair> free;  // sorted; variable i is free[i]
  std::vector<LogScore> unary;
  std::vector<std::vector<std::pair<std::uint32_t, LogScore>>> adj;
};

Problem build_problem(const Grounding& g, const MatchSet& positive, const MatchSet& negative) {
  Problem pb;
  for (const auto& p : g.heads) {
    if (!positive.contains(p) && !negative.contains(p)) pb.free.push_back(p);
  }
  pb.unary.assign(pb.free.size(), LogScore{});
  pb.adj.assign(pb.free.size(), {});
  auto classify = [&](const EntityPair& p, std::uint32_t& var) {
    if (positive.contains(p)) return Value::kTrue;
    if (negative.contains(p)) return Value::kFalse;
    auto it = std::lower_bound(pb.free.begin(), pb.free.end(), p);
    if (it == pb.free.end() || *it != p) return Value::kFalse;
    var = static_cast<std::uint32_t>(it - pb.free.begin());
    return Value::kFree;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, LogScore> pairwise;
  for (const auto& r : g.rules) {
    std::uint32_t hv = 0;
    std::uint32_t bv = 0;
    const Value h = classify(r.head, hv);
    const Value b = r.body ? classify(*r.body, bv) : Value::kTrue;
    if (h == Value::kFalse || b == Value::kFalse) continue;
    if (h == Value::kFree && b == Value::kFree && hv != bv) {
      pairwise[std::minmax(hv, bv)] += r.weight;
    } else if (h == Value::kFree) {
      pb.unary[hv] += r.weight;
    } else if (b == Value::kFree) {
      pb.unary[bv] += r.weight;
    }
  }
  for (const auto& [key, w] : pairwise) {
    if (w == LogScore{}) continue;
    pb.adj[key.first].emplace_back(key.second, w);
    pb.adj[key.second].emplace_back(key.first, w);
  }
  return pb;
}

// (score, size, lexicographic) preference between two assignments of the
// same variables; bit 0 is the smallest pair.
bool prefer(LogScore score, std::uint64_t mask, LogScore best_score, std::uint64_t best_mask) {
  if (score != best_score) return score > best_score;
  const int pc = std::popcount(mask);
  const int best_pc = std::popcount(best_mask);
  if (pc != best_pc) return pc > best_pc;
  const std::uint64_t diff = mask ^ best_mask;
  return (mask & (diff & (~diff + 1))) != 0;
}

// Exhaustive Gray-code search over the variables `vars` of one component.
std::vector<std::uint32_t> solve_exact(const Problem& pb, const std::vector<std::uint32_t>& vars,
                                       std::vector<int>& local) {
  const std::size_t n = vars.size();
  for (std::size_t i = 0; i < n; ++i) local[vars[i]] = static_cast<int>(i);
  std::vector<std::vector<std::pair<std::uint32_t, LogScore>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : pb.adj[vars[i]]) {
      adj[i].emplace_back(static_cast<std::uint32_t>(local[j]), w);
    }
  }
  std::uint64_t mask = 0;
  LogScore score;
  std::uint64_t best_mask = 0;
  LogScore best_score;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < limit; ++k) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(k));
    LogScore delta = pb.unary[vars[bit]];
    for (const auto& [j, w] : adj[bit]) {
      if (mask >> j & 1) delta += w;
    }
    if (mask >> bit & 1) {
      score -= delta;
    } else {
      score += delta;
    }
    mask ^= std::uint64_t{1} << bit;
    if (prefer(score, mask, best_score, best_mask)) {
      best_score = score;
      best_mask = mask;
    }
  }
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask >> i & 1) out.push_back(vars[i]);
  }
  return out;
}

// Max-flow on the standard graph construction for a score with
// non-negative pairwise terms. Such a score is supermodular, so its
// maximizers are closed under union and the largest one is unique: the
// source side of the latest minimum cut.
class MinCut {
 public:
  explicit MinCut(std::size_t nodes) : graph_(nodes), level_(nodes), next_(nodes) {}

  void add_edge(std::size_t from, std::size_t to, std::int64_t cap) {
    graph_[from].push_back({to, graph_[to].size(), cap});
    graph_[to].push_back({from, graph_[from].size() - 1, 0});
  }

  void run(std::size_t s, std::size_t t) {
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (dfs(s, t, std::numeric_limits<std::int64_t>::max()) > 0) {
      }
    }
  }

  /// Nodes that cannot reach `t` in the residual graph.
  std::vector<char> largest_source_side(std::size_t t) const {
    std::vector<char> reaches(graph_.size(), 0);
    std::vector<std::size_t> stack{t};
    reaches[t] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (const auto& e : graph_[v]) {
        // e.to -> v has residual capacity iff the reverse edge does.
        const auto& back = graph_[e.to][e.rev];
        if (back.cap > 0 && !reaches[e.to]) {
          reaches[e.to] = 1;
          stack.push_back(e.to);
        }
      }
    }
    for (auto& r : reaches) r = !r;
    return reaches;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    std::int64_t cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::size_t> queue{s};
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      for (const auto& e : graph_[v]) {
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(std::size_t v, std::size_t t, std::int64_t limit) {
    if (v == t) return limit;
    for (auto& i = next_[v]; i < graph_[v].size(); ++i) {
      Edge& e = graph_[v][i];
      if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
      const std::int64_t pushed = dfs(e.to, t, std::min(limit, e.cap));
      if (pushed > 0) {
        e.cap -= pushed;
        graph_[e.to][e.rev].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

std::vector<std::uint32_t> solve_min_cut(const Problem& pb, const std::vector<std::uint32_t>& vars,
                                         std::vector<int>& local) {
  const std::size_t n = vars.size();
  for (std::size_t i = 0; i < n; ++i) local[vars[i]] = static_cast<int>(i);
  const std::size_t s = n;
  const std::size_t t = n + 1;
  MinCut cut(n + 2);
  // Minimize -score = sum a_i x_i + sum w_ij x_i (1 - x_j) over i < j.
  std::vector<std::int64_t> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] -= pb.unary[vars[i]].units();
    for (const auto& [j, w] : pb.adj[vars[i]]) {
      const auto lj = static_cast<std::size_t>(local[j]);
      if (lj <= i) continue;
      a[i] -= w.units();
      cut.add_edge(i, lj, w.units());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] > 0) cut.add_edge(i, t, a[i]);
    if (a[i] < 0) cut.add_edge(s, i, -a[i]);
  }
  cut.run(s, t);
  const auto side = cut.largest_source_side(t);
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i]) out.push_back(vars[i]);
  }
  return out;
}

bool has_negative_link(const Problem& pb, const std::vector<std::uint32_t>& vars) {
  for (auto v : vars) {
    for (const auto& [j, w] : pb.adj[v]) {
      if (w < LogScore{}) return true;
    }
  }
  return false;
}

// Adds groups of pairs whose joint gain is non-negative until none is left.
// For a supermodular score every such group lies inside the largest
// maximizer, so the result never over-matches.
std::vector<std::uint32_t> solve_greedy(const Problem& pb, const std::vector<std::uint32_t>& vars) {
  std::vector<char> on(pb.free.size(), 0);
  std::vector<char> in_group(pb.free.size(), 0);
  auto gain_of = [&](const std::vector<std::uint32_t>& group) {
    LogScore gain;
    for (auto v : group) in_group[v] = 1;
    for (auto v : group) {
      gain += pb.unary[v];
      for (const auto& [j, w] : pb.adj[v]) {
        if (on[j] || (in_group[j] && j > v)) gain += w;
      }
    }
    for (auto v : group) in_group[v] = 0;
    return gain;
  };
  auto try_add = [&](std::vector<std::uint32_t> group) {
    std::erase_if(group, [&](std::uint32_t v) { return on[v] != 0; });
    std::sort(group.begin(), group.end());
    group.erase(std::unique(group.begin(), group.end()), group.end());
    if (group.empty() || gain_of(group) < LogScore{}) return false;
    for (auto v : group) on[v] = 1;
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto v : vars) {
      if (!on[v]) changed |= try_add({v});
    }
    for (auto v : vars) {
      std::vector<std::uint32_t> star{v};
      for (const auto& [j, w] : pb.adj[v]) {
        if (w > LogScore{}) star.push_back(j);
      }
      changed |= try_add(std::move(star));
    }
    changed |= try_add(vars);
  }
  std::vector<std::uint32_t> out;
  for (auto v : vars) {
    if (on[v]) out.push_back(v);
  }
  return out;
}

bool transitively_closed(const MatchSet& s) {
  std::map<EntityIndex, std::vector<EntityIndex>> partners;
  for (const auto& p : s) {
    partners[p.lo].push_back(p.hi);
    partners[p.hi].push_back(p.lo);
  }
  for (const auto& [center, list] : partners) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (!s.contains(EntityPair::make(list[i], list[j]))) return false;
      }
    }
  }
  return true;
}

MatchSet solve_transitive(const Problem& pb, const MatchSet& fixed, const MapOptions& options) {
  const std::size_t n = pb.free.size();
  if (n > options.exact_cap) {
    throw InferenceError("transitive inference over " + std::to_string(n) +
                         " free pairs exceeds the exact cap");
  }
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0U);
  bool found = false;
  std::uint64_t best_mask = 0;
  LogScore best_score;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    MatchSet s = fixed;
    LogScore score;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      s.insert(pb.free[i]);
      score += pb.unary[i];
      for (const auto& [j, w] : pb.adj[i]) {
        if (j > i && (mask >> j & 1)) score += w;
      }
    }
    if (!transitively_closed(s)) continue;
    if (!found || prefer(score, mask, best_score, best_mask)) {
      found = true;
      best_score = score;
      best_mask = mask;
    }
  }
  if (!found) throw InferenceError("positive evidence admits no transitively closed match set");
  MatchSet out = fixed;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask >> i & 1) out.insert(pb.free[i]);
  }
  return out;
}

}  // namespace

Grounding ground(const RuleSetConfig& rules, const Instance& instance, const EntitySet& scope) {
  for (EntityIndex e : scope) {
    if (e >= instance.size()) throw std::out_of_range("grounding scope mentions unknown entity");
  }
  Grounding g;
  g.scope = scope;
  g.transitive = rules.has_transitivity();
  using Key = std::tuple<std::uint32_t, EntityPair, std::optional<EntityPair>,
                         std::vector<EntityIndex>>;
  std::map<Key, std::size_t> seen;
  std::vector<EntityPair> heads;
  for (std::uint32_t r = 0; r < rules.rules.size(); ++r) {
    const auto& rule = rules.rules[r];
    if (rule.hard) continue;
    RuleGrounder grounder(rule, instance, scope);
    grounder.run([&] {
      const EntityIndex h0 = grounder.value(rule.head.vars[0]);
      const EntityIndex h1 = grounder.value(rule.head.vars[1]);
      if (h0 == h1) return;
      const EntityPair head = EntityPair::make(h0, h1);
      std::optional<EntityPair> body;
      if (const Atom* m = grounder.match_atom()) {
        const EntityIndex b0 = grounder.value(m->vars[0]);
        const EntityIndex b1 = grounder.value(m->vars[1]);
        if (b0 != b1) body = EntityPair::make(b0, b1);
      }
      if (body == head) body.reset();
      heads.push_back(head);
      std::vector<EntityIndex> support = grounder.binding();
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      EntityPair first = head;
      std::optional<EntityPair> second = body;
      if (body && *body < head) std::swap(first, *second);
      Key key{r, first, second, support};
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(std::move(key), g.rules.size());
        g.rules.push_back(GroundRule{r, head, body, rule.weight, std::move(support), false});
        return;
      }
      GroundRule& existing = g.rules[it->second];
      if (existing.head != head) existing.body_is_head = true;
    });
  }
  std::sort(g.rules.begin(), g.rules.end(), gr_less);
  g.heads = MatchSet(std::move(heads));
  return g;
}

LogScore log_score(const std::vector<GroundRule>& groundings, const MatchSet& s) {
  LogScore total;
  for (const auto& r : groundings) {
    if (s.contains(r.head) && (!r.body || s.contains(*r.body))) total += r.weight;
  }
  return total;
}

MapResult map_infer(const Grounding& grounding, const Evidence& evidence,
                    const MapOptions& options) {
  if (options.exact_cap > 30) throw std::invalid_argument("exact_cap must be at most 30");
  const MatchSet positive = evidence.positive.restricted_to(grounding.scope);
  const Problem pb = build_problem(grounding, positive, evidence.negative);
  MapResult result;
  if (grounding.transitive) {
    result.matches = solve_transitive(pb, positive, options);
    result.components = pb.free.empty() ? 0 : 1;
    result.largest_component = pb.free.size();
    return result;
  }

  UnionFind uf(pb.free.size());
  for (std::uint32_t i = 0; i < pb.adj.size(); ++i) {
    for (const auto& [j, w] : pb.adj[i]) uf.unite(i, j);
  }
  std::map<std::size_t, std::vector<std::uint32_t>> components;
  for (std::uint32_t i = 0; i < pb.free.size(); ++i) components[uf.find(i)].push_back(i);

  std::vector<EntityPair> chosen(positive.begin(), positive.end());
  std::vector<int> local(pb.free.size(), -1);
  for (const auto& [root, vars] : components) {
    result.largest_component = std::max(result.largest_component, vars.size());
    std::vector<std::uint32_t> picked;
    if (vars.size() <= options.exact_cap) {
      picked = solve_exact(pb, vars, local);
    } else if (!has_negative_link(pb, vars)) {
      picked = solve_min_cut(pb, vars, local);
    } else {
      result.approximate = true;
      picked = solve_greedy(pb, vars);
    }
    for (auto v : picked) chosen.push_back(pb.free[v]);
  }
  result.components = components.size();
  result.matches = MatchSet(std::move(chosen));
  return result;
}

MlnMatcher::MlnMatcher(std::shared_ptr<const Instance> instance, RuleSetConfig rules,
                       MapOptions options)
    : instance_(std::move(instance)), rules_(std::move(rules)), options_(options) {
  static std::atomic<std::uint64_t> next_id{1};
  id_ = next_id++;
  if (!instance_) throw std::invalid_argument("mln matcher needs an instance");
  if (options_.exact_cap > 30) throw std::invalid_argument("exact_cap must be at most 30");
  global_ = ground(rules_, *instance_, instance_->all_entities());
  by_min_entity_.assign(instance_->size(), {});
  for (std::uint32_t i = 0; i < global_.rules.size(); ++i) {
    const auto& r = global_.rules[i];
    by_min_entity_[r.support.front()].push_back(i);
    by_pair_[r.head].push_back(i);
    if (r.body) by_pair_[*r.body].push_back(i);
  }
}

Grounding MlnMatcher::local_grounding(const EntitySet& entities) const {
  Grounding g;
  g.scope = entities;
  g.transitive = global_.transitive;
  // Per-thread membership marks, cleared again before returning.
  thread_local std::vector<std::uint8_t> mark;
  if (mark.size() < instance_->size()) mark.resize(instance_->size(), 0);
  for (EntityIndex e : entities) {
    if (e >= instance_->size()) throw std::out_of_range("neighborhood mentions unknown entity");
    mark[e] = 1;
  }
  std::vector<std::uint32_t> ids;
  for (EntityIndex e : entities) {
    for (auto id : by_min_entity_[e]) {
      const auto& support = global_.rules[id].support;
      if (std::all_of(support.begin(), support.end(), [&](EntityIndex x) { return mark[x] != 0; })) {
        ids.push_back(id);
      }
    }
  }
  for (EntityIndex e : entities) mark[e] = 0;
  std::sort(ids.begin(), ids.end());
  std::vector<EntityPair> heads;
  g.rules.reserve(ids.size());
  for (auto id : ids) {
    const auto& r = global_.rules[id];
    g.rules.push_back(r);
    heads.push_back(r.head);
    if (r.body_is_head) heads.push_back(*r.body);
  }
  g.heads = MatchSet(std::move(heads));
  return g;
}

MapResult MlnMatcher::infer(const EntitySet& entities, const Evidence& evidence) const {
  ++invocations_;
  // compute_maximal asks about the same neighborhood many times in a row.
  struct Cache {
    std::uint64_t owner = 0;
    Grounding grounding;
  };
  thread_local Cache cache;
  if (cache.owner != id_ || cache.grounding.scope != entities) {
    cache.owner = 0;
    cache.grounding = local_grounding(entities);
    cache.owner = id_;
  }
  MapResult result = map_infer(cache.grounding, evidence, options_);
  if (result.approximate) ++approximate_;
  return result;
}

MatchSet MlnMatcher::match(const EntitySet& entities, const Evidence& evidence) const {
  return infer(entities, evidence).matches;
}

std::vector<EntityPair> MlnMatcher::candidate_pairs(const EntitySet& entities) const {
  return local_grounding(entities).heads.pairs();
}

LogScore MlnMatcher::log_score(const MatchSet& pairs) const {
  LogScore total;
  for (const auto& p : pairs) {
    auto it = by_pair_.find(p);
    if (it == by_pair_.end()) continue;
    for (auto id : it->second) {
      const auto& r = global_.rules[id];
      if (r.head == p && (!r.body || pairs.contains(*r.body))) total += r.weight;
    }
  }
  if (global_.transitive) {
    std::map<EntityIndex, std::vector<EntityIndex>> partners;
    for (const auto& p : pairs) {
      partners[p.lo].push_back(p.hi);
      partners[p.hi].push_back(p.lo);
    }
    for (const auto& [center, list] : partners) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size(); ++j) {
          if (!pairs.contains(EntityPair::make(list[i], list[j]))) total -= kHardPenalty;
        }
      }
    }
  }
  return total;
}

LogScore MlnMatcher::score_gain(const MatchSet& base, const MatchSet& extra) const {
  if (global_.transitive) return log_score(base.united(extra)) - log_score(base);
  auto in_both = [&](const EntityPair& p) { return extra.contains(p) || base.contains(p); };
  std::vector<std::uint32_t> touched;
  for (const auto& p : extra) {
    if (base.contains(p)) continue;
    auto it = by_pair_.find(p);
    if (it != by_pair_.end()) touched.insert(touched.end(), it->second.begin(), it->second.end());
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  // Every touched rule mentions a pair outside `base`, so none fired before.
  LogScore gain;
  for (auto id : touched) {
    const auto& r = global_.rules[id];
    if (in_both(r.head) && (!r.body || in_both(*r.body))) gain += r.weight;
  }
  return gain;
}

bool MlnMatcher::interacting_pairs(const EntityPair& p, std::vector<EntityPair>& out) const {
  if (global_.transitive) return false;
  auto it = by_pair_.find(p);
  if (it == by_pair_.end()) return true;
  for (auto id : it->second) {
    const auto& r = global_.rules[id];
    if (!r.body) continue;
    out.push_back(r.head == p ? *r.body : r.head);
  }
  return true;
}

std::unique_ptr<Matcher> make_mln_matcher(std::shared_ptr<const Instance> instance,
                                          const MatcherConfig& config) {
  auto get = [&](std::string_view key) -> const std::string* {
    auto it = config.find(key);
    return it == config.end() ? nullptr : &it->second;
  };
  const bool unsafe = get("allow_unsafe") && (*get("allow_unsafe") == "true" || *get("allow_unsafe") == "1");
  const std::string* rules_name = get("rules");
  RuleSetConfig rules = rule_set_by_name(rules_name ? *rules_name : "learned", unsafe);
  MapOptions options;
  if (const auto* cap = get("exact_cap")) options.exact_cap = std::stoul(*cap);
  return std::make_unique<MlnMatcher>(std::move(instance), std::move(rules), options);
}

}  // namespace cem

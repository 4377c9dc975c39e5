#include "cem/message_passing.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "cem/union_find.hpp"
#include "json.hpp"

namespace cem {
namespace {

using nlohmann::json;

json pairs_json(const Instance& instance, const MatchSet& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back({instance.id(p.lo), instance.id(p.hi)});
  return out;
}

MatchSet without_found(const MatchSet& m, const FoundSet& found) {
  std::vector<EntityPair> rest;
  for (const auto& p : m) {
    if (!found.contains(p)) rest.push_back(p);
  }
  return MatchSet(std::move(rest));
}

void emit(std::ostream* trace, const json& event) {
  if (trace) *trace << event.dump() << '\n';
}

class Runner {
 public:
  Runner(const Matcher& matcher, const Cover& cover, const RunOptions& options)
      : matcher_(matcher),
        cover_(cover),
        options_(options),
        membership_(cover.membership(matcher.instance().size())) {
    state_.found = FoundSet(matcher.instance().size());
    state_.queued.assign(cover.size(), 0);
    state_.visits.assign(cover.size(), 0);
    state_.invocations.assign(cover.size(), 0);
    for (std::size_t i = 0; i < cover.size(); ++i) enqueue(i);
    if (options.pop_order_seed) rng_.seed(*options.pop_order_seed);
  }

  template <typename Visit>
  RunResult run(Visit&& visit) {
    while (!state_.active.empty()) {
      const std::size_t id = pop();
      ++state_.visits[id];
      ++state_.steps;
      MatchSet added;
      try {
        added = visit(cover_.neighborhoods[id]);
      } catch (const std::exception& e) {
        throw RunAborted("neighborhood " + std::to_string(id) + ": " + e.what(), id, state_);
      }
      emit(options_.trace, {{"event", "visit"},
                            {"neighborhood", id},
                            {"added", pairs_json(matcher_.instance(), added)}});
      for (std::size_t n : neighbor_set(added, cover_, membership_, options_.reactivation)) {
        enqueue(n);
      }
      if (options_.on_step) options_.on_step(state_);
    }
    RunResult result;
    result.matches = state_.found.pairs();
    result.state = std::move(state_);
    return result;
  }

  MatchSet call(const Neighborhood& n, const MatchSet& evidence) {
    count(n.id, 1);
    return matcher_.match(n.members, Evidence(evidence));
  }

  void count(std::size_t id, std::uint64_t calls) {
    state_.invocations[id] += calls;
    state_.total_invocations += calls;
  }

  RunState& state() { return state_; }
  const RunOptions& options() const { return options_; }

 private:
  void enqueue(std::size_t id) {
    if (state_.queued[id]) return;
    state_.queued[id] = 1;
    state_.active.push_back(id);
  }

  std::size_t pop() {
    std::size_t pos = 0;
    if (options_.pop_order_seed) pos = static_cast<std::size_t>(rng_() % state_.active.size());
    const std::size_t id = state_.active[pos];
    state_.active.erase(state_.active.begin() + static_cast<std::ptrdiff_t>(pos));
    state_.queued[id] = 0;
    return id;
  }

  const Matcher& matcher_;
  const Cover& cover_;
  const RunOptions& options_;
  std::vector<std::vector<std::size_t>> membership_;
  RunState state_;
  std::mt19937_64 rng_;
};

}  // namespace

MatchSet FoundSet::add(const MatchSet& other) {
  MatchSet fresh = other.minus(pairs_);
  if (fresh.empty()) return fresh;
  for (const auto& p : fresh) {
    if (p.hi >= partners_.size()) partners_.resize(p.hi + 1);
    partners_[p.lo].push_back(p.hi);
    partners_[p.hi].push_back(p.lo);
  }
  pairs_.unite_with(fresh);
  return fresh;
}

MatchSet FoundSet::restricted_to(const EntitySet& entities) const {
  std::vector<EntityPair> out;
  for (EntityIndex e : entities) {
    if (e >= partners_.size()) continue;
    for (EntityIndex o : partners_[e]) {
      if (o > e && entities.contains(o)) out.push_back(EntityPair{e, o});
    }
  }
  return MatchSet(std::move(out));
}

std::vector<std::size_t> neighbor_set(const MatchSet& delta, const Cover& cover,
                                      const std::vector<std::vector<std::size_t>>& membership,
                                      Reactivation mode) {
  std::vector<std::size_t> out;
  for (const auto& p : delta) {
    const auto& lo = membership.at(p.lo);
    const auto& hi = membership.at(p.hi);
    if (mode == Reactivation::kEntityOverlap) {
      out.insert(out.end(), lo.begin(), lo.end());
      out.insert(out.end(), hi.begin(), hi.end());
    } else {
      for (std::size_t id : lo) {
        if (cover.neighborhoods[id].members.contains(p.hi)) out.push_back(id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> neighbor_set(const MatchSet& delta, const Cover& cover,
                                      Reactivation mode) {
  EntityIndex top = 0;
  for (const auto& n : cover.neighborhoods) {
    if (!n.members.empty()) top = std::max(top, n.members.members().back());
  }
  for (const auto& p : delta) top = std::max(top, p.hi);
  return neighbor_set(delta, cover, cover.membership(std::size_t{top} + 1), mode);
}

RunResult no_mp(const Matcher& matcher, const Cover& cover) {
  RunResult result;
  result.state.found = FoundSet(matcher.instance().size());
  result.state.visits.assign(cover.size(), 1);
  result.state.invocations.assign(cover.size(), 1);
  result.state.queued.assign(cover.size(), 0);
  for (const auto& n : cover.neighborhoods) {
    MatchSet out;
    try {
      out = matcher.match(n.members, Evidence{});
    } catch (const std::exception& e) {
      throw RunAborted("neighborhood " + std::to_string(n.id) + ": " + e.what(), n.id,
                       result.state);
    }
    ++result.state.total_invocations;
    ++result.state.steps;
    result.state.found.add(out);
  }
  result.matches = result.state.found.pairs();
  return result;
}

RunResult smp(const Matcher& matcher, const Cover& cover, const RunOptions& options) {
  Runner runner(matcher, cover, options);
  return runner.run([&](const Neighborhood& n) {
    RunState& st = runner.state();
    const MatchSet m_c = runner.call(n, st.found.restricted_to(n.members));
    return st.found.add(m_c);
  });
}

MaximalResult compute_maximal(const Matcher& matcher, const EntitySet& members,
                              const MatchSet& found, const MatchSet* m_c) {
  MaximalResult result;
  const MatchSet local_found = found.restricted_to(members);
  MatchSet base;
  if (m_c) {
    base = *m_c;
  } else {
    base = matcher.match(members, Evidence(local_found));
    ++result.invocations;
  }
  std::vector<EntityPair> candidates;
  for (const auto& p : matcher.candidate_pairs(members)) {
    if (!local_found.contains(p) && !base.contains(p)) candidates.push_back(p);
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<MatchSet> outcome;
  outcome.reserve(candidates.size());
  for (const auto& p : candidates) {
    MatchSet evidence = local_found;
    evidence.insert(p);
    outcome.push_back(matcher.match(members, Evidence(std::move(evidence))));
    ++result.invocations;
  }
  UnionFind uf(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const auto& q : outcome[i]) {
      auto it = std::lower_bound(candidates.begin(), candidates.end(), q);
      if (it == candidates.end() || *it != q) continue;
      const auto j = static_cast<std::size_t>(it - candidates.begin());
      if (j > i && outcome[j].contains(candidates[i])) uf.unite(i, j);
    }
  }
  std::map<std::size_t, std::vector<EntityPair>> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) groups[uf.find(i)].push_back(candidates[i]);
  for (auto& [root, pairs] : groups) result.messages.emplace_back(std::move(pairs));
  std::sort(result.messages.begin(), result.messages.end(),
            [](const MatchSet& a, const MatchSet& b) { return a.pairs() < b.pairs(); });
  return result;
}

std::vector<MatchSet> normalize(std::vector<MatchSet> messages) {
  std::erase_if(messages, [](const MatchSet& m) { return m.empty(); });
  UnionFind uf(messages.size());
  std::map<EntityPair, std::size_t> owner;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    for (const auto& p : messages[i]) {
      auto [it, inserted] = owner.emplace(p, i);
      if (!inserted) uf.unite(it->second, i);
    }
  }
  std::map<std::size_t, MatchSet> merged;
  for (std::size_t i = 0; i < messages.size(); ++i) merged[uf.find(i)].unite_with(messages[i]);
  std::vector<MatchSet> out;
  out.reserve(merged.size());
  for (auto& [root, m] : merged) out.push_back(std::move(m));
  std::sort(out.begin(), out.end(),
            [](const MatchSet& a, const MatchSet& b) { return a.pairs() < b.pairs(); });
  return out;
}

void prune_messages(std::vector<MatchSet>& pool, const FoundSet& found) {
  for (auto& m : pool) {
    if (std::any_of(m.begin(), m.end(), [&](const EntityPair& p) { return found.contains(p); })) {
      m = without_found(m, found);
    }
  }
  std::erase_if(pool, [](const MatchSet& m) { return m.empty(); });
  std::sort(pool.begin(), pool.end(),
            [](const MatchSet& a, const MatchSet& b) { return a.pairs() < b.pairs(); });
}

MatchSet promote(const ProbabilisticMatcher& matcher, std::vector<MatchSet>& pool,
                 FoundSet& found, std::uint64_t* promotions, std::ostream* trace) {
  // Gains only grow as `found` grows, so sweeping the sorted pool until a
  // sweep promotes nothing reaches the same fixpoint as restarting after
  // every promotion.
  MatchSet added;
  bool again = true;
  while (again) {
    again = false;
    std::vector<MatchSet> kept;
    kept.reserve(pool.size());
    for (auto& m : pool) {
      MatchSet rest = without_found(m, found);
      if (rest.empty()) continue;
      if (matcher.score_gain(found.pairs(), rest) < LogScore{}) {
        kept.push_back(std::move(rest));
        continue;
      }
      emit(trace, {{"event", "promote"}, {"pairs", pairs_json(matcher.instance(), rest)}});
      added.unite_with(found.add(rest));
      if (promotions) ++*promotions;
      again = true;
    }
    pool = std::move(kept);
  }
  return added;
}

std::size_t MessagePool::new_slot(MatchSet m) {
  std::size_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
    slots_[slot] = std::move(m);
  } else {
    slot = slots_.size();
    slots_.push_back(std::move(m));
  }
  for (const auto& p : slots_[slot]) owner_[p] = slot;
  ++live_;
  dirty_.push_back(slot);
  return slot;
}

void MessagePool::drop(std::size_t slot) {
  for (const auto& p : slots_[slot]) owner_.erase(p);
  slots_[slot] = MatchSet{};
  free_.push_back(slot);
  --live_;
}

void MessagePool::add(const MatchSet& message, const FoundSet& found) {
  MatchSet merged = without_found(message, found);
  if (merged.empty()) return;
  std::vector<std::size_t> overlapping;
  for (const auto& p : merged) {
    auto it = owner_.find(p);
    if (it != owner_.end()) overlapping.push_back(it->second);
  }
  std::sort(overlapping.begin(), overlapping.end());
  overlapping.erase(std::unique(overlapping.begin(), overlapping.end()), overlapping.end());
  for (std::size_t slot : overlapping) {
    merged.unite_with(slots_[slot]);
    drop(slot);
  }
  new_slot(std::move(merged));
}

void MessagePool::found_pairs(const MatchSet& delta) {
  for (const auto& p : delta) {
    pending_.push_back(p);
    auto it = owner_.find(p);
    if (it == owner_.end()) continue;
    const std::size_t slot = it->second;
    owner_.erase(it);
    slots_[slot].erase(p);
    if (slots_[slot].empty()) {
      slots_[slot] = MatchSet{};
      free_.push_back(slot);
      --live_;
    } else {
      dirty_.push_back(slot);
    }
  }
}

MatchSet MessagePool::promote(const ProbabilisticMatcher& matcher, FoundSet& found,
                              std::uint64_t* promotions, std::ostream* trace) {
  // Gains only grow as `found` grows, so the set promoted at the fixpoint
  // does not depend on the order in which messages are tried.
  std::vector<EntityPair> near;
  bool everything = false;
  auto expand = [&](const std::vector<EntityPair>& pairs) {
    for (const auto& q : pairs) {
      near.clear();
      if (!matcher.interacting_pairs(q, near)) {
        everything = true;
        return;
      }
      for (const auto& r : near) {
        auto it = owner_.find(r);
        if (it != owner_.end()) dirty_.push_back(it->second);
      }
    }
  };
  expand(pending_);
  pending_.clear();

  MatchSet added;
  while (true) {
    if (everything) {
      dirty_.clear();
      for (std::size_t s = 0; s < slots_.size(); ++s) {
        if (!slots_[s].empty()) dirty_.push_back(s);
      }
      everything = false;
    }
    if (dirty_.empty()) break;
    std::vector<std::size_t> work;
    work.swap(dirty_);
    std::sort(work.begin(), work.end(), [&](std::size_t a, std::size_t b) {
      return slots_[a].pairs() < slots_[b].pairs();
    });
    work.erase(std::unique(work.begin(), work.end(),
                           [&](std::size_t a, std::size_t b) { return a == b; }),
               work.end());
    for (std::size_t slot : work) {
      const MatchSet& m = slots_[slot];
      if (m.empty()) continue;
      if (matcher.score_gain(found.pairs(), m) < LogScore{}) continue;
      emit(trace, {{"event", "promote"}, {"pairs", pairs_json(matcher.instance(), m)}});
      MatchSet fresh = found.add(m);
      added.unite_with(fresh);
      if (promotions) ++*promotions;
      drop(slot);
      expand(fresh.pairs());
      if (everything) break;
    }
  }
  return added;
}

std::vector<MatchSet> MessagePool::messages() const {
  std::vector<MatchSet> out;
  for (const auto& m : slots_) {
    if (!m.empty()) out.push_back(m);
  }
  std::sort(out.begin(), out.end(),
            [](const MatchSet& a, const MatchSet& b) { return a.pairs() < b.pairs(); });
  return out;
}

RunResult mmp(const ProbabilisticMatcher& matcher, const Cover& cover, const RunOptions& options) {
  Runner runner(matcher, cover, options);
  return runner.run([&](const Neighborhood& n) {
    RunState& st = runner.state();
    const MatchSet evidence = st.found.restricted_to(n.members);
    const MatchSet m_c = runner.call(n, evidence);
    MaximalResult maximal = compute_maximal(matcher, n.members, evidence, &m_c);
    runner.count(n.id, maximal.invocations);
    for (const auto& m : maximal.messages) {
      if (m.size() > 1) {
        emit(options.trace, {{"event", "message"},
                             {"neighborhood", n.id},
                             {"pairs", pairs_json(matcher.instance(), m)}});
      }
    }
    MatchSet added = st.found.add(m_c);
    st.pool.found_pairs(added);
    for (const auto& m : maximal.messages) st.pool.add(m, st.found);
    added.unite_with(st.pool.promote(matcher, st.found, &st.promotions, options.trace));
    return added;
  });
}

}  // namespace cem

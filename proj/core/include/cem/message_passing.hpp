#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cem/covering.hpp"
#include "cem/matcher.hpp"

namespace cem {

/// How newly found pairs re-activate neighborhoods.
enum class Reactivation {
  /// Neighborhoods containing both endpoints of a new pair. A neighborhood
  /// of k entities is then re-queued at most k(k-1)/2 times.
  kPairContainment,
  /// Neighborhoods containing either endpoint.
  kEntityOverlap,
};

/// M+ with a per-entity partner index, so that restricting it to a
/// neighborhood costs time proportional to the neighborhood.
class FoundSet {
 public:
  explicit FoundSet(std::size_t entity_count = 0) : partners_(entity_count) {}

  bool contains(const EntityPair& p) const { return pairs_.contains(p); }
  /// Pairs of `other` that were new.
  MatchSet add(const MatchSet& other);
  MatchSet restricted_to(const EntitySet& entities) const;
  const MatchSet& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  MatchSet pairs_;
  std::vector<std::vector<EntityIndex>> partners_;
};

/// Pool of pairwise disjoint maximal messages, kept disjoint from M+.
///
/// Equivalent to normalize() + prune_messages() + promote() over the whole
/// pool, but incremental: only messages that were added, merged, pruned or
/// that interact (through the matcher's interacting_pairs()) with newly
/// found pairs are re-scored.
class MessagePool {
 public:
  /// Merges `message` with every pooled message it overlaps. Pairs already
  /// in `found` are dropped.
  void add(const MatchSet& message, const FoundSet& found);
  /// Records pairs that just entered M+: they leave their messages, and the
  /// messages around them get re-scored by the next promote().
  void found_pairs(const MatchSet& delta);
  /// Promotes messages with non-negative gain until none is left; returns
  /// the promoted pairs (already added to `found`).
  MatchSet promote(const ProbabilisticMatcher& matcher, FoundSet& found,
                   std::uint64_t* promotions = nullptr, std::ostream* trace = nullptr);

  /// The messages, sorted.
  std::vector<MatchSet> messages() const;
  std::size_t size() const { return live_; }
  bool empty() const { return live_ == 0; }

 private:
  std::size_t new_slot(MatchSet m);
  void drop(std::size_t slot);

  std::vector<MatchSet> slots_;
  std::vector<std::size_t> free_;
  std::size_t live_ = 0;
  std::unordered_map<EntityPair, std::size_t, EntityPairHash> owner_;
  std::vector<std::size_t> dirty_;
  /// Pairs found since the last promote().
  std::vector<EntityPair> pending_;
};

struct RunState {
  std::deque<std::size_t> active;
  std::vector<char> queued;
  FoundSet found;
  /// Pairwise disjoint maximal messages (MMP only).
  MessagePool pool;
  std::vector<std::uint64_t> visits;
  /// Matcher calls made on behalf of each neighborhood.
  std::vector<std::uint64_t> invocations;
  std::uint64_t total_invocations = 0;
  std::uint64_t promotions = 0;
  std::uint64_t steps = 0;
};

struct RunResult {
  MatchSet matches;
  RunState state;
};

struct RunOptions {
  Reactivation reactivation = Reactivation::kPairContainment;
  /// When set, each step pops a uniformly random active neighborhood
  /// instead of the queue front.
  std::optional<std::uint64_t> pop_order_seed;
  /// JSON-lines event log.
  std::ostream* trace = nullptr;
  /// Called after every neighborhood visit.
  std::function<void(const RunState&)> on_step;
};

/// A matcher failure inside a run, with the state reached so far.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, std::size_t neighborhood, RunState partial)
      : std::runtime_error(what), neighborhood_(neighborhood), partial_(std::move(partial)) {}
  std::size_t neighborhood() const { return neighborhood_; }
  const RunState& partial() const { return partial_; }

 private:
  std::size_t neighborhood_;
  RunState partial_;
};

/// Neighborhood ids re-activated by `delta`, sorted.
std::vector<std::size_t> neighbor_set(const MatchSet& delta, const Cover& cover,
                                      const std::vector<std::vector<std::size_t>>& membership,
                                      Reactivation mode = Reactivation::kPairContainment);
std::vector<std::size_t> neighbor_set(const MatchSet& delta, const Cover& cover,
                                      Reactivation mode = Reactivation::kPairContainment);

/// One pass, every neighborhood matched without evidence.
RunResult no_mp(const Matcher& matcher, const Cover& cover);

/// Simple message passing.
RunResult smp(const Matcher& matcher, const Cover& cover, const RunOptions& options = {});

struct MaximalResult {
  std::vector<MatchSet> messages;
  std::uint64_t invocations = 0;
};

/// Maximal messages of one neighborhood. Candidates are the matcher's
/// candidate pairs minus M+ and minus match(C, M+) (pass it as `m_c` when
/// already known). Two candidates are linked when each is in the other's
/// match(C, M+ ∪ {p}); each connected component, singletons included, is
/// one message. Messages come out sorted.
MaximalResult compute_maximal(const Matcher& matcher, const EntitySet& members,
                              const MatchSet& found, const MatchSet* m_c = nullptr);

/// Merges overlapping messages until the pool is pairwise disjoint. The
/// result is sorted and does not depend on the input order.
std::vector<MatchSet> normalize(std::vector<MatchSet> messages);

/// Maximal message passing. Needs a Type-II matcher.
RunResult mmp(const ProbabilisticMatcher& matcher, const Cover& cover,
              const RunOptions& options = {});

/// Removes pairs already in `found` from every message and drops emptied
/// messages.
void prune_messages(std::vector<MatchSet>& pool, const FoundSet& found);

/// Repeatedly promotes the first pooled message (in sorted order) whose
/// score gain over `found` is non-negative. Returns the promoted pairs.
MatchSet promote(const ProbabilisticMatcher& matcher, std::vector<MatchSet>& pool,
                 FoundSet& found, std::uint64_t* promotions = nullptr,
                 std::ostream* trace = nullptr);

}  // namespace cem

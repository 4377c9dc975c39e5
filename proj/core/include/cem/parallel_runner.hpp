#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cem/message_passing.hpp"

namespace cem {

enum class Scheme { kNoMp, kSmp, kMmp };

/// "no-mp", "smp" or "mmp"; throws std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme scheme);

/// Which worker processes each active neighborhood in one round.
struct RoundPlan {
  std::size_t round = 0;
  /// Sorted active neighborhood ids.
  std::vector<std::size_t> active;
  /// worker_of[i] is the worker of active[i].
  std::vector<std::size_t> worker_of;
  std::size_t workers = 1;

  /// Largest worker load divided by the mean load (1 = perfect balance).
  double skew() const;
};

/// Seeded random assignment of neighborhoods to workers.
RoundPlan make_round_plan(std::size_t round, std::vector<std::size_t> active, std::size_t workers,
                          std::uint64_t seed);

struct RoundStats {
  std::size_t round = 0;
  std::size_t active = 0;
  std::size_t new_matches = 0;
  double wall_ms = 0;
  double skew = 1;
  std::uint64_t invocations = 0;
  std::size_t retries = 0;
};

struct ParallelOptions {
  std::size_t workers = 1;
  Scheme scheme = Scheme::kSmp;
  std::uint64_t seed = 0;
  Reactivation reactivation = Reactivation::kPairContainment;
  /// A failed round is re-run from its snapshot this many times.
  std::size_t max_retries = 2;
  /// Test hook called by a worker before each neighborhood; may throw.
  std::function<void(std::size_t round, std::size_t neighborhood)> before_task;
};

struct ParallelResult {
  MatchSet matches;
  std::vector<RoundStats> rounds;
  std::vector<std::uint64_t> visits;
  std::vector<std::uint64_t> invocations;
  std::uint64_t total_invocations = 0;
  std::uint64_t promotions = 0;
};

/// Barrier-synchronous rounds: every active neighborhood is matched against
/// the same frozen M+ (and message pool), results are merged by one
/// coordinator, and the next round's active set is derived from the round's
/// new pairs. MMP promotion runs once per barrier. Throws RunAborted when a
/// round keeps failing after max_retries, and std::invalid_argument for
/// MMP with a matcher that is not Type-II.
ParallelResult run_parallel(const Matcher& matcher, const Cover& cover,
                            const ParallelOptions& options);

/// round,active,new_matches,wall_ms,skew,invocations,retries
std::string round_stats_csv(const std::vector<RoundStats>& rounds);

}  // namespace cem

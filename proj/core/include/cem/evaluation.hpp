#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cem/covering.hpp"
#include "cem/matcher.hpp"

namespace cem {

/// Partition of (some of) the entities into real-world identities.
class GroundTruth {
 public:
  GroundTruth() = default;
  /// Throws std::invalid_argument when clusters overlap or mention an
  /// index >= entity_count. Entities in no cluster are unknown to the truth.
  GroundTruth(std::size_t entity_count, std::vector<std::vector<EntityIndex>> clusters);

  bool knows(EntityIndex e) const;
  /// Throws std::out_of_range for entities the truth does not know.
  bool same(EntityIndex a, EntityIndex b) const;
  const std::vector<std::vector<EntityIndex>>& clusters() const { return clusters_; }
  /// Every intra-cluster pair.
  MatchSet pairs() const;
  MatchSet pairs_within(const EntitySet& entities) const;
  std::uint64_t pair_count() const;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::vector<EntityIndex>> clusters_;
  std::vector<std::size_t> cluster_of_;
};

/// A ratio with its backing counts; 0/0 is reported as 1 and flagged.
struct Ratio {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;

  bool degenerate() const { return denominator == 0; }
  double value() const {
    return denominator == 0 ? 1.0
                            : static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

struct Prf {
  Ratio precision;
  Ratio recall;
  double f1() const;
};

/// A predicted pair is correct when both entities share a cluster. With
/// `close_first` the prediction is transitively closed before scoring.
/// Throws std::out_of_range for a pair mentioning an entity unknown to the truth.
Prf prf(const MatchSet& predicted, const GroundTruth& truth, bool close_first = false);

MatchSet transitive_closure(const MatchSet& pairs);

struct SoundCompleteness {
  Ratio soundness;
  Ratio completeness;
};

/// soundness = |out ∩ ref| / |out|, completeness = |out ∩ ref| / |ref|.
SoundCompleteness soundness_completeness(const MatchSet& out, const MatchSet& reference);

enum class UbScope {
  /// Each pair is decided inside its smallest containing neighborhood.
  kNeighborhood,
  /// Each pair is decided on the whole entity set.
  kGlobal,
};

struct UbResult {
  MatchSet matches;
  UbScope scope = UbScope::kNeighborhood;
  std::uint64_t invocations = 0;
  std::uint64_t candidates = 0;
};

/// The upper-bound scheme: a candidate pair p is kept when the matcher
/// declares it given every other true pair as positive evidence. With
/// kNeighborhood the candidates are those of the cover's neighborhoods; with
/// kGlobal, those over all entities (only feasible for small instances).
/// Throws std::invalid_argument unless the matcher is Type-II.
UbResult ub_matches(const Matcher& matcher, const Cover& cover, const GroundTruth& truth,
                    UbScope scope = UbScope::kNeighborhood);

struct MetricsReport {
  std::string scheme;
  std::size_t matches = 0;
  Prf quality;
  /// Against the holistic run, when one was feasible.
  bool has_holistic = false;
  SoundCompleteness vs_holistic;
  /// Against the upper-bound scheme, when it was computed.
  bool has_ub = false;
  UbScope ub_scope = UbScope::kNeighborhood;
  SoundCompleteness vs_ub;
  /// F1 of the upper bound, taking its recall with precision 1.
  double f1_upper_bound = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
std::string metrics_text(const MetricsReport& report);

}  // namespace cem

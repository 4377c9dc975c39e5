#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cem/instance.hpp"
#include "cem/matcher.hpp"
#include "cem/rule_set.hpp"

namespace cem {

/// One firing of a soft rule. It contributes `weight` to the score of S when
/// `head` is in S and the body Match pair (if any) is in S. A reflexive body
/// pair such as Match(d1,d1) always holds and is stored as `body = nullopt`.
///
/// Substitutions that differ only by orientation or by swapping the roles of
/// head and body pair describe the same link and are stored once.
struct GroundRule {
  std::uint32_t rule = 0;
  EntityPair head;
  std::optional<EntityPair> body;
  LogScore weight;
  /// Entities bound by the substitution, sorted.
  std::vector<EntityIndex> support;
  /// The mirrored substitution (body and head swapped) also exists, so the
  /// body pair is a rule head as well.
  bool body_is_head = false;

  friend bool operator==(const GroundRule&, const GroundRule&) = default;
};

struct Grounding {
  EntitySet scope;
  std::vector<GroundRule> rules;
  /// Pairs that are the head of at least one substitution.
  MatchSet heads;
  /// A hard transitivity rule is in force.
  bool transitive = false;
};

/// Grounds every rule over the entities `scope`, using only tuples whose
/// arguments lie in `scope`. Throws std::invalid_argument for a rule that
/// mentions a relation the instance does not declare.
Grounding ground(const RuleSetConfig& rules, const Instance& instance, const EntitySet& scope);

LogScore log_score(const std::vector<GroundRule>& groundings, const MatchSet& s);

struct MapOptions {
  /// Largest component (in free pairs) solved by exhaustive enumeration.
  /// Larger components are solved exactly by a minimum cut, which needs
  /// non-negative Match-to-Match weights; otherwise a greedy search is used
  /// and the result is flagged approximate.
  std::size_t exact_cap = 20;
};

struct MapResult {
  MatchSet matches;
  /// Some component went through the greedy path.
  bool approximate = false;
  std::size_t components = 0;
  std::size_t largest_component = 0;
};

/// MAP inference: the largest highest-scoring set containing V+ (restricted
/// to the candidate pairs and evidence) and avoiding V-. Pairs that are not
/// heads of any grounding stay false unless they are positive evidence.
/// Ties between equal-size maximizers go to the lexicographically least set.
///
/// With a hard transitivity rule only transitively closed sets are feasible;
/// the problem is not decomposed and InferenceError is thrown above
/// exact_cap or when V+ admits no feasible set.
MapResult map_infer(const Grounding& grounding, const Evidence& evidence,
                    const MapOptions& options = {});

/// Built-in weighted-rule matcher.
class MlnMatcher final : public ProbabilisticMatcher {
 public:
  MlnMatcher(std::shared_ptr<const Instance> instance, RuleSetConfig rules,
             MapOptions options = {});

  std::string_view name() const override { return "mln"; }
  const Instance& instance() const override { return *instance_; }
  MatchSet match(const EntitySet& entities, const Evidence& evidence) const override;
  std::vector<EntityPair> candidate_pairs(const EntitySet& entities) const override;

  /// Score over the whole instance. With a hard transitivity rule every
  /// violated closure triple costs kHardPenalty.
  LogScore log_score(const MatchSet& pairs) const override;
  LogScore score_gain(const MatchSet& base, const MatchSet& extra) const override;
  /// Pairs sharing a ground rule with p. Unknown (false) with transitivity.
  bool interacting_pairs(const EntityPair& p, std::vector<EntityPair>& out) const override;

  /// Same as match() but reports the inference path taken.
  MapResult infer(const EntitySet& entities, const Evidence& evidence) const;
  /// The groundings whose support lies inside `entities`; equal to
  /// ground(rules, instance, entities) up to order.
  Grounding local_grounding(const EntitySet& entities) const;

  const RuleSetConfig& rules() const { return rules_; }
  const Grounding& global_grounding() const { return global_; }

  std::uint64_t invocations() const { return invocations_.load(); }
  std::uint64_t approximate_runs() const { return approximate_.load(); }

  static constexpr LogScore kHardPenalty = LogScore::from_units(1'000'000'000'000'000LL);

 private:
  std::shared_ptr<const Instance> instance_;
  RuleSetConfig rules_;
  MapOptions options_;
  Grounding global_;
  /// Ground rule ids by the smallest entity of their support.
  std::vector<std::vector<std::uint32_t>> by_min_entity_;
  /// Ground rule ids touching each pair (as head or body).
  std::unordered_map<EntityPair, std::vector<std::uint32_t>, EntityPairHash> by_pair_;

  /// Process-unique, keys the per-thread grounding cache.
  std::uint64_t id_;
  mutable std::atomic<std::uint64_t> invocations_{0};
  mutable std::atomic<std::uint64_t> approximate_{0};
};

/// Factory used by the registry. Recognized keys: "rules" (preset name or
/// path, default "learned"), "exact_cap", "allow_unsafe" and the
/// "sim.level1..3" thresholds (only used by the preset loader).
std::unique_ptr<Matcher> make_mln_matcher(std::shared_ptr<const Instance> instance,
                                          const MatcherConfig& config);

}  // namespace cem

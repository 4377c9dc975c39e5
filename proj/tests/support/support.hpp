#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cem/covering.hpp"
#include "cem/instance.hpp"
#include "cem/rule_set.hpp"

namespace cem::testing {

/// Author-only instance shaped like the running example: entities fall into
/// name groups, same-group entities are Similar (random level), and Coauthor
/// edges connect different groups.
struct RandomSpec {
  std::size_t min_entities = 4;
  std::size_t max_entities = 12;
  double similar_probability = 0.7;
  /// Expected Coauthor edges per entity.
  double coauthor_degree = 1.2;
};

Instance random_instance(std::mt19937_64& rng, const RandomSpec& spec = {});

/// Random member sets (each entity in one or two of them) made total.
Cover random_cover(const Instance& instance, std::mt19937_64& rng, std::size_t max_neighborhoods = 4);

Instance running_example();
/// C1, C2, C3 as shipped in data/.
Cover running_example_cover(const Instance& instance);
std::vector<EntitySet> running_example_cover_sets(const Instance& instance);

/// Pairs spelled with ids: {"a1","a2"}, {"b1","b2"}, ...
MatchSet pairs_of(const Instance& instance, const std::vector<std::pair<std::string, std::string>>& ids);

/// Brute-force weighted-rule model written independently of the grounder:
/// every variable assignment over `scope` is tried, and firings are
/// deduplicated by (rule, unordered {head, body}, set of bound entities).
class OracleModel {
 public:
  OracleModel(const RuleSetConfig& rules, const Instance& instance, const EntitySet& scope);

  LogScore score(const MatchSet& s) const;
  /// Pairs that are the head of some substitution.
  const MatchSet& heads() const { return heads_; }
  /// Largest highest-scoring set containing V+ (inside the scope) and
  /// avoiding V-; ties go to the lexicographically least sorted sequence.
  MatchSet map(const MatchSet& positive, const MatchSet& negative) const;

  struct Firing {
    EntityPair head;
    bool has_body = false;
    EntityPair body;
    LogScore weight;
  };
  const std::vector<Firing>& firings() const { return firings_; }

 private:
  std::vector<Firing> firings_;
  MatchSet heads_;
  EntitySet scope_;
};

}  // namespace cem::testing

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cem/matcher.hpp"

namespace cem {

/// Inputs and outputs that reproduce a failed axiom check.
struct Counterexample {
  EntitySet entities;
  Evidence evidence;
  /// Second input of a two-input axiom (monotonicity), else empty.
  EntitySet other_entities;
  Evidence other_evidence;
  /// Supermodularity: the two nested sets.
  MatchSet s;
  MatchSet t;
  /// The pairs that witness the violation.
  MatchSet offending;
  std::string detail;
};

struct AxiomReport {
  std::string axiom;
  bool passed = true;
  /// Sub-checks, e.g. the three clauses of monotonicity.
  std::vector<AxiomReport> parts;
  std::optional<Counterexample> counterexample;
  /// Number of individual comparisons made.
  std::size_t checks = 0;

  /// One line per failing (sub-)check, with entity ids spelled out.
  std::string describe(const Instance& instance) const;
};

/// match(E, match(E, ev), V-) == match(E, ev).
AxiomReport check_idempotence(const Matcher& matcher, const EntitySet& entities,
                              const Evidence& evidence);

/// Clause (i) grows only E, clause (ii) only V+, clause (iii) only V-.
/// Throws std::invalid_argument unless the extended input contains the base.
AxiomReport check_monotonicity(const Matcher& matcher, const EntitySet& entities,
                               const Evidence& evidence, const EntitySet& ext_entities,
                               const Evidence& ext_evidence);

/// gain(T, p) >= gain(S, p) in log space. Throws std::invalid_argument
/// unless S is a subset of T.
AxiomReport check_supermodularity(const ProbabilisticMatcher& matcher, const MatchSet& s,
                                  const MatchSet& t, const EntityPair& p);

/// Every S ⊆ T ⊆ pairs(E) and every p over E. Throws std::invalid_argument
/// above 5 entities.
AxiomReport check_supermodularity_exhaustive(const ProbabilisticMatcher& matcher,
                                             const EntitySet& entities);

/// Monotonicity over all nested inputs on `entities`: clause (i) for every
/// E1 ⊆ E2 ⊆ E with no evidence, clause (ii) for every V+ and every one-pair
/// extension, clause (iii) likewise for V-. One-pair steps chain to every
/// superset. Throws std::invalid_argument above 5 entities.
AxiomReport check_monotonicity_exhaustive(const Matcher& matcher, const EntitySet& entities);

}  // namespace cem

#pragma once

#include <memory>

#include "cem/instance.hpp"
#include "cem/matcher.hpp"

namespace cem {

/// Hard-rule matcher evaluated to least fixpoint:
///
///     Similar(x,y,3)                                        => equals(x,y)
///     Similar(x,y,2), Coauthor(x,c1), Coauthor(y,c2),
///         equals(c1,c2)                                     => equals(x,y)
///     Similar(x,y,1), two distinct matched coauthor pairs   => equals(x,y)
///
/// interleaved with transitive closure. A shared coauthor (c1 = c2) counts
/// as a matched pair. The seed is V+ inside `entities`; V- pairs are never
/// derived, so the result need not be closed when V- cuts a chain.
MatchSet rules_match(const Instance& instance, const EntitySet& entities, const Evidence& evidence);

class RulesMatcher final : public Matcher {
 public:
  explicit RulesMatcher(std::shared_ptr<const Instance> instance);

  std::string_view name() const override { return "rules"; }
  const Instance& instance() const override { return *instance_; }
  MatchSet match(const EntitySet& entities, const Evidence& evidence) const override;
  /// Pairs inside one connected component of the Similar graph over `entities`.
  std::vector<EntityPair> candidate_pairs(const EntitySet& entities) const override;

 private:
  std::shared_ptr<const Instance> instance_;
};

std::unique_ptr<Matcher> make_rules_matcher(std::shared_ptr<const Instance> instance,
                                            const MatcherConfig& config);

}  // namespace cem

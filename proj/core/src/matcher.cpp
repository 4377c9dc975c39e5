#include "cem/matcher.hpp"

#include <bit>
#include <cstdint>

#include "cem/mln.hpp"
#include "cem/rules_matcher.hpp"

namespace cem {

std::vector<EntityPair> Matcher::candidate_pairs(const EntitySet& entities) const {
  std::vector<EntityPair> out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    for (std::size_t j = i + 1; j < entities.size(); ++j) {
      out.push_back(EntityPair{entities[i], entities[j]});
    }
  }
  return out;
}

LogScore ProbabilisticMatcher::score_gain(const MatchSet& base, const MatchSet& extra) const {
  return log_score(base.united(extra)) - log_score(base);
}

bool ProbabilisticMatcher::interacting_pairs(const EntityPair&, std::vector<EntityPair>&) const {
  return false;
}

const ProbabilisticMatcher* as_probabilistic(const Matcher& matcher) {
  return dynamic_cast<const ProbabilisticMatcher*>(&matcher);
}

MatchSet type2_match(const ProbabilisticMatcher& matcher, const EntitySet& entities,
                     const Evidence& evidence, std::size_t max_free_pairs) {
  MatchSet fixed = evidence.positive.restricted_to(entities);
  std::vector<EntityPair> free;
  for (const auto& p : matcher.candidate_pairs(entities)) {
    if (!fixed.contains(p) && !evidence.negative.contains(p)) free.push_back(p);
  }
  if (free.size() > max_free_pairs || free.size() >= 63) {
    throw InferenceError("type2_match: " + std::to_string(free.size()) +
                         " free pairs exceed the enumeration cap");
  }
  const std::uint64_t limit = std::uint64_t{1} << free.size();
  std::uint64_t best_mask = 0;
  LogScore best_score;
  bool have_best = false;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    MatchSet s = fixed;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (mask >> i & 1) s.insert(free[i]);
    }
    const LogScore score = matcher.log_score(s);
    bool better = !have_best || score > best_score;
    if (have_best && score == best_score) {
      const int pc = std::popcount(mask);
      const int best_pc = std::popcount(best_mask);
      if (pc != best_pc) {
        better = pc > best_pc;
      } else {
        // Equal size: the set owning the smallest differing pair sorts first.
        const std::uint64_t diff = mask ^ best_mask;
        better = (mask & (diff & (~diff + 1))) != 0;
      }
    }
    if (better) {
      best_mask = mask;
      best_score = score;
      have_best = true;
    }
  }
  MatchSet out = fixed;
  for (std::size_t i = 0; i < free.size(); ++i) {
    if (best_mask >> i & 1) out.insert(free[i]);
  }
  return out;
}

MatcherRegistry& MatcherRegistry::global() {
  static MatcherRegistry* registry = [] {
    auto* r = new MatcherRegistry;
    r->add("mln", make_mln_matcher);
    r->add("rules", make_rules_matcher);
    return r;
  }();
  return *registry;
}

void MatcherRegistry::add(std::string name, MatcherFactory factory) {
  std::lock_guard lock(mutex_);
  factories_[std::move(name)] = std::move(factory);
}

bool MatcherRegistry::contains(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return factories_.find(name) != factories_.end();
}

std::unique_ptr<Matcher> MatcherRegistry::create(std::string_view name,
                                                 std::shared_ptr<const Instance> instance,
                                                 const MatcherConfig& config) const {
  MatcherFactory factory;
  {
    std::lock_guard lock(mutex_);
    auto it = factories_.find(name);
    if (it == factories_.end()) {
      throw std::invalid_argument("unknown matcher '" + std::string(name) + "'");
    }
    factory = it->second;
  }
  return factory(std::move(instance), config);
}

std::vector<std::string> MatcherRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

}  // namespace cem

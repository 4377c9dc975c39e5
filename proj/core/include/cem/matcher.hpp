#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cem/instance.hpp"
#include "cem/model.hpp"
#include "cem/score.hpp"

namespace cem {

/// Raised when a matcher cannot produce an answer (for example an exact
/// inference problem over its size cap). Never silently approximated.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matcher plugin boundary.
///
/// A matcher is bound to one Instance and computes E(entities, V+, V-).
/// Implementations must be stateless between calls and callable from several
/// threads at once on different neighborhoods; instrumentation counters are
/// the only permitted mutable state.
///
/// Contract (Type-I): the result only contains pairs over `entities`,
/// contains every V+ pair inside `entities` and no V- pair. Evidence pairs
/// that reach outside `entities` are accepted and ignored.
class Matcher {
 public:
  virtual ~Matcher() = default;

  virtual std::string_view name() const = 0;
  virtual const Instance& instance() const = 0;
  virtual MatchSet match(const EntitySet& entities, const Evidence& evidence) const = 0;

  /// Pairs over `entities` that the matcher could ever declare without being
  /// told. The default is every pair; matchers narrow it when they can.
  virtual std::vector<EntityPair> candidate_pairs(const EntitySet& entities) const;
};

/// Type-II matcher: additionally exposes the log of its unnormalized
/// distribution over match sets of the whole instance.
class ProbabilisticMatcher : public Matcher {
 public:
  virtual LogScore log_score(const MatchSet& pairs) const = 0;

  /// log_score(base U extra) - log_score(base). Matchers override this with
  /// a local computation.
  virtual LogScore score_gain(const MatchSet& base, const MatchSet& extra) const;

  /// Appends every pair q whose presence in the base can change
  /// score_gain(base, {p}). Returns false when the matcher cannot tell; callers
  /// must then assume that every pair interacts with p.
  virtual bool interacting_pairs(const EntityPair& p, std::vector<EntityPair>& out) const;
};

/// nullptr unless the matcher is Type-II.
const ProbabilisticMatcher* as_probabilistic(const Matcher& matcher);

/// Reference Type-II semantics for any probabilistic matcher: the largest
/// most-likely set containing V+ and avoiding V-, ties among equal-size sets
/// going to the lexicographically least pair sequence. Enumerates every
/// subset of the free candidate pairs, so it throws InferenceError above
/// `max_free_pairs`.
MatchSet type2_match(const ProbabilisticMatcher& matcher, const EntitySet& entities,
                     const Evidence& evidence, std::size_t max_free_pairs = 20);

/// Key=value options handed to matcher factories (from --config files).
using MatcherConfig = std::map<std::string, std::string, std::less<>>;

using MatcherFactory = std::function<std::unique_ptr<Matcher>(std::shared_ptr<const Instance>,
                                                              const MatcherConfig&)>;

/// Name -> factory table used by the CLI. "mln" and "rules" are built in;
/// third-party matchers register themselves with add().
class MatcherRegistry {
 public:
  static MatcherRegistry& global();

  void add(std::string name, MatcherFactory factory);
  bool contains(std::string_view name) const;
  std::unique_ptr<Matcher> create(std::string_view name, std::shared_ptr<const Instance> instance,
                                  const MatcherConfig& config = {}) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, MatcherFactory, std::less<>> factories_;
};

}  // namespace cem

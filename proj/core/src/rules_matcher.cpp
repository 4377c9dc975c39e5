#include "cem/rules_matcher.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "cem/union_find.hpp"

namespace cem {
namespace {

class Fixpoint {
 public:
  Fixpoint(const Instance& instance, const EntitySet& entities, const MatchSet& blocked)
      : instance_(instance), entities_(entities), blocked_(blocked) {}

  void seed(const MatchSet& pairs) {
    for (const auto& p : pairs) add(p);
  }

  void run() {
    bool changed = true;
    while (changed) {
      changed = apply_rules();
      changed |= close();
    }
  }

  MatchSet result() const {
    std::vector<EntityPair> out;
    for (const auto& [e, list] : partners_) {
      for (EntityIndex o : list) {
        if (e < o) out.push_back(EntityPair{e, o});
      }
    }
    return MatchSet(std::move(out));
  }

 private:
  bool has(EntityIndex a, EntityIndex b) const {
    auto it = partners_.find(a);
    return it != partners_.end() && it->second.count(b) != 0;
  }

  bool add(const EntityPair& p) {
    if (blocked_.contains(p) || has(p.lo, p.hi)) return false;
    partners_[p.lo].insert(p.hi);
    partners_[p.hi].insert(p.lo);
    return true;
  }

  std::size_t matched_coauthor_pairs(EntityIndex x, EntityIndex y, std::size_t enough) const {
    std::set<std::pair<EntityIndex, EntityIndex>> found;
    for (EntityIndex c1 : instance_.out_neighbors(rel::kCoauthor, x)) {
      if (!entities_.contains(c1)) continue;
      for (EntityIndex c2 : instance_.out_neighbors(rel::kCoauthor, y)) {
        if (!entities_.contains(c2)) continue;
        if (c1 == c2 || has(c1, c2)) {
          found.insert(std::minmax(c1, c2));
          if (found.size() >= enough) return found.size();
        }
      }
    }
    return found.size();
  }

  bool apply_rules() {
    bool changed = false;
    for (EntityIndex x : entities_) {
      for (EntityIndex y : instance_.out_neighbors(rel::kSimilar, x)) {
        if (y <= x || !entities_.contains(y) || has(x, y)) continue;
        const EntityPair p{x, y};
        if (blocked_.contains(p)) continue;
        const int level = instance_.similar_level(p);
        const bool fire = level >= 3 ||
                          (level == 2 && matched_coauthor_pairs(x, y, 1) >= 1) ||
                          (level == 1 && matched_coauthor_pairs(x, y, 2) >= 2);
        if (fire) changed |= add(p);
      }
    }
    return changed;
  }

  // Transitive closure that never derives a blocked pair.
  bool close() {
    bool changed = false;
    bool again = true;
    while (again) {
      again = false;
      std::vector<EntityPair> fresh;
      for (const auto& [b, list] : partners_) {
        const std::vector<EntityIndex> around(list.begin(), list.end());
        for (std::size_t i = 0; i < around.size(); ++i) {
          for (std::size_t j = i + 1; j < around.size(); ++j) {
            if (!has(around[i], around[j])) fresh.push_back(EntityPair{around[i], around[j]});
          }
        }
      }
      for (const auto& p : fresh) {
        if (add(p)) again = changed = true;
      }
    }
    return changed;
  }

  const Instance& instance_;
  const EntitySet& entities_;
  const MatchSet& blocked_;
  std::map<EntityIndex, std::set<EntityIndex>> partners_;
};

}  // namespace

MatchSet rules_match(const Instance& instance, const EntitySet& entities, const Evidence& evidence) {
  for (EntityIndex e : entities) {
    if (e >= instance.size()) throw std::out_of_range("neighborhood mentions unknown entity");
  }
  Fixpoint fp(instance, entities, evidence.negative);
  fp.seed(evidence.positive.restricted_to(entities));
  fp.run();
  return fp.result();
}

RulesMatcher::RulesMatcher(std::shared_ptr<const Instance> instance)
    : instance_(std::move(instance)) {
  if (!instance_) throw std::invalid_argument("rules matcher needs an instance");
}

MatchSet RulesMatcher::match(const EntitySet& entities, const Evidence& evidence) const {
  return rules_match(*instance_, entities, evidence);
}

std::vector<EntityPair> RulesMatcher::candidate_pairs(const EntitySet& entities) const {
  UnionFind uf(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    for (EntityIndex y : instance_->out_neighbors(rel::kSimilar, entities[i])) {
      auto it = std::lower_bound(entities.begin(), entities.end(), y);
      if (it != entities.end() && *it == y) {
        uf.unite(i, static_cast<std::size_t>(it - entities.begin()));
      }
    }
  }
  std::vector<EntityPair> out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    for (std::size_t j = i + 1; j < entities.size(); ++j) {
      if (uf.find(i) == uf.find(j)) out.push_back(EntityPair{entities[i], entities[j]});
    }
  }
  return out;
}

std::unique_ptr<Matcher> make_rules_matcher(std::shared_ptr<const Instance> instance,
                                            const MatcherConfig&) {
  return std::make_unique<RulesMatcher>(std::move(instance));
}

}  // namespace cem

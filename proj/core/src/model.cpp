#include "cem/model.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace cem {

EntityPair EntityPair::make(EntityIndex a, EntityIndex b) {
  if (a == b) {
    throw std::invalid_argument("reflexive entity pair");
  }
  return a < b ? EntityPair{a, b} : EntityPair{b, a};
}

EntitySet::EntitySet(std::vector<EntityIndex> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

EntitySet::EntitySet(std::initializer_list<EntityIndex> members)
    : EntitySet(std::vector<EntityIndex>(members)) {}

bool EntitySet::contains(EntityIndex e) const {
  return std::binary_search(members_.begin(), members_.end(), e);
}

bool EntitySet::is_subset_of(const EntitySet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                       members_.end());
}

EntitySet EntitySet::united(const EntitySet& other) const {
  EntitySet out;
  out.members_.reserve(members_.size() + other.members_.size());
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(out.members_));
  return out;
}

MatchSet::MatchSet(std::vector<EntityPair> pairs) : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

MatchSet::MatchSet(std::initializer_list<EntityPair> pairs)
    : MatchSet(std::vector<EntityPair>(pairs)) {}

bool MatchSet::contains(const EntityPair& p) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), p);
}

bool MatchSet::insert(const EntityPair& p) {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
  if (it != pairs_.end() && *it == p) return false;
  pairs_.insert(it, p);
  return true;
}

bool MatchSet::erase(const EntityPair& p) {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
  if (it == pairs_.end() || *it != p) return false;
  pairs_.erase(it);
  return true;
}

void MatchSet::unite_with(const MatchSet& other) {
  if (other.empty()) return;
  if (std::includes(pairs_.begin(), pairs_.end(), other.pairs_.begin(), other.pairs_.end())) {
    return;
  }
  *this = united(other);
}

MatchSet MatchSet::united(const MatchSet& other) const {
  MatchSet out;
  out.pairs_.reserve(pairs_.size() + other.pairs_.size());
  std::set_union(pairs_.begin(), pairs_.end(), other.pairs_.begin(), other.pairs_.end(),
                 std::back_inserter(out.pairs_));
  return out;
}

MatchSet MatchSet::intersected(const MatchSet& other) const {
  MatchSet out;
  std::set_intersection(pairs_.begin(), pairs_.end(), other.pairs_.begin(), other.pairs_.end(),
                        std::back_inserter(out.pairs_));
  return out;
}

MatchSet MatchSet::minus(const MatchSet& other) const {
  MatchSet out;
  std::set_difference(pairs_.begin(), pairs_.end(), other.pairs_.begin(), other.pairs_.end(),
                      std::back_inserter(out.pairs_));
  return out;
}

bool MatchSet::is_subset_of(const MatchSet& other) const {
  return std::includes(other.pairs_.begin(), other.pairs_.end(), pairs_.begin(), pairs_.end());
}

bool MatchSet::intersects(const MatchSet& other) const {
  auto a = pairs_.begin();
  auto b = other.pairs_.begin();
  while (a != pairs_.end() && b != other.pairs_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      return true;
    }
  }
  return false;
}

MatchSet MatchSet::restricted_to(const EntitySet& entities) const {
  MatchSet out;
  for (const auto& p : pairs_) {
    if (entities.contains_pair(p)) out.pairs_.push_back(p);
  }
  return out;
}

Evidence::Evidence(MatchSet pos, MatchSet neg) : positive(std::move(pos)), negative(std::move(neg)) {
  if (positive.intersects(negative)) {
    throw std::invalid_argument("positive and negative evidence overlap");
  }
}

}  // namespace cem

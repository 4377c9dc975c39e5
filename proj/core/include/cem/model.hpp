#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace cem {

/// Dense index of an entity inside an Instance. Index order equals the
/// lexicographic order of the entity ids, so comparing indices compares ids.
using EntityIndex = std::uint32_t;

/// Canonical unordered pair of two distinct entities, `lo < hi`.
/// Reflexive pairs are never materialized.
struct EntityPair {
  EntityIndex lo = 0;
  EntityIndex hi = 1;

  /// Throws std::invalid_argument when `a == b`.
  static EntityPair make(EntityIndex a, EntityIndex b);

  bool touches(EntityIndex e) const { return lo == e || hi == e; }
  std::uint64_t key() const { return (std::uint64_t{lo} << 32) | hi; }

  friend auto operator<=>(const EntityPair&, const EntityPair&) = default;
};

struct EntityPairHash {
  std::size_t operator()(const EntityPair& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.key() * 0x9E3779B97F4A7C15ULL);
  }
};

/// Sorted, duplicate-free set of entity indices.
class EntitySet {
 public:
  EntitySet() = default;
  explicit EntitySet(std::vector<EntityIndex> members);
  EntitySet(std::initializer_list<EntityIndex> members);

  bool contains(EntityIndex e) const;
  bool contains_pair(const EntityPair& p) const { return contains(p.lo) && contains(p.hi); }
  bool is_subset_of(const EntitySet& other) const;

  EntitySet united(const EntitySet& other) const;

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  EntityIndex operator[](std::size_t i) const { return members_[i]; }
  std::span<const EntityIndex> view() const { return members_; }
  const std::vector<EntityIndex>& members() const { return members_; }

  friend bool operator==(const EntitySet&, const EntitySet&) = default;

 private:
  std::vector<EntityIndex> members_;
};

/// A set of canonical pairs, kept sorted. Iteration order is the
/// lexicographic order of (lo, hi), which is also the tie-break order used
/// by MAP inference.
class MatchSet {
 public:
  MatchSet() = default;
  explicit MatchSet(std::vector<EntityPair> pairs);
  MatchSet(std::initializer_list<EntityPair> pairs);

  bool contains(const EntityPair& p) const;
  /// Returns true when the pair was not present before.
  bool insert(const EntityPair& p);
  bool erase(const EntityPair& p);

  void unite_with(const MatchSet& other);
  MatchSet united(const MatchSet& other) const;
  MatchSet intersected(const MatchSet& other) const;
  MatchSet minus(const MatchSet& other) const;
  bool is_subset_of(const MatchSet& other) const;
  bool intersects(const MatchSet& other) const;

  /// Pairs whose both endpoints are in `entities`.
  MatchSet restricted_to(const EntitySet& entities) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  const std::vector<EntityPair>& pairs() const { return pairs_; }

  friend bool operator==(const MatchSet&, const MatchSet&) = default;

 private:
  std::vector<EntityPair> pairs_;
};

/// Positive (V+) and negative (V-) evidence. The two sets are disjoint.
struct Evidence {
  MatchSet positive;
  MatchSet negative;

  Evidence() = default;
  /// Throws std::invalid_argument when the sets overlap.
  explicit Evidence(MatchSet pos, MatchSet neg = {});
};

}  // namespace cem

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cem/model.hpp"

namespace cem {

/// Names of the relations the built-in matchers and covers understand.
namespace rel {
inline constexpr std::string_view kSimilar = "Similar";
inline constexpr std::string_view kCoauthor = "Coauthor";
inline constexpr std::string_view kCites = "Cites";
inline constexpr std::string_view kAuthored = "Authored";

/// Similar and Coauthor are symmetric and stored once, canonically ordered.
bool is_symmetric(std::string_view relation);
}  // namespace rel

struct Entity {
  std::string id;
  std::string kind;
  std::map<std::string, std::string> attributes;

  /// nullptr when the attribute is absent.
  const std::string* attribute(std::string_view name) const;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// One relation tuple. `level` is only meaningful for Similar (1..3); it is
/// 0 for every other relation.
struct Tuple {
  std::vector<EntityIndex> args;
  int level = 0;

  bool within(const EntitySet& entities) const;
  friend auto operator<=>(const Tuple&, const Tuple&) = default;
};

struct Relation {
  std::string name;
  std::vector<Tuple> tuples;

  friend bool operator==(const Relation&, const Relation&) = default;
};

/// Named relations over entity indices. Relations are kept sorted by name
/// and their tuples sorted and duplicate-free once normalize() has run.
class RelationStore {
 public:
  /// Appends a tuple; symmetric binary relations are canonicalized.
  /// Call normalize() after a batch of adds.
  void add(std::string_view relation, std::vector<EntityIndex> args, int level = 0);
  /// Makes sure a (possibly empty) relation with this name exists.
  void declare(std::string_view relation);
  /// Sorts and deduplicates. Throws std::invalid_argument on a Similar pair
  /// recorded with two different levels.
  void normalize();

  const std::vector<Relation>& relations() const { return relations_; }
  const Relation* find(std::string_view relation) const;
  std::span<const Tuple> tuples(std::string_view relation) const;
  std::size_t tuple_count() const;

  friend bool operator==(const RelationStore&, const RelationStore&) = default;

 private:
  Relation& relation(std::string_view name);

  std::vector<Relation> relations_;
};

/// An entity-matching instance: entities plus relations over them.
/// Immutable once built and safe to share across threads.
class Instance {
 public:
  class Builder {
   public:
    Builder& add_entity(Entity entity);
    Builder& add_tuple(std::string_view relation, std::vector<std::string> ids, int level = 0);
    Builder& declare_relation(std::string_view relation);
    /// Throws std::invalid_argument on duplicate ids or tuples that mention
    /// unknown entities.
    Instance build() &&;

   private:
    struct PendingTuple {
      std::string relation;
      std::vector<std::string> ids;
      int level = 0;
    };
    std::vector<Entity> entities_;
    std::vector<PendingTuple> tuples_;
    std::vector<std::string> declared_;
  };

  Instance() = default;

  std::size_t size() const { return entities_.size(); }
  const Entity& entity(EntityIndex e) const { return entities_.at(e); }
  const std::vector<Entity>& entities() const { return entities_; }
  const std::string& id(EntityIndex e) const { return entities_.at(e).id; }
  std::optional<EntityIndex> find(std::string_view id) const;
  /// Throws std::out_of_range for unknown ids.
  EntityIndex index_of(std::string_view id) const;
  /// Canonical pair from two ids. Throws on unknown or identical ids.
  EntityPair pair(std::string_view a, std::string_view b) const;
  EntitySet entity_set(std::span<const std::string> ids) const;

  EntitySet all_entities() const;
  EntitySet entities_of_kind(std::string_view kind) const;

  const RelationStore& relations() const { return relations_; }

  /// Partners of `e` in a binary relation, following the tuple direction
  /// args[0] -> args[1]. For symmetric relations both directions coincide.
  std::span<const EntityIndex> out_neighbors(std::string_view relation, EntityIndex e) const;
  std::span<const EntityIndex> in_neighbors(std::string_view relation, EntityIndex e) const;
  /// Every entity sharing any tuple with `e`, excluding `e` itself.
  std::span<const EntityIndex> co_occurring(EntityIndex e) const;
  /// Tuples mentioning `e`, as (relation position, tuple position).
  struct TupleRef {
    std::uint32_t relation;
    std::uint32_t tuple;
  };
  std::span<const TupleRef> incident(EntityIndex e) const;

  /// Discretized similarity level of a pair, 0 when there is no Similar tuple.
  int similar_level(const EntityPair& p) const;

  /// A new instance with the same entities and these tuples added.
  Instance with_tuples(const RelationStore& extra) const;

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_;
  }

 private:
  void build_indexes();

  std::vector<Entity> entities_;
  std::unordered_map<std::string, EntityIndex> by_id_;
  RelationStore relations_;

  struct Adjacency {
    std::vector<std::vector<EntityIndex>> out;
    std::vector<std::vector<EntityIndex>> in;
  };
  std::map<std::string, Adjacency, std::less<>> adjacency_;
  std::vector<std::vector<EntityIndex>> co_occurring_;
  std::vector<std::vector<TupleRef>> incident_;
  std::unordered_map<std::uint64_t, int> similar_levels_;
};

/// R(C): every tuple of the store whose entities all lie in `members`.
RelationStore induced_relations(const RelationStore& store, const EntitySet& members);

/// Same as above, validating `members` against the instance and using the
/// incidence index. Throws std::out_of_range for indices outside the instance.
RelationStore induced_relations(const Instance& instance, const EntitySet& members);

}  // namespace cem

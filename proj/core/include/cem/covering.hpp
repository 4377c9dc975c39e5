#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cem/instance.hpp"

namespace cem {

struct Neighborhood {
  std::size_t id = 0;
  EntitySet members;
  /// R(members), kept in sync by the functions below.
  RelationStore induced;
};

struct Cover {
  std::vector<Neighborhood> neighborhoods;
  /// Set by verify_total() through make_cover()/make_total(); never assumed.
  bool total = false;

  std::size_t size() const { return neighborhoods.size(); }
  std::size_t max_neighborhood() const;
  /// Neighborhood ids containing each entity.
  std::vector<std::vector<std::size_t>> membership(std::size_t entity_count) const;
};

/// Builds a cover from member lists, computing induced relations and the
/// totality flag. Throws std::invalid_argument when the members do not union
/// to every entity of the instance.
Cover make_cover(const Instance& instance, std::vector<EntitySet> members);

using SimilarityFn = std::function<double(EntityIndex, EntityIndex)>;

/// Two-threshold canopy clustering. Seeds are taken in index (id) order from
/// the pool; a canopy holds every entity with similarity >= loose to the
/// seed, and those with similarity >= tight leave the pool. Only `entities`
/// are clustered; the result is a list of member sets, not yet a Cover.
/// Throws std::invalid_argument unless 0 <= loose <= tight <= 1.
std::vector<EntitySet> canopy_cover(const EntitySet& entities, const SimilarityFn& similarity,
                                    double loose, double tight);

/// Canopies over author entities using Jaro-Winkler on their lowercase names.
/// Skips pairs whose length bound already rules them out.
std::vector<EntitySet> author_canopies(const Instance& instance, const EntitySet& authors,
                                       double loose, double tight);

/// Entities sharing a tuple with some member, excluding the members.
EntitySet boundary(const EntitySet& members, const Instance& instance);

struct TotalityReport {
  bool total = true;
  struct Missing {
    std::string relation;
    Tuple tuple;
  };
  std::vector<Missing> missing;
};

/// Every tuple of the instance must lie inside some neighborhood.
TotalityReport verify_total(const Cover& cover, const Instance& instance);

/// Adds each neighborhood's boundary once. Throws std::logic_error if the
/// result is still not total (impossible for binary relations).
Cover make_total(const Cover& cover, const Instance& instance);

}  // namespace cem

#include "cem/covering.hpp"

#include <algorithm>
#include <stdexcept>

#include "cem/similarity.hpp"

namespace cem {

std::size_t Cover::max_neighborhood() const {
  std::size_t k = 0;
  for (const auto& n : neighborhoods) k = std::max(k, n.members.size());
  return k;
}

std::vector<std::vector<std::size_t>> Cover::membership(std::size_t entity_count) const {
  std::vector<std::vector<std::size_t>> out(entity_count);
  for (const auto& n : neighborhoods) {
    for (EntityIndex e : n.members) {
      if (e >= entity_count) throw std::out_of_range("cover mentions unknown entity");
      out[e].push_back(n.id);
    }
  }
  return out;
}

Cover make_cover(const Instance& instance, std::vector<EntitySet> members) {
  Cover cover;
  std::vector<char> seen(instance.size(), 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    Neighborhood n;
    n.id = i;
    n.induced = induced_relations(instance, members[i]);
    for (EntityIndex e : members[i]) seen[e] = 1;
    n.members = std::move(members[i]);
    cover.neighborhoods.push_back(std::move(n));
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("neighborhoods do not cover every entity");
  }
  cover.total = verify_total(cover, instance).total;
  return cover;
}

std::vector<EntitySet> canopy_cover(const EntitySet& entities, const SimilarityFn& similarity,
                                    double loose, double tight) {
  if (!(0.0 <= loose && loose <= tight && tight <= 1.0)) {
    throw std::invalid_argument("canopy thresholds need 0 <= loose <= tight <= 1");
  }
  std::vector<char> in_pool(entities.size(), 1);
  std::vector<EntitySet> out;
  for (std::size_t s = 0; s < entities.size(); ++s) {
    if (!in_pool[s]) continue;
    in_pool[s] = 0;
    std::vector<EntityIndex> canopy;
    for (std::size_t j = 0; j < entities.size(); ++j) {
      if (j == s) {
        canopy.push_back(entities[j]);
        continue;
      }
      const double sim = similarity(entities[s], entities[j]);
      if (sim >= loose) canopy.push_back(entities[j]);
      if (sim >= tight) in_pool[j] = 0;
    }
    out.emplace_back(std::move(canopy));
  }
  return out;
}

std::vector<EntitySet> author_canopies(const Instance& instance, const EntitySet& authors,
                                       double loose, double tight) {
  std::vector<std::string> names(instance.size());
  std::vector<CharProfile> profiles(instance.size());
  for (EntityIndex a : authors) {
    names[a] = author_name(instance.entity(a));
    profiles[a] = CharProfile(names[a]);
  }
  return canopy_cover(
      authors,
      [&](EntityIndex a, EntityIndex b) {
        const auto& na = names[a];
        const auto& nb = names[b];
        if (jaro_winkler_bound(profiles[a], profiles[b]) < loose) return 0.0;
        return na <= nb ? jaro_winkler(na, nb) : jaro_winkler(nb, na);
      },
      loose, tight);
}

EntitySet boundary(const EntitySet& members, const Instance& instance) {
  std::vector<EntityIndex> out;
  for (EntityIndex e : members) {
    for (EntityIndex o : instance.co_occurring(e)) {
      if (!members.contains(o)) out.push_back(o);
    }
  }
  return EntitySet(std::move(out));
}

TotalityReport verify_total(const Cover& cover, const Instance& instance) {
  const auto member_of = cover.membership(instance.size());
  TotalityReport report;
  for (const auto& relation : instance.relations().relations()) {
    for (const auto& tuple : relation.tuples) {
      bool inside = false;
      for (std::size_t id : member_of[tuple.args.front()]) {
        if (tuple.within(cover.neighborhoods[id].members)) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        report.total = false;
        report.missing.push_back({relation.name, tuple});
      }
    }
  }
  return report;
}

Cover make_total(const Cover& cover, const Instance& instance) {
  std::vector<EntitySet> grown;
  grown.reserve(cover.size());
  for (const auto& n : cover.neighborhoods) {
    grown.push_back(n.members.united(boundary(n.members, instance)));
  }
  Cover out = make_cover(instance, std::move(grown));
  if (!out.total) throw std::logic_error("cover is not total after boundary expansion");
  return out;
}

}  // namespace cem

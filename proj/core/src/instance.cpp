#include "cem/instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace cem {

namespace rel {
bool is_symmetric(std::string_view relation) {
  return relation == kSimilar || relation == kCoauthor;
}
}  // namespace rel

const std::string* Entity::attribute(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

bool Tuple::within(const EntitySet& entities) const {
  return std::all_of(args.begin(), args.end(), [&](EntityIndex e) { return entities.contains(e); });
}

Relation& RelationStore::relation(std::string_view name) {
  auto it = std::lower_bound(relations_.begin(), relations_.end(), name,
                             [](const Relation& r, std::string_view n) { return r.name < n; });
  if (it == relations_.end() || it->name != name) {
    it = relations_.insert(it, Relation{std::string(name), {}});
  }
  return *it;
}

void RelationStore::add(std::string_view relation_name, std::vector<EntityIndex> args, int level) {
  if (args.size() < 2) {
    throw std::invalid_argument("relation tuples need arity >= 2: " + std::string(relation_name));
  }
  if (rel::is_symmetric(relation_name)) {
    if (args.size() != 2) {
      throw std::invalid_argument(std::string(relation_name) + " is binary");
    }
    if (args[0] == args[1]) {
      throw std::invalid_argument(std::string(relation_name) + " tuple is reflexive");
    }
    if (args[1] < args[0]) std::swap(args[0], args[1]);
  }
  if (relation_name == rel::kSimilar) {
    if (level < 1 || level > 3) {
      throw std::invalid_argument("Similar level must be in {1,2,3}");
    }
  } else {
    level = 0;
  }
  relation(relation_name).tuples.push_back(Tuple{std::move(args), level});
}

void RelationStore::declare(std::string_view relation_name) { relation(relation_name); }

void RelationStore::normalize() {
  for (auto& r : relations_) {
    auto& ts = r.tuples;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i - 1].args == ts[i].args) {
        throw std::invalid_argument(r.name + " tuple recorded with conflicting levels");
      }
    }
  }
}

const Relation* RelationStore::find(std::string_view name) const {
  auto it = std::lower_bound(relations_.begin(), relations_.end(), name,
                             [](const Relation& r, std::string_view n) { return r.name < n; });
  return it == relations_.end() || it->name != name ? nullptr : &*it;
}

std::span<const Tuple> RelationStore::tuples(std::string_view name) const {
  const Relation* r = find(name);
  return r ? std::span<const Tuple>(r->tuples) : std::span<const Tuple>();
}

std::size_t RelationStore::tuple_count() const {
  std::size_t n = 0;
  for (const auto& r : relations_) n += r.tuples.size();
  return n;
}

Instance::Builder& Instance::Builder::add_entity(Entity entity) {
  entities_.push_back(std::move(entity));
  return *this;
}

Instance::Builder& Instance::Builder::add_tuple(std::string_view relation,
                                                std::vector<std::string> ids, int level) {
  tuples_.push_back(PendingTuple{std::string(relation), std::move(ids), level});
  return *this;
}

Instance::Builder& Instance::Builder::declare_relation(std::string_view relation) {
  declared_.emplace_back(relation);
  return *this;
}

Instance Instance::Builder::build() && {
  Instance out;
  out.entities_ = std::move(entities_);
  std::sort(out.entities_.begin(), out.entities_.end(),
            [](const Entity& a, const Entity& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < out.entities_.size(); ++i) {
    const auto& e = out.entities_[i];
    if (e.id.empty()) throw std::invalid_argument("entity with empty id");
    if (!out.by_id_.emplace(e.id, static_cast<EntityIndex>(i)).second) {
      throw std::invalid_argument("duplicate entity id: " + e.id);
    }
  }
  for (const auto& name : declared_) out.relations_.declare(name);
  for (auto& t : tuples_) {
    std::vector<EntityIndex> args;
    args.reserve(t.ids.size());
    for (const auto& id : t.ids) {
      auto it = out.by_id_.find(id);
      if (it == out.by_id_.end()) {
        throw std::invalid_argument(t.relation + " tuple mentions unknown entity: " + id);
      }
      args.push_back(it->second);
    }
    out.relations_.add(t.relation, std::move(args), t.level);
  }
  out.relations_.normalize();
  out.build_indexes();
  return out;
}

void Instance::build_indexes() {
  const std::size_t n = entities_.size();
  adjacency_.clear();
  co_occurring_.assign(n, {});
  incident_.assign(n, {});
  similar_levels_.clear();
  const auto& rels = relations_.relations();
  for (std::uint32_t r = 0; r < rels.size(); ++r) {
    const auto& relation = rels[r];
    auto& adj = adjacency_[relation.name];
    adj.out.assign(n, {});
    adj.in.assign(n, {});
    const bool symmetric = rel::is_symmetric(relation.name);
    for (std::uint32_t t = 0; t < relation.tuples.size(); ++t) {
      const auto& tuple = relation.tuples[t];
      for (EntityIndex e : tuple.args) {
        incident_[e].push_back(TupleRef{r, t});
        for (EntityIndex other : tuple.args) {
          if (other != e) co_occurring_[e].push_back(other);
        }
      }
      if (tuple.args.size() == 2) {
        EntityIndex a = tuple.args[0];
        EntityIndex b = tuple.args[1];
        adj.out[a].push_back(b);
        adj.in[b].push_back(a);
        if (symmetric) {
          adj.out[b].push_back(a);
          adj.in[a].push_back(b);
        }
      }
      if (relation.name == rel::kSimilar) {
        similar_levels_[EntityPair::make(tuple.args[0], tuple.args[1]).key()] = tuple.level;
      }
    }
    for (auto& v : adj.out) std::sort(v.begin(), v.end());
    for (auto& v : adj.in) std::sort(v.begin(), v.end());
  }
  for (auto& v : co_occurring_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

std::optional<EntityIndex> Instance::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

EntityIndex Instance::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) throw std::out_of_range("unknown entity id: " + std::string(id));
  return *found;
}

EntityPair Instance::pair(std::string_view a, std::string_view b) const {
  return EntityPair::make(index_of(a), index_of(b));
}

EntitySet Instance::entity_set(std::span<const std::string> ids) const {
  std::vector<EntityIndex> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(index_of(id));
  return EntitySet(std::move(out));
}

EntitySet Instance::all_entities() const {
  std::vector<EntityIndex> out(entities_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<EntityIndex>(i);
  return EntitySet(std::move(out));
}

EntitySet Instance::entities_of_kind(std::string_view kind) const {
  std::vector<EntityIndex> out;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].kind == kind) out.push_back(static_cast<EntityIndex>(i));
  }
  return EntitySet(std::move(out));
}

std::span<const EntityIndex> Instance::out_neighbors(std::string_view relation,
                                                     EntityIndex e) const {
  auto it = adjacency_.find(relation);
  if (it == adjacency_.end()) return {};
  return it->second.out.at(e);
}

std::span<const EntityIndex> Instance::in_neighbors(std::string_view relation,
                                                    EntityIndex e) const {
  auto it = adjacency_.find(relation);
  if (it == adjacency_.end()) return {};
  return it->second.in.at(e);
}

std::span<const EntityIndex> Instance::co_occurring(EntityIndex e) const {
  return co_occurring_.at(e);
}

std::span<const Instance::TupleRef> Instance::incident(EntityIndex e) const {
  return incident_.at(e);
}

int Instance::similar_level(const EntityPair& p) const {
  auto it = similar_levels_.find(p.key());
  return it == similar_levels_.end() ? 0 : it->second;
}

Instance Instance::with_tuples(const RelationStore& extra) const {
  Instance out;
  out.entities_ = entities_;
  out.by_id_ = by_id_;
  out.relations_ = relations_;
  for (const auto& r : extra.relations()) {
    out.relations_.declare(r.name);
    for (const auto& t : r.tuples) {
      for (EntityIndex e : t.args) {
        if (e >= entities_.size()) throw std::out_of_range("tuple mentions unknown entity index");
      }
      out.relations_.add(r.name, t.args, t.level);
    }
  }
  out.relations_.normalize();
  out.build_indexes();
  return out;
}

RelationStore induced_relations(const RelationStore& store, const EntitySet& members) {
  RelationStore out;
  for (const auto& r : store.relations()) {
    out.declare(r.name);
    for (const auto& t : r.tuples) {
      if (t.within(members)) out.add(r.name, t.args, t.level);
    }
  }
  out.normalize();
  return out;
}

RelationStore induced_relations(const Instance& instance, const EntitySet& members) {
  for (EntityIndex e : members) {
    if (e >= instance.size()) throw std::out_of_range("neighborhood mentions unknown entity");
  }
  const auto& rels = instance.relations().relations();
  std::vector<std::vector<std::uint32_t>> picked(rels.size());
  for (EntityIndex e : members) {
    for (const auto& ref : instance.incident(e)) {
      const Tuple& t = rels[ref.relation].tuples[ref.tuple];
      // Record each tuple once: from its smallest argument.
      if (*std::min_element(t.args.begin(), t.args.end()) == e && t.within(members)) {
        picked[ref.relation].push_back(ref.tuple);
      }
    }
  }
  RelationStore out;
  for (std::size_t r = 0; r < rels.size(); ++r) {
    out.declare(rels[r].name);
    std::sort(picked[r].begin(), picked[r].end());
    for (auto t : picked[r]) out.add(rels[r].name, rels[r].tuples[t].args, rels[r].tuples[t].level);
  }
  out.normalize();
  return out;
}

}  // namespace cem

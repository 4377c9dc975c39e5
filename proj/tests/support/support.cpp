#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>

#include "cem/io.hpp"

#ifndef CEM_DATA_DIR
#error "CEM_DATA_DIR must be defined"
#endif

namespace cem::testing {

Instance random_instance(std::mt19937_64& rng, const RandomSpec& spec) {
  std::uniform_int_distribution<std::size_t> size(spec.min_entities, spec.max_entities);
  const std::size_t n = size(rng);
  const std::size_t groups = std::max<std::size_t>(1, (n + 2) / 3);
  std::uniform_int_distribution<std::size_t> pick_group(0, groups - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> level(1, 3);

  Instance::Builder b;
  b.declare_relation(rel::kCoauthor).declare_relation(rel::kSimilar);
  std::vector<std::string> ids(n);
  std::vector<std::size_t> group(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = "e" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    group[i] = pick_group(rng);
    b.add_entity(Entity{ids[i], "author", {{"name", "name" + std::to_string(group[i])}}});
  }
  const double p_co = n > 1 ? spec.coauthor_degree / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (group[i] == group[j]) {
        if (unit(rng) < spec.similar_probability) b.add_tuple(rel::kSimilar, {ids[i], ids[j]}, level(rng));
      } else if (unit(rng) < p_co) {
        b.add_tuple(rel::kCoauthor, {ids[i], ids[j]});
      }
    }
  }
  return std::move(b).build();
}

Cover random_cover(const Instance& instance, std::mt19937_64& rng, std::size_t max_neighborhoods) {
  std::uniform_int_distribution<std::size_t> count(1, std::max<std::size_t>(1, max_neighborhoods));
  const std::size_t k = count(rng);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<EntityIndex>> members(k);
  for (EntityIndex e = 0; e < instance.size(); ++e) {
    members[pick(rng)].push_back(e);
    if (unit(rng) < 0.3) members[pick(rng)].push_back(e);
  }
  std::vector<EntitySet> sets;
  for (auto& m : members) {
    if (!m.empty()) sets.emplace_back(std::move(m));
  }
  return make_total(make_cover(instance, std::move(sets)), instance);
}

Instance running_example() {
  return load_instance(std::string(CEM_DATA_DIR) + "/running_example.jsonl");
}

std::vector<EntitySet> running_example_cover_sets(const Instance& instance) {
  std::ifstream in(std::string(CEM_DATA_DIR) + "/running_example_cover.jsonl");
  if (!in) throw std::runtime_error("missing running example cover");
  return read_cover(in, instance);
}

Cover running_example_cover(const Instance& instance) {
  return make_cover(instance, running_example_cover_sets(instance));
}

MatchSet pairs_of(const Instance& instance,
                  const std::vector<std::pair<std::string, std::string>>& ids) {
  MatchSet out;
  for (const auto& [a, b] : ids) out.insert(instance.pair(a, b));
  return out;
}

namespace {

bool holds(const Instance& instance, const Atom& atom, EntityIndex a, EntityIndex b) {
  if (atom.predicate == rel::kSimilar) {
    if (a == b) return false;
    const int l = instance.similar_level(EntityPair::make(a, b));
    return l > 0 && (!atom.level || *atom.level == l);
  }
  const auto* relation = instance.relations().find(atom.predicate);
  if (!relation) throw std::invalid_argument("unknown relation " + atom.predicate);
  const bool symmetric = rel::is_symmetric(atom.predicate);
  for (const auto& t : relation->tuples) {
    if (t.args.size() != 2) continue;
    if (t.args[0] == a && t.args[1] == b) return true;
    if (symmetric && t.args[0] == b && t.args[1] == a) return true;
  }
  return false;
}

}  // namespace

OracleModel::OracleModel(const RuleSetConfig& rules, const Instance& instance, const EntitySet& scope)
    : scope_(scope) {
  using Key = std::tuple<std::size_t, std::vector<EntityPair>, std::vector<EntityIndex>>;
  std::map<Key, Firing> unique;
  std::vector<EntityPair> heads;
  for (std::size_t r = 0; r < rules.rules.size(); ++r) {
    const auto& rule = rules.rules[r];
    if (rule.hard) throw std::invalid_argument("oracle handles soft rules only");
    const auto vars = rule.variables();
    std::vector<std::size_t> at(vars.size(), 0);
    auto value = [&](const std::string& v) {
      return scope[at[static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin())]];
    };
    if (scope.empty()) continue;
    while (true) {
      bool ok = true;
      std::optional<EntityPair> body;
      for (const auto& atom : rule.body) {
        const EntityIndex a = value(atom.vars[0]);
        const EntityIndex b = value(atom.vars[1]);
        if (atom.is_match()) {
          if (a != b) body = EntityPair::make(a, b);
        } else if (!holds(instance, atom, a, b)) {
          ok = false;
          break;
        }
      }
      const EntityIndex h0 = value(rule.head.vars[0]);
      const EntityIndex h1 = value(rule.head.vars[1]);
      if (ok && h0 != h1) {
        Firing f;
        f.head = EntityPair::make(h0, h1);
        if (body && *body != f.head) {
          f.has_body = true;
          f.body = *body;
        }
        f.weight = rule.weight;
        std::vector<EntityPair> pair_key{f.head};
        if (f.has_body) pair_key.push_back(f.body);
        std::sort(pair_key.begin(), pair_key.end());
        std::vector<EntityIndex> support;
        for (std::size_t i = 0; i < vars.size(); ++i) support.push_back(scope[at[i]]);
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        unique.emplace(Key{r, pair_key, support}, f);
        heads.push_back(f.head);
      }
      std::size_t i = 0;
      while (i < at.size() && ++at[i] == scope.size()) at[i++] = 0;
      if (i == at.size()) break;
    }
  }
  for (auto& [key, f] : unique) firings_.push_back(f);
  heads_ = MatchSet(std::move(heads));
}

LogScore OracleModel::score(const MatchSet& s) const {
  LogScore total;
  for (const auto& f : firings_) {
    if (s.contains(f.head) && (!f.has_body || s.contains(f.body))) total += f.weight;
  }
  return total;
}

MatchSet OracleModel::map(const MatchSet& positive, const MatchSet& negative) const {
  const MatchSet fixed = positive.restricted_to(scope_);
  std::vector<EntityPair> free;
  for (const auto& p : heads_) {
    if (!fixed.contains(p) && !negative.contains(p)) free.push_back(p);
  }
  if (free.size() > 20) throw std::invalid_argument("oracle: too many free pairs");
  bool have = false;
  LogScore best_score;
  std::vector<EntityPair> best;
  for (std::uint32_t mask = 0; mask < (1u << free.size()); ++mask) {
    MatchSet s = fixed;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (mask >> i & 1u) s.insert(free[i]);
    }
    const LogScore sc = score(s);
    const auto& seq = s.pairs();
    bool better = !have || sc > best_score ||
                  (sc == best_score && (seq.size() > best.size() ||
                                        (seq.size() == best.size() && seq < best)));
    if (better) {
      have = true;
      best_score = sc;
      best = seq;
    }
  }
  return MatchSet(best);
}

}  // namespace cem::testing

#include "cem/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cem/union_find.hpp"

namespace cem {

GroundTruth::GroundTruth(std::size_t entity_count, std::vector<std::vector<EntityIndex>> clusters)
    : cluster_of_(entity_count, kNone) {
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::erase_if(clusters, [](const auto& c) { return c.empty(); });
  std::sort(clusters.begin(), clusters.end());
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    for (EntityIndex e : clusters[k]) {
      if (e >= entity_count) throw std::invalid_argument("ground truth mentions unknown entity");
      if (cluster_of_[e] != kNone) throw std::invalid_argument("ground truth clusters overlap");
      cluster_of_[e] = k;
    }
  }
  clusters_ = std::move(clusters);
}

bool GroundTruth::knows(EntityIndex e) const {
  return e < cluster_of_.size() && cluster_of_[e] != kNone;
}

bool GroundTruth::same(EntityIndex a, EntityIndex b) const {
  if (!knows(a) || !knows(b)) throw std::out_of_range("entity missing from ground truth");
  return cluster_of_[a] == cluster_of_[b];
}

MatchSet GroundTruth::pairs() const {
  std::vector<EntityPair> out;
  for (const auto& c : clusters_) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) out.push_back(EntityPair{c[i], c[j]});
    }
  }
  return MatchSet(std::move(out));
}

MatchSet GroundTruth::pairs_within(const EntitySet& entities) const {
  std::map<std::size_t, std::vector<EntityIndex>> groups;
  for (EntityIndex e : entities) {
    if (knows(e)) groups[cluster_of_[e]].push_back(e);
  }
  std::vector<EntityPair> out;
  for (const auto& [k, c] : groups) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) out.push_back(EntityPair{c[i], c[j]});
    }
  }
  return MatchSet(std::move(out));
}

std::uint64_t GroundTruth::pair_count() const {
  std::uint64_t n = 0;
  for (const auto& c : clusters_) n += std::uint64_t{c.size()} * (c.size() - 1) / 2;
  return n;
}

double Prf::f1() const {
  const double p = precision.value();
  const double r = recall.value();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

MatchSet transitive_closure(const MatchSet& pairs) {
  std::map<EntityIndex, std::size_t> slot;
  std::vector<EntityIndex> entity;
  for (const auto& p : pairs) {
    for (EntityIndex e : {p.lo, p.hi}) {
      if (slot.emplace(e, entity.size()).second) entity.push_back(e);
    }
  }
  UnionFind uf(entity.size());
  for (const auto& p : pairs) uf.unite(slot[p.lo], slot[p.hi]);
  std::map<std::size_t, std::vector<EntityIndex>> groups;
  for (std::size_t i = 0; i < entity.size(); ++i) groups[uf.find(i)].push_back(entity[i]);
  std::vector<EntityPair> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        out.push_back(EntityPair{members[i], members[j]});
      }
    }
  }
  return MatchSet(std::move(out));
}

Prf prf(const MatchSet& predicted, const GroundTruth& truth, bool close_first) {
  const MatchSet scored = close_first ? transitive_closure(predicted) : predicted;
  Prf out;
  std::uint64_t correct = 0;
  for (const auto& p : scored) correct += truth.same(p.lo, p.hi) ? 1 : 0;
  out.precision = Ratio{correct, scored.size()};
  out.recall = Ratio{correct, truth.pair_count()};
  return out;
}

SoundCompleteness soundness_completeness(const MatchSet& out, const MatchSet& reference) {
  const std::uint64_t common = out.intersected(reference).size();
  return SoundCompleteness{Ratio{common, out.size()}, Ratio{common, reference.size()}};
}

UbResult ub_matches(const Matcher& matcher, const Cover& cover, const GroundTruth& truth,
                    UbScope scope) {
  if (!as_probabilistic(matcher)) {
    throw std::invalid_argument("the upper-bound scheme needs a Type-II matcher");
  }
  UbResult result;
  result.scope = scope;
  std::vector<EntityPair> kept;
  auto decide = [&](const EntitySet& members, const std::vector<EntityPair>& candidates) {
    const MatchSet true_pairs = truth.pairs_within(members);
    for (const auto& p : candidates) {
      MatchSet evidence = true_pairs;
      evidence.erase(p);
      ++result.invocations;
      if (matcher.match(members, Evidence(std::move(evidence))).contains(p)) kept.push_back(p);
    }
  };

  if (scope == UbScope::kGlobal) {
    const EntitySet all = matcher.instance().all_entities();
    const auto candidates = matcher.candidate_pairs(all);
    result.candidates = candidates.size();
    decide(all, candidates);
  } else {
    // Home of each candidate pair: its smallest containing neighborhood.
    std::map<EntityPair, std::size_t> home;
    for (const auto& n : cover.neighborhoods) {
      for (const auto& p : matcher.candidate_pairs(n.members)) {
        auto [it, inserted] = home.emplace(p, n.id);
        const auto& current = cover.neighborhoods[it->second].members;
        if (!inserted && n.members.size() < current.size()) it->second = n.id;
      }
    }
    result.candidates = home.size();
    std::vector<std::vector<EntityPair>> by_neighborhood(cover.size());
    for (const auto& [p, id] : home) by_neighborhood[id].push_back(p);
    for (const auto& n : cover.neighborhoods) {
      if (!by_neighborhood[n.id].empty()) decide(n.members, by_neighborhood[n.id]);
    }
  }
  result.matches = MatchSet(std::move(kept));
  return result;
}

std::string metrics_csv_header() {
  return "scheme,matches,precision,recall,f1,precision_num,precision_den,recall_num,recall_den,"
         "soundness_holistic,completeness_holistic,soundness_ub,completeness_ub,ub_scope,"
         "f1_upper_bound,degenerate\n";
}

namespace {

std::string degenerate_flags(const MetricsReport& r) {
  std::string out;
  auto flag = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ';';
    out += name;
  };
  flag(r.quality.precision.degenerate(), "precision");
  flag(r.quality.recall.degenerate(), "recall");
  flag(r.has_holistic && r.vs_holistic.soundness.degenerate(), "soundness_holistic");
  flag(r.has_holistic && r.vs_holistic.completeness.degenerate(), "completeness_holistic");
  flag(r.has_ub && r.vs_ub.soundness.degenerate(), "soundness_ub");
  flag(r.has_ub && r.vs_ub.completeness.degenerate(), "completeness_ub");
  return out;
}

}  // namespace

std::string metrics_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  auto opt = [&](bool has, const Ratio& x) {
    if (has) os << x.value();
  };
  os << r.scheme << ',' << r.matches << ',' << r.quality.precision.value() << ','
     << r.quality.recall.value() << ',' << r.quality.f1() << ',' << r.quality.precision.numerator
     << ',' << r.quality.precision.denominator << ',' << r.quality.recall.numerator << ','
     << r.quality.recall.denominator << ',';
  opt(r.has_holistic, r.vs_holistic.soundness);
  os << ',';
  opt(r.has_holistic, r.vs_holistic.completeness);
  os << ',';
  opt(r.has_ub, r.vs_ub.soundness);
  os << ',';
  opt(r.has_ub, r.vs_ub.completeness);
  os << ',' << (r.has_ub ? (r.ub_scope == UbScope::kGlobal ? "global" : "neighborhood") : "")
     << ',';
  if (r.has_ub) os << r.f1_upper_bound;
  os << ',' << degenerate_flags(r) << '\n';
  return os.str();
}

std::string metrics_text(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  auto ratio = [&](const char* name, const Ratio& x) {
    os << "  " << std::left << std::setw(26) << name << x.value() << "  ";
    if (x.degenerate()) {
      os << "(0/0 reported as 1)\n";
    } else {
      os << "(" << x.numerator << "/" << x.denominator << ")\n";
    }
  };
  os << "scheme " << r.scheme << ": " << r.matches << " matches\n";
  ratio("precision", r.quality.precision);
  ratio("recall", r.quality.recall);
  os << "  " << std::left << std::setw(26) << "f1" << r.quality.f1() << "\n";
  if (r.has_holistic) {
    ratio("soundness vs holistic", r.vs_holistic.soundness);
    ratio("completeness vs holistic", r.vs_holistic.completeness);
  }
  if (r.has_ub) {
    const char* scope = r.ub_scope == UbScope::kGlobal ? "global" : "per-neighborhood";
    os << "  upper bound computed " << scope
       << (r.ub_scope == UbScope::kGlobal ? "\n" : " (a lower bound on the global upper bound)\n");
    ratio("soundness vs UB", r.vs_ub.soundness);
    ratio("completeness vs UB", r.vs_ub.completeness);
    os << "  " << std::left << std::setw(26) << "f1 upper bound" << r.f1_upper_bound << "\n";
  }
  return os.str();
}

}  // namespace cem

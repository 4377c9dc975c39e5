#include "cem/axioms.hpp"

#include <sstream>
#include <stdexcept>

namespace cem {
namespace {

std::string pair_text(const Instance& instance, const EntityPair& p) {
  return "(" + instance.id(p.lo) + "," + instance.id(p.hi) + ")";
}

std::string set_text(const Instance& instance, const MatchSet& s) {
  std::string out = "{";
  for (const auto& p : s) {
    if (out.size() > 1) out += ",";
    out += pair_text(instance, p);
  }
  return out + "}";
}

std::string entities_text(const Instance& instance, const EntitySet& e) {
  std::string out = "{";
  for (EntityIndex x : e) {
    if (out.size() > 1) out += ",";
    out += instance.id(x);
  }
  return out + "}";
}

std::vector<EntityPair> all_pairs(const EntitySet& e) {
  std::vector<EntityPair> out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) out.push_back(EntityPair{e[i], e[j]});
  }
  return out;
}

MatchSet from_mask(const std::vector<EntityPair>& pairs, std::uint32_t mask) {
  std::vector<EntityPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (mask >> i & 1) out.push_back(pairs[i]);
  }
  return MatchSet(std::move(out));
}

EntitySet subset(const EntitySet& e, std::uint32_t mask) {
  std::vector<EntityIndex> out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (mask >> i & 1) out.push_back(e[i]);
  }
  return EntitySet(std::move(out));
}

// `small` must be contained in `large`.
AxiomReport containment(std::string name, const MatchSet& small, const MatchSet& large) {
  AxiomReport r;
  r.axiom = std::move(name);
  r.checks = 1;
  if (!small.is_subset_of(large)) {
    r.passed = false;
    r.counterexample = Counterexample{};
    r.counterexample->offending = small.minus(large);
  }
  return r;
}

void fold(AxiomReport& total, AxiomReport part) {
  total.checks += part.checks;
  if (!part.passed && total.passed) {
    total.passed = false;
    total.counterexample = part.counterexample;
  }
}

}  // namespace

std::string AxiomReport::describe(const Instance& instance) const {
  std::ostringstream os;
  os << axiom << ": " << (passed ? "pass" : "FAIL") << " (" << checks << " checks)\n";
  if (counterexample) {
    const auto& c = *counterexample;
    os << "  E=" << entities_text(instance, c.entities)
       << " V+=" << set_text(instance, c.evidence.positive)
       << " V-=" << set_text(instance, c.evidence.negative) << "\n";
    if (!c.other_entities.empty() || !c.other_evidence.positive.empty() ||
        !c.other_evidence.negative.empty()) {
      os << "  E'=" << entities_text(instance, c.other_entities)
         << " V+'=" << set_text(instance, c.other_evidence.positive)
         << " V-'=" << set_text(instance, c.other_evidence.negative) << "\n";
    }
    if (!c.s.empty() || !c.t.empty()) {
      os << "  S=" << set_text(instance, c.s) << " T=" << set_text(instance, c.t) << "\n";
    }
    os << "  offending=" << set_text(instance, c.offending);
    if (!c.detail.empty()) os << " " << c.detail;
    os << "\n";
  }
  for (const auto& part : parts) {
    if (!part.passed) os << "  " << part.describe(instance);
  }
  return os.str();
}

AxiomReport check_idempotence(const Matcher& matcher, const EntitySet& entities,
                              const Evidence& evidence) {
  AxiomReport r;
  r.axiom = "idempotence";
  r.checks = 1;
  const MatchSet out = matcher.match(entities, evidence);
  const MatchSet again = matcher.match(entities, Evidence(out, evidence.negative));
  if (again != out) {
    r.passed = false;
    Counterexample c;
    c.entities = entities;
    c.evidence = evidence;
    c.offending = out.minus(again).united(again.minus(out));
    c.detail = "first=" + std::to_string(out.size()) + " pairs, replay=" +
               std::to_string(again.size()) + " pairs";
    r.counterexample = std::move(c);
  }
  return r;
}

AxiomReport check_monotonicity(const Matcher& matcher, const EntitySet& entities,
                               const Evidence& evidence, const EntitySet& ext_entities,
                               const Evidence& ext_evidence) {
  if (!entities.is_subset_of(ext_entities) ||
      !evidence.positive.is_subset_of(ext_evidence.positive) ||
      !evidence.negative.is_subset_of(ext_evidence.negative)) {
    throw std::invalid_argument("monotonicity check needs E ⊆ E', V+ ⊆ V+', V- ⊆ V-'");
  }
  AxiomReport r;
  r.axiom = "monotonicity";
  const MatchSet base = matcher.match(entities, evidence);

  auto attach = [&](AxiomReport& part, const EntitySet& e2, const Evidence& ev2) {
    if (part.counterexample) {
      part.counterexample->entities = entities;
      part.counterexample->evidence = evidence;
      part.counterexample->other_entities = e2;
      part.counterexample->other_evidence = ev2;
    }
  };

  const MatchSet grown_e = matcher.match(ext_entities, evidence);
  AxiomReport i = containment("monotonicity(i): larger E", base, grown_e);
  attach(i, ext_entities, evidence);

  const Evidence more_pos(ext_evidence.positive, evidence.negative);
  AxiomReport ii = containment("monotonicity(ii): larger V+", base, matcher.match(entities, more_pos));
  attach(ii, entities, more_pos);

  const Evidence more_neg(evidence.positive, ext_evidence.negative);
  AxiomReport iii =
      containment("monotonicity(iii): larger V-", matcher.match(entities, more_neg), base);
  attach(iii, entities, more_neg);

  for (auto* part : {&i, &ii, &iii}) {
    fold(r, *part);
    r.parts.push_back(std::move(*part));
  }
  return r;
}

AxiomReport check_supermodularity(const ProbabilisticMatcher& matcher, const MatchSet& s,
                                  const MatchSet& t, const EntityPair& p) {
  if (!s.is_subset_of(t)) throw std::invalid_argument("supermodularity check needs S ⊆ T");
  if (t.contains(p)) throw std::invalid_argument("supermodularity check needs p outside T");
  AxiomReport r;
  r.axiom = "supermodularity";
  r.checks = 1;
  const MatchSet single{p};
  const LogScore gain_t = matcher.score_gain(t, single);
  const LogScore gain_s = matcher.score_gain(s, single);
  if (gain_t < gain_s) {
    r.passed = false;
    Counterexample c;
    c.s = s;
    c.t = t;
    c.offending = single;
    c.detail = "gain under T=" + std::to_string(gain_t.value()) +
               " < gain under S=" + std::to_string(gain_s.value());
    r.counterexample = std::move(c);
  }
  return r;
}

AxiomReport check_supermodularity_exhaustive(const ProbabilisticMatcher& matcher,
                                             const EntitySet& entities) {
  if (entities.size() > 5) {
    throw std::invalid_argument("exhaustive supermodularity is limited to 5 entities");
  }
  const auto pairs = all_pairs(entities);
  const std::size_t m = pairs.size();
  const std::uint32_t limit = std::uint32_t{1} << m;
  std::vector<LogScore> gain(static_cast<std::size_t>(limit) * m);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    const MatchSet base = from_mask(pairs, mask);
    for (std::size_t p = 0; p < m; ++p) gain[mask * m + p] = matcher.score_gain(base, MatchSet{pairs[p]});
  }
  AxiomReport r;
  r.axiom = "supermodularity";
  for (std::uint32_t t = 0; t < limit; ++t) {
    // Every submask s of t, including 0.
    for (std::uint32_t s = t;; s = (s - 1) & t) {
      for (std::size_t p = 0; p < m; ++p) {
        if (t >> p & 1) continue;
        ++r.checks;
        if (r.passed && gain[t * m + p] < gain[s * m + p]) {
          r.passed = false;
          Counterexample c;
          c.entities = entities;
          c.s = from_mask(pairs, s);
          c.t = from_mask(pairs, t);
          c.offending = MatchSet{pairs[p]};
          c.detail = "gain under T=" + std::to_string(gain[t * m + p].value()) +
                     " < gain under S=" + std::to_string(gain[s * m + p].value());
          r.counterexample = std::move(c);
        }
      }
      if (s == 0) break;
    }
  }
  return r;
}

AxiomReport check_monotonicity_exhaustive(const Matcher& matcher, const EntitySet& entities) {
  if (entities.size() > 5) {
    throw std::invalid_argument("exhaustive monotonicity is limited to 5 entities");
  }
  AxiomReport r;
  r.axiom = "monotonicity";
  AxiomReport i;
  AxiomReport ii;
  AxiomReport iii;
  i.axiom = "monotonicity(i): larger E";
  ii.axiom = "monotonicity(ii): larger V+";
  iii.axiom = "monotonicity(iii): larger V-";

  const std::uint32_t n_sub = std::uint32_t{1} << entities.size();
  std::vector<MatchSet> by_subset(n_sub);
  for (std::uint32_t mask = 0; mask < n_sub; ++mask) {
    by_subset[mask] = matcher.match(subset(entities, mask), Evidence{});
  }
  for (std::uint32_t big = 0; big < n_sub; ++big) {
    for (std::uint32_t small = big;; small = (small - 1) & big) {
      AxiomReport one = containment(i.axiom, by_subset[small], by_subset[big]);
      if (one.counterexample) {
        one.counterexample->entities = subset(entities, small);
        one.counterexample->other_entities = subset(entities, big);
      }
      fold(i, std::move(one));
      if (small == 0) break;
    }
  }

  const auto pairs = all_pairs(entities);
  const std::uint32_t limit = std::uint32_t{1} << pairs.size();
  std::vector<MatchSet> with_pos(limit);
  std::vector<MatchSet> with_neg(limit);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    with_pos[mask] = matcher.match(entities, Evidence(from_mask(pairs, mask)));
    with_neg[mask] = matcher.match(entities, Evidence(MatchSet{}, from_mask(pairs, mask)));
  }
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const std::uint32_t ext = mask | (std::uint32_t{1} << p);
      if (ext == mask) continue;
      AxiomReport a = containment(ii.axiom, with_pos[mask], with_pos[ext]);
      if (a.counterexample) {
        a.counterexample->entities = a.counterexample->other_entities = entities;
        a.counterexample->evidence = Evidence(from_mask(pairs, mask));
        a.counterexample->other_evidence = Evidence(from_mask(pairs, ext));
      }
      fold(ii, std::move(a));
      AxiomReport b = containment(iii.axiom, with_neg[ext], with_neg[mask]);
      if (b.counterexample) {
        b.counterexample->entities = b.counterexample->other_entities = entities;
        b.counterexample->evidence = Evidence(MatchSet{}, from_mask(pairs, mask));
        b.counterexample->other_evidence = Evidence(MatchSet{}, from_mask(pairs, ext));
      }
      fold(iii, std::move(b));
    }
  }
  for (auto* part : {&i, &ii, &iii}) {
    fold(r, *part);
    r.parts.push_back(std::move(*part));
  }
  return r;
}

}  // namespace cem

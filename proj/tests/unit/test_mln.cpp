#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cem/axioms.hpp"
#include "cem/mln.hpp"
#include "support.hpp"

namespace cem {
namespace {

std::shared_ptr<const Instance> shared(Instance inst) {
  return std::make_shared<const Instance>(std::move(inst));
}

MatchSet random_subset(const std::vector<EntityPair>& pool, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution coin(p);
  MatchSet out;
  for (const auto& q : pool) {
    if (coin(rng)) out.insert(q);
  }
  return out;
}

class RunningExample : public ::testing::Test {
 protected:
  void SetUp() override {
    inst_ = shared(testing::running_example());
    matcher_ = std::make_unique<MlnMatcher>(inst_, rule_set_by_name("running-example"));
  }
  MatchSet pairs(const std::vector<std::pair<std::string, std::string>>& ids) const {
    return testing::pairs_of(*inst_, ids);
  }
  std::shared_ptr<const Instance> inst_;
  std::unique_ptr<MlnMatcher> matcher_;
};

TEST_F(RunningExample, GroundingDeduplicatesMirroredLinks) {
  const Grounding& g = matcher_->global_grounding();
  // Seven Similar pairs give seven R1 firings.
  EXPECT_EQ(std::count_if(g.rules.begin(), g.rules.end(), [](auto& r) { return r.rule == 0; }), 7);
  // R2 links between candidate pairs: a1a2~b2b3, b1b2~c1c2, b2b3~c2c3,
  // b1b3~c1c3, and c1c2 through d1. Links to bodies such as b1d1 that are
  // never heads are kept but can only fire under positive evidence.
  std::vector<GroundRule> links;
  for (const auto& r : g.rules) {
    if (r.rule == 1 && (!r.body || g.heads.contains(*r.body))) links.push_back(r);
  }
  for (const auto& r : links) EXPECT_TRUE(!r.body || r.body_is_head);
  ASSERT_EQ(links.size(), 5u);
  const auto c1c2 = inst_->pair("c1", "c2");
  const auto unconditional = std::find_if(links.begin(), links.end(), [](auto& r) { return !r.body; });
  ASSERT_NE(unconditional, links.end());
  EXPECT_EQ(unconditional->head, c1c2);
  EXPECT_EQ(g.heads.size(), 7u);
}

TEST_F(RunningExample, ScoreGains) {
  // c1c2 is pushed over the line by the shared coauthor d1.
  EXPECT_EQ(matcher_->score_gain({}, pairs({{"c1", "c2"}})), LogScore::from_double(3));
  // Once b2b3 is known, a1a2 gains -5 + 8.
  EXPECT_EQ(matcher_->score_gain(pairs({{"b2", "b3"}}), pairs({{"a1", "a2"}})),
            LogScore::from_double(3));
  // The three-pair chain only pays off jointly.
  const MatchSet chain = pairs({{"a1", "a2"}, {"b2", "b3"}, {"c2", "c3"}});
  EXPECT_EQ(matcher_->score_gain({}, chain), LogScore::from_double(1));
  EXPECT_EQ(matcher_->score_gain({}, pairs({{"b2", "b3"}, {"c2", "c3"}})), LogScore::from_double(-2));
}

TEST_F(RunningExample, LocalMatches) {
  const auto sets = testing::running_example_cover_sets(*inst_);
  EXPECT_TRUE(matcher_->match(sets[0], {}).empty());
  EXPECT_TRUE(matcher_->match(sets[1], {}).empty());
  EXPECT_EQ(matcher_->match(sets[2], {}), pairs({{"c1", "c2"}}));
  EXPECT_EQ(matcher_->match(sets[1], Evidence(pairs({{"c1", "c2"}}))),
            pairs({{"b1", "b2"}, {"c1", "c2"}}));
  // Evidence outside the neighborhood is ignored.
  EXPECT_TRUE(matcher_->match(sets[0], Evidence(pairs({{"c1", "c2"}}))).empty());
  // Negative evidence wins over the coauthor boost.
  EXPECT_TRUE(matcher_->match(sets[2], Evidence({}, pairs({{"c1", "c2"}}))).empty());
}

TEST_F(RunningExample, LocalGroundingEqualsDirectGrounding) {
  for (const auto& s : testing::running_example_cover_sets(*inst_)) {
    Grounding local = matcher_->local_grounding(s);
    Grounding direct = ground(matcher_->rules(), *inst_, s);
    auto key = [](const GroundRule& r) { return std::tie(r.rule, r.head, r.body, r.support); };
    auto by_key = [&](const GroundRule& a, const GroundRule& b) { return key(a) < key(b); };
    std::sort(local.rules.begin(), local.rules.end(), by_key);
    std::sort(direct.rules.begin(), direct.rules.end(), by_key);
    EXPECT_EQ(local.rules, direct.rules);
    EXPECT_EQ(local.heads, direct.heads);
  }
}

TEST(Mln, UnknownRelationRejected) {
  Instance::Builder b;
  b.add_entity({"a", "author", {{"name", "a"}}});
  const auto inst = shared(std::move(b).build());
  EXPECT_THROW(MlnMatcher(inst, rule_set_by_name("running-example")), std::invalid_argument);
}

TEST(Mln, MapMatchesOracle) {
  std::mt19937_64 rng(101);
  testing::RandomSpec spec;
  spec.max_entities = 9;
  const RuleSetConfig presets[] = {rule_set_by_name("running-example"), rule_set_by_name("learned")};
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = testing::random_instance(rng, spec);
    const RuleSetConfig& rules = presets[trial % 2];
    const EntitySet all = inst.all_entities();
    const testing::OracleModel oracle(rules, inst, all);
    const Grounding g = ground(rules, inst, all);
    ASSERT_EQ(g.heads, oracle.heads());
    if (oracle.heads().size() > 14) continue;
    const auto& heads = oracle.heads().pairs();
    for (int round = 0; round < 3; ++round) {
      const MatchSet pos = random_subset(heads, rng, 0.2);
      const MatchSet neg = random_subset(heads, rng, 0.2).minus(pos);
      const MatchSet expected = oracle.map(pos, neg);
      ASSERT_EQ(map_infer(g, Evidence(pos, neg)).matches, expected) << "trial " << trial;
      const MatchSet s = random_subset(heads, rng);
      ASSERT_EQ(log_score(g.rules, s), oracle.score(s));
      ++compared;
    }
  }
  EXPECT_GT(compared, 500);
}

TEST(Mln, MinCutAgreesWithExhaustive) {
  std::mt19937_64 rng(202);
  testing::RandomSpec spec;
  spec.min_entities = 10;
  spec.max_entities = 24;
  spec.coauthor_degree = 2.5;
  const RuleSetConfig presets[] = {rule_set_by_name("running-example"), rule_set_by_name("learned")};
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = testing::random_instance(rng, spec);
    const RuleSetConfig& rules = presets[trial % 2];
    const Grounding g = ground(rules, inst, inst.all_entities());
    const auto& heads = g.heads.pairs();
    const MatchSet pos = random_subset(heads, rng, 0.1);
    const Evidence ev(pos, random_subset(heads, rng, 0.1).minus(pos));
    const MapResult exact = map_infer(g, ev, MapOptions{20});
    if (exact.largest_component > 20) continue;
    const MapResult cut = map_infer(g, ev, MapOptions{0});
    ASSERT_FALSE(cut.approximate);
    ASSERT_EQ(cut.matches, exact.matches) << "trial " << trial;
    ++compared;
  }
  EXPECT_GT(compared, 150);
}

TEST(Mln, ScoreGainIsScoreDifference) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = shared(testing::random_instance(rng));
    const MlnMatcher m(inst, rule_set_by_name(trial % 2 ? "learned" : "running-example"));
    const auto heads = m.global_grounding().heads.pairs();
    for (int k = 0; k < 5; ++k) {
      const MatchSet base = random_subset(heads, rng);
      const MatchSet extra = random_subset(heads, rng, 0.3);
      ASSERT_EQ(m.score_gain(base, extra), m.log_score(base.united(extra)) - m.log_score(base));
      ASSERT_EQ(m.log_score(base), log_score(m.global_grounding().rules, base));
    }
  }
}

TEST(Mln, InteractingPairsCoverEveryInfluence) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = shared(testing::random_instance(rng));
    const MlnMatcher m(inst, rule_set_by_name("learned"));
    const auto heads = m.global_grounding().heads.pairs();
    for (const auto& p : heads) {
      std::vector<EntityPair> out;
      ASSERT_TRUE(m.interacting_pairs(p, out));
      const MatchSet base = random_subset(heads, rng);
      for (const auto& q : heads) {
        if (q == p || base.contains(q) || base.contains(p)) continue;
        MatchSet with_q = base;
        with_q.insert(q);
        if (m.score_gain(with_q, MatchSet{p}) != m.score_gain(base, MatchSet{p})) {
          ASSERT_NE(std::find(out.begin(), out.end(), q), out.end());
        }
      }
    }
  }
}

TEST(Mln, CandidatePairsAreHeads) {
  const auto inst = shared(testing::running_example());
  const MlnMatcher m(inst, rule_set_by_name("running-example"));
  const auto all = m.candidate_pairs(inst->all_entities());
  EXPECT_EQ(MatchSet(all), m.global_grounding().heads);
  // d1 has no Similar tuple, so it is never a candidate.
  for (const auto& p : all) EXPECT_FALSE(p.touches(inst->index_of("d1")));
}

Instance triangle() {
  Instance::Builder b;
  for (const char* id : {"a", "b", "c"}) b.add_entity({id, "author", {{"name", id}}});
  b.declare_relation(rel::kCoauthor);
  b.add_tuple(rel::kSimilar, {"a", "b"}, 3).add_tuple(rel::kSimilar, {"b", "c"}, 3);
  b.add_tuple(rel::kSimilar, {"a", "c"}, 1);
  return std::move(b).build();
}

constexpr const char* kTriangleRules =
    "3 :: Similar(x,y,3) => Match(x,y)\n"
    "-5 :: Similar(x,y,1) => Match(x,y)\n"
    "inf :: Match(x,y), Match(y,z) => Match(x,z)\n";

TEST(Mln, TransitivityBreaksMonotonicity) {
  const auto inst = shared(triangle());
  const MlnMatcher m(inst, parse_rule_set(kTriangleRules, true));
  const EntitySet all = inst->all_entities();
  const MatchSet ab{inst->pair("a", "b")};
  const MatchSet bc{inst->pair("b", "c")};
  // {ab} and {bc} tie at 3; the closed triangle scores 1.
  EXPECT_EQ(m.match(all, {}), ab);
  EXPECT_EQ(m.match(all, Evidence(bc)), bc);
  const AxiomReport r = check_monotonicity(m, all, {}, all, Evidence(bc));
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_EQ(r.counterexample->offending, ab);
  // The hard rule shows up in the score.
  EXPECT_EQ(m.log_score(ab.united(bc)), LogScore::from_double(6) - MlnMatcher::kHardPenalty);
  std::vector<EntityPair> out;
  EXPECT_FALSE(m.interacting_pairs(ab.pairs()[0], out));
}

TEST(Mln, TransitiveInferenceOverCapThrows) {
  const auto inst = shared(triangle());
  const MlnMatcher m(inst, parse_rule_set(kTriangleRules, true), MapOptions{2});
  EXPECT_THROW(m.match(inst->all_entities(), {}), InferenceError);
  const MlnMatcher ok(inst, parse_rule_set(kTriangleRules, true), MapOptions{3});
  EXPECT_NO_THROW(ok.match(inst->all_entities(), {}));
}

TEST(Mln, NegativeLinksFallBackToGreedyAndSaySo) {
  std::mt19937_64 rng(505);
  testing::RandomSpec spec;
  spec.min_entities = 20;
  spec.max_entities = 24;
  spec.coauthor_degree = 3;
  spec.similar_probability = 1.0;
  const RuleSetConfig rules = parse_rule_set(
      "-1 :: Similar(x,y) => Match(x,y)\n"
      "-0.5 :: Similar(x,y), Coauthor(x,a), Coauthor(y,b), Match(a,b) => Match(x,y)\n",
      true);
  bool saw = false;
  for (int trial = 0; trial < 20 && !saw; ++trial) {
    const Instance inst = testing::random_instance(rng, spec);
    const MapResult r = map_infer(ground(rules, inst, inst.all_entities()), {}, MapOptions{2});
    saw = r.approximate;
  }
  EXPECT_TRUE(saw);
}

TEST(Mln, FactoryOptions) {
  const auto inst = shared(testing::running_example());
  auto m = make_mln_matcher(inst, {{"rules", "running-example"}, {"exact_cap", "5"}});
  EXPECT_EQ(m->name(), "mln");
  EXPECT_THROW(make_mln_matcher(inst, {{"exact_cap", "99"}}), std::invalid_argument);
  EXPECT_THROW(make_mln_matcher(inst, {{"rules", std::string(CEM_DATA_DIR) + "/rules/transitive.rules"}}),
               std::invalid_argument);
  EXPECT_NO_THROW(make_mln_matcher(
      inst, {{"rules", std::string(CEM_DATA_DIR) + "/rules/transitive.rules"}, {"allow_unsafe", "true"}}));
}

}  // namespace
}  // namespace cem

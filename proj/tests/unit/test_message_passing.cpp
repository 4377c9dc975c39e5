#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cem/mln.hpp"
#include "cem/rules_matcher.hpp"
#include "cem/message_passing.hpp"
#include "json.hpp"
#include "support.hpp"

namespace cem {
namespace {

// Delegates to an MLN matcher and throws on one neighborhood.
class FailingMatcher final : public ProbabilisticMatcher {
 public:
  FailingMatcher(const MlnMatcher& inner, EntitySet poison) : inner_(inner), poison_(std::move(poison)) {}
  std::string_view name() const override { return "failing"; }
  const Instance& instance() const override { return inner_.instance(); }
  MatchSet match(const EntitySet& e, const Evidence& ev) const override {
    if (e == poison_) throw InferenceError("poisoned neighborhood");
    return inner_.match(e, ev);
  }
  std::vector<EntityPair> candidate_pairs(const EntitySet& e) const override {
    return inner_.candidate_pairs(e);
  }
  LogScore log_score(const MatchSet& s) const override { return inner_.log_score(s); }

 private:
  const MlnMatcher& inner_;
  EntitySet poison_;
};

class RunningExample : public ::testing::Test {
 protected:
  void SetUp() override {
    inst_ = std::make_shared<const Instance>(testing::running_example());
    matcher_ = std::make_unique<MlnMatcher>(inst_, rule_set_by_name("running-example"));
    cover_ = testing::running_example_cover(*inst_);
  }
  MatchSet pairs(const std::vector<std::pair<std::string, std::string>>& ids) const {
    return testing::pairs_of(*inst_, ids);
  }
  std::shared_ptr<const Instance> inst_;
  std::unique_ptr<MlnMatcher> matcher_;
  Cover cover_;
};

TEST_F(RunningExample, GoldenRuns) {
  EXPECT_EQ(no_mp(*matcher_, cover_).matches, pairs({{"c1", "c2"}}));
  EXPECT_EQ(smp(*matcher_, cover_).matches, pairs({{"b1", "b2"}, {"c1", "c2"}}));
  const RunResult m = mmp(*matcher_, cover_);
  EXPECT_EQ(m.matches,
            pairs({{"a1", "a2"}, {"b1", "b2"}, {"b2", "b3"}, {"c1", "c2"}, {"c2", "c3"}}));
  // C2 promotes {b1b2, c1c2}; C3 then joins {a1a2, b2b3} with {b2b3, c2c3}.
  EXPECT_EQ(m.state.promotions, 2u);
  // b1b3~c1c3 stays behind with gain -2.
  EXPECT_EQ(m.state.pool.messages(), (std::vector<MatchSet>{pairs({{"b1", "b3"}, {"c1", "c3"}})}));
}

TEST_F(RunningExample, MaximalMessages) {
  const auto c1 = compute_maximal(*matcher_, cover_.neighborhoods[0].members, {});
  EXPECT_EQ(c1.messages, (std::vector<MatchSet>{pairs({{"a1", "a2"}, {"b2", "b3"}}),
                                                pairs({{"b1", "b2"}}), pairs({{"b1", "b3"}})}));
  // One call for match(C, M+) and one per candidate.
  EXPECT_EQ(c1.invocations, 5u);
  const auto c3 = compute_maximal(*matcher_, cover_.neighborhoods[2].members, {});
  EXPECT_EQ(c3.messages, (std::vector<MatchSet>{pairs({{"b2", "b3"}, {"c2", "c3"}}),
                                                pairs({{"c1", "c3"}})}));
  const MatchSet m_c = pairs({{"c1", "c2"}});
  EXPECT_EQ(compute_maximal(*matcher_, cover_.neighborhoods[2].members, {}, &m_c).invocations, 3u);
}

TEST_F(RunningExample, ReactivationModes) {
  const MatchSet b1b2{inst_->pair("b1", "b2")};
  EXPECT_EQ(neighbor_set(b1b2, cover_), (std::vector<std::size_t>{0, 1}));
  const MatchSet c1d1{inst_->pair("c1", "d1")};
  EXPECT_EQ(neighbor_set(c1d1, cover_), (std::vector<std::size_t>{2}));
  EXPECT_EQ(neighbor_set(c1d1, cover_, Reactivation::kEntityOverlap),
            (std::vector<std::size_t>{1, 2}));
}

TEST_F(RunningExample, TraceIsJsonLines) {
  std::ostringstream trace;
  RunOptions opt;
  opt.trace = &trace;
  mmp(*matcher_, cover_, opt);
  std::istringstream in(trace.str());
  std::string line;
  int visits = 0;
  int promotes = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string ev = j.at("event");
    visits += ev == "visit";
    promotes += ev == "promote";
  }
  EXPECT_GT(visits, 3);
  EXPECT_EQ(promotes, 2);
}

TEST_F(RunningExample, AbortKeepsPartialState) {
  const FailingMatcher failing(*matcher_, cover_.neighborhoods[1].members);
  try {
    smp(failing, cover_);
    FAIL() << "expected RunAborted";
  } catch (const RunAborted& e) {
    EXPECT_EQ(e.neighborhood(), 1u);
    EXPECT_EQ(e.partial().visits[0], 1u);
    EXPECT_NE(std::string(e.what()).find("poisoned"), std::string::npos);
  }
  EXPECT_THROW(mmp(failing, cover_), RunAborted);
  EXPECT_THROW(no_mp(failing, cover_), RunAborted);
}

TEST_F(RunningExample, OnStepSeesGrowingState) {
  RunOptions opt;
  std::size_t last = 0;
  bool monotone = true;
  opt.on_step = [&](const RunState& s) {
    monotone &= s.found.size() >= last;
    last = s.found.size();
  };
  smp(*matcher_, cover_, opt);
  EXPECT_TRUE(monotone);
  EXPECT_EQ(last, 2u);
}

TEST(FoundSet, RestrictionMatchesMatchSet) {
  std::mt19937_64 rng(41);
  FoundSet f(30);
  MatchSet ref;
  std::uniform_int_distribution<EntityIndex> pick(0, 29);
  for (int i = 0; i < 200; ++i) {
    const EntityIndex a = pick(rng);
    const EntityIndex b = pick(rng);
    if (a == b) continue;
    const MatchSet one{EntityPair::make(a, b)};
    EXPECT_EQ(f.add(one).size(), ref.contains(one.pairs()[0]) ? 0u : 1u);
    ref.unite_with(one);
    std::vector<EntityIndex> members;
    for (EntityIndex e = 0; e < 30; ++e) {
      if (pick(rng) < 12) members.push_back(e);
    }
    const EntitySet s(std::move(members));
    ASSERT_EQ(f.restricted_to(s), ref.restricted_to(s));
  }
}

TEST(Normalize, MergesOverlapsIndependentOfOrder) {
  std::vector<MatchSet> msgs{{{0, 1}}, {{2, 3}, {4, 5}}, {{0, 1}, {6, 7}}, {{4, 5}, {8, 9}}, {}};
  const auto a = normalize(msgs);
  std::reverse(msgs.begin(), msgs.end());
  EXPECT_EQ(normalize(msgs), a);
  EXPECT_EQ(a, (std::vector<MatchSet>{{{0, 1}, {6, 7}}, {{2, 3}, {4, 5}, {8, 9}}}));
}

TEST(MessagePool, AgreesWithReferencePromotion) {
  std::mt19937_64 rng(42);
  testing::RandomSpec spec;
  spec.min_entities = 8;
  spec.max_entities = 20;
  spec.coauthor_degree = 2.5;
  for (int trial = 0; trial < 150; ++trial) {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(rng, spec));
    const MlnMatcher m(inst, rule_set_by_name(trial % 2 ? "learned" : "running-example"));
    const auto heads = m.global_grounding().heads.pairs();
    if (heads.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, heads.size() - 1);
    MessagePool pool;
    std::vector<MatchSet> ref;
    FoundSet found(inst->size());
    FoundSet ref_found(inst->size());
    for (int step = 0; step < 8; ++step) {
      MatchSet direct;
      for (int k = 0; k < 2; ++k) direct.insert(heads[pick(rng)]);
      std::vector<MatchSet> fresh;
      for (int k = 0; k < 3; ++k) {
        MatchSet msg;
        const int size = 1 + static_cast<int>(pick(rng) % 3);
        for (int i = 0; i < size; ++i) msg.insert(heads[pick(rng)]);
        fresh.push_back(msg);
      }
      pool.found_pairs(found.add(direct));
      for (const auto& msg : fresh) pool.add(msg, found);
      const MatchSet got = pool.promote(m, found);

      const MatchSet ref_before = ref_found.pairs();
      ref_found.add(direct);
      for (auto& msg : fresh) {
        std::vector<MatchSet> one{msg};
        prune_messages(one, ref_found);
        if (!one.empty()) ref.push_back(one.front());
      }
      prune_messages(ref, ref_found);
      ref = normalize(ref);
      promote(m, ref, ref_found);

      ASSERT_EQ(found.pairs(), ref_found.pairs()) << "trial " << trial << " step " << step;
      ASSERT_EQ(pool.messages(), ref) << "trial " << trial << " step " << step;
      ASSERT_TRUE(got.is_subset_of(ref_found.pairs().minus(ref_before)));
    }
  }
}

TEST(Runs, SchemesAreNestedOnRandomInstances) {
  std::mt19937_64 rng(43);
  testing::RandomSpec spec;
  spec.max_entities = 18;
  spec.coauthor_degree = 2.0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(rng, spec));
    const MlnMatcher m(inst, rule_set_by_name(trial % 2 ? "learned" : "running-example"));
    const Cover cover = testing::random_cover(*inst, rng, 4);
    const MatchSet a = no_mp(m, cover).matches;
    const MatchSet b = smp(m, cover).matches;
    const MatchSet c = mmp(m, cover).matches;
    ASSERT_TRUE(a.is_subset_of(b));
    ASSERT_TRUE(b.is_subset_of(c));
    const MatchSet holistic = m.match(inst->all_entities(), {});
    ASSERT_TRUE(c.is_subset_of(holistic)) << "trial " << trial;
  }
}

TEST(Runs, RulesMatcherSmp) {
  const auto inst = std::make_shared<const Instance>(testing::running_example());
  const RulesMatcher r(inst);
  const Cover cover = testing::running_example_cover(*inst);
  EXPECT_EQ(smp(r, cover).matches, testing::pairs_of(*inst, {{"b1", "b2"}, {"c1", "c2"}}));
}

}  // namespace
}  // namespace cem

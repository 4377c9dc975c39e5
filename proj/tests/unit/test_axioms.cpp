#include <gtest/gtest.h>

#include <random>

#include "cem/axioms.hpp"
#include "cem/mln.hpp"
#include "support.hpp"

namespace cem {
namespace {

// Declares every pair of E unless E has more than two entities.
class ShrinkingMatcher final : public Matcher {
 public:
  explicit ShrinkingMatcher(std::shared_ptr<const Instance> inst) : inst_(std::move(inst)) {}
  std::string_view name() const override { return "shrinking"; }
  const Instance& instance() const override { return *inst_; }
  MatchSet match(const EntitySet& e, const Evidence& ev) const override {
    MatchSet out = ev.positive.restricted_to(e);
    if (e.size() <= 2) {
      for (const auto& p : candidate_pairs(e)) out.insert(p);
    }
    return out.minus(ev.negative);
  }

 private:
  std::shared_ptr<const Instance> inst_;
};

// Adds one fresh pair per call, driven by how much evidence it saw.
class GrowingMatcher final : public Matcher {
 public:
  explicit GrowingMatcher(std::shared_ptr<const Instance> inst) : inst_(std::move(inst)) {}
  std::string_view name() const override { return "growing"; }
  const Instance& instance() const override { return *inst_; }
  MatchSet match(const EntitySet& e, const Evidence& ev) const override {
    MatchSet out = ev.positive.restricted_to(e);
    for (const auto& p : candidate_pairs(e)) {
      if (!out.contains(p) && !ev.negative.contains(p)) {
        out.insert(p);
        break;
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const Instance> inst_;
};

// log P(S) = -|S|^2: every added pair costs more as S grows.
class SubmodularMatcher final : public ProbabilisticMatcher {
 public:
  explicit SubmodularMatcher(std::shared_ptr<const Instance> inst) : inst_(std::move(inst)) {}
  std::string_view name() const override { return "submodular"; }
  const Instance& instance() const override { return *inst_; }
  MatchSet match(const EntitySet& e, const Evidence& ev) const override {
    return type2_match(*this, e, ev);
  }
  LogScore log_score(const MatchSet& s) const override {
    const auto n = static_cast<double>(s.size());
    return LogScore::from_double(-n * n);
  }

 private:
  std::shared_ptr<const Instance> inst_;
};

std::shared_ptr<const Instance> small_instance() {
  Instance::Builder b;
  for (const char* id : {"a", "b", "c", "d"}) b.add_entity({id, "author", {{"name", id}}});
  b.add_tuple(rel::kSimilar, {"a", "b"}, 2).add_tuple(rel::kCoauthor, {"a", "c"});
  return std::make_shared<const Instance>(std::move(b).build());
}

TEST(Axioms, ShrinkingMatcherFailsClauseOne) {
  const auto inst = small_instance();
  const ShrinkingMatcher m(inst);
  const EntitySet ab{0, 1};
  const AxiomReport r = check_monotonicity(m, ab, {}, inst->all_entities(), {});
  EXPECT_FALSE(r.passed);
  ASSERT_EQ(r.parts.size(), 3u);
  EXPECT_FALSE(r.parts[0].passed);
  EXPECT_TRUE(r.parts[1].passed);
  EXPECT_TRUE(r.parts[2].passed);
  ASSERT_TRUE(r.counterexample);
  EXPECT_EQ(r.counterexample->offending, (MatchSet{{0, 1}}));
  EXPECT_NE(r.describe(*inst).find("offending={(a,b)}"), std::string::npos) << r.describe(*inst);
  EXPECT_FALSE(check_monotonicity_exhaustive(m, inst->all_entities()).passed);
}

TEST(Axioms, GrowingMatcherIsNotIdempotent) {
  const auto inst = small_instance();
  const GrowingMatcher m(inst);
  const AxiomReport r = check_idempotence(m, inst->all_entities(), {});
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.counterexample);
  EXPECT_EQ(r.counterexample->offending.size(), 1u);
}

TEST(Axioms, SubmodularScoreIsCaught) {
  const auto inst = small_instance();
  const SubmodularMatcher m(inst);
  const AxiomReport one = check_supermodularity(m, {}, MatchSet{{0, 1}}, EntityPair{0, 2});
  EXPECT_FALSE(one.passed);
  EXPECT_FALSE(check_supermodularity_exhaustive(m, EntitySet{0, 1, 2}).passed);
  EXPECT_THROW(check_supermodularity(m, MatchSet{{0, 1}}, {}, EntityPair{0, 2}), std::invalid_argument);
}

TEST(Axioms, InputValidation) {
  const auto inst = small_instance();
  const GrowingMatcher m(inst);
  EXPECT_THROW(check_monotonicity(m, inst->all_entities(), {}, EntitySet{0}, {}),
               std::invalid_argument);
  Instance::Builder b;
  for (int i = 0; i < 6; ++i) b.add_entity({"e" + std::to_string(i), "", {}});
  const auto six = std::make_shared<const Instance>(std::move(b).build());
  EXPECT_THROW(check_monotonicity_exhaustive(GrowingMatcher(six), six->all_entities()),
               std::invalid_argument);
}

TEST(Axioms, MlnSatisfiesAll) {
  std::mt19937_64 rng(21);
  testing::RandomSpec spec;
  spec.min_entities = 4;
  spec.max_entities = 5;
  spec.coauthor_degree = 2.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(rng, spec));
    const MlnMatcher m(inst, rule_set_by_name(trial % 2 ? "learned" : "running-example"));
    const EntitySet all = inst->all_entities();
    const AxiomReport sup = check_supermodularity_exhaustive(m, all);
    ASSERT_TRUE(sup.passed) << sup.describe(*inst);
    const AxiomReport mono = check_monotonicity_exhaustive(m, all);
    ASSERT_TRUE(mono.passed) << mono.describe(*inst);
    ASSERT_TRUE(check_idempotence(m, all, {}).passed);
  }
}

TEST(Axioms, ReferenceType2AgreesWithMln) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(rng));
    const MlnMatcher m(inst, rule_set_by_name("learned"));
    const EntitySet all = inst->all_entities();
    if (m.candidate_pairs(all).size() > 16) continue;
    ASSERT_EQ(m.match(all, {}), type2_match(m, all, {}));
  }
}

}  // namespace
}  // namespace cem

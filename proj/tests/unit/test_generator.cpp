#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "cem/generator.hpp"
#include "cem/io.hpp"

namespace cem {
namespace {

std::string dump(const Corpus& c) {
  std::ostringstream os;
  write_instance(os, c.instance);
  write_truth(os, c.truth, c.instance);
  return os.str();
}

TEST(Rng, BoundsAndDeterminism) {
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    ASSERT_EQ(x, b.below(7));
    ASSERT_LT(x, 7u);
    const double u = a.unit();
    ASSERT_EQ(u, b.unit());
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_THROW(a.below(0), std::invalid_argument);
  // The raw engine is mt19937_64; its 10000th output is fixed by the standard.
  Rng c(5489);
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = c.next();
  EXPECT_EQ(last, 9981545732273789042ULL);
}

TEST(Generator, SameSeedSameCorpus) {
  GenConfig c;
  c.authors = 120;
  c.seed = 9;
  EXPECT_EQ(dump(generate(c)), dump(generate(c)));
  GenConfig d = c;
  d.seed = 10;
  EXPECT_NE(dump(generate(c)), dump(generate(d)));
}

TEST(Generator, UnmutatedReferencesClusterByName) {
  GenConfig c;
  c.authors = 300;
  c.mutation_probability = 0;
  c.seed = 4;
  const Corpus corpus = generate(c);
  std::map<std::string, std::vector<EntityIndex>> by_name;
  for (EntityIndex e : corpus.instance.entities_of_kind("author")) {
    const Entity& a = corpus.instance.entity(e);
    const std::string* m = a.attribute("mname");
    by_name[*a.attribute("fname") + "|" + (m ? *m : "") + "|" + *a.attribute("lname")].push_back(e);
  }
  std::set<std::vector<EntityIndex>> name_clusters;
  for (auto& [k, v] : by_name) name_clusters.insert(v);
  std::set<std::vector<EntityIndex>> truth_clusters;
  for (const auto& cl : corpus.truth.clusters()) {
    if (corpus.instance.entity(cl.front()).kind == "author") truth_clusters.insert(cl);
  }
  EXPECT_EQ(name_clusters, truth_clusters);
}

TEST(Generator, CoauthorIsSelfJoinOfAuthored) {
  GenConfig c;
  c.authors = 200;
  c.seed = 2;
  const Instance inst = generate(c).instance;
  std::map<EntityIndex, std::vector<EntityIndex>> refs_of_paper;
  for (const auto& t : inst.relations().tuples(rel::kAuthored)) refs_of_paper[t.args[1]].push_back(t.args[0]);
  std::set<std::vector<EntityIndex>> expected;
  for (auto& [p, refs] : refs_of_paper) {
    for (std::size_t i = 0; i < refs.size(); ++i) {
      for (std::size_t j = i + 1; j < refs.size(); ++j) {
        expected.insert({std::min(refs[i], refs[j]), std::max(refs[i], refs[j])});
      }
    }
  }
  std::set<std::vector<EntityIndex>> actual;
  for (const auto& t : inst.relations().tuples(rel::kCoauthor)) actual.insert(t.args);
  EXPECT_EQ(actual, expected);
  EXPECT_TRUE(inst.relations().tuples(rel::kSimilar).empty());
  // Every reference is on exactly one paper; citations point backwards.
  for (EntityIndex r : inst.entities_of_kind("author")) {
    ASSERT_EQ(inst.out_neighbors(rel::kAuthored, r).size(), 1u);
  }
  for (const auto& t : inst.relations().tuples(rel::kCites)) ASSERT_GT(t.args[0], t.args[1]);
}

TEST(Generator, MutationOperators) {
  const Name n{"anna", "j", "lindqvist"};
  Rng rng(3);
  MutationOps only;
  only = MutationOps{false, false, false, false, false};
  only.abbreviate_first = true;
  EXPECT_EQ(mutate(n, only, rng).first, "a.");
  only = MutationOps{false, false, false, false, false};
  only.drop_middle = true;
  EXPECT_TRUE(mutate(n, only, rng).middle.empty());
  only = MutationOps{false, false, false, false, false};
  only.drop_char = true;
  EXPECT_EQ(mutate(n, only, rng).last.size(), n.last.size() - 1);
  only = MutationOps{false, false, false, false, false};
  only.substitute_char = true;
  for (int i = 0; i < 50; ++i) {
    const Name m = mutate(n, only, rng);
    ASSERT_EQ(m.last.size(), n.last.size());
    ASSERT_NE(m.last, n.last);
  }
  only = MutationOps{false, false, false, false, false};
  only.swap_chars = true;
  const Name s = mutate(n, only, rng);
  std::string a = s.last;
  std::string b = n.last;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Generator, ConfigValidation) {
  GenConfig c;
  c.authors = 0;
  EXPECT_THROW(generate(c), std::invalid_argument);
  c = GenConfig{};
  c.mutation_probability = 1.5;
  EXPECT_THROW(generate(c), std::invalid_argument);
  c = GenConfig{};
  c.ops = MutationOps{false, false, false, false, false};
  EXPECT_THROW(generate(c), std::invalid_argument);
}

// Frozen from a separate count over `cem generate --authors 1000 --seed 1`.
TEST(Generator, GoldenCorpusShape) {
  GenConfig c;
  c.authors = 1000;
  c.seed = 1;
  const Corpus corpus = generate(c);
  std::map<std::size_t, std::size_t> refs_per_author;
  for (const auto& cl : corpus.truth.clusters()) {
    if (corpus.instance.entity(cl.front()).kind == "author") ++refs_per_author[cl.size()];
  }
  const std::map<std::size_t, std::size_t> expected = {{1, 136}, {2, 224}, {3, 231}, {4, 191}, {5, 94}, {6, 42}, {7, 17}, {8, 7}, {9, 3}};
  EXPECT_EQ(refs_per_author, expected);
  EXPECT_EQ(corpus.instance.size(), 4165u);
  EXPECT_EQ(corpus.instance.relations().tuples(rel::kCoauthor).size(), 2923u);
  EXPECT_EQ(corpus.instance.relations().tuples(rel::kCites).size(), 904u);
  EXPECT_EQ(corpus.truth.pair_count(), 4294u);
}

}  // namespace
}  // namespace cem

#include <gtest/gtest.h>

#include <random>

#include "cem/similarity.hpp"

namespace cem {
namespace {

TEST(JaroWinkler, TextbookValues) {
  EXPECT_NEAR(jaro("MARTHA", "MARHTA"), 0.944444, 1e-6);
  EXPECT_NEAR(jaro_winkler("MARTHA", "MARHTA"), 0.961111, 1e-6);
  EXPECT_NEAR(jaro_winkler("DWAYNE", "DUANE"), 0.840000, 1e-6);
  EXPECT_NEAR(jaro_winkler("DIXON", "DICKSONX"), 0.813333, 1e-6);
  EXPECT_DOUBLE_EQ(jaro_winkler("same", "same"), 1.0);
  EXPECT_DOUBLE_EQ(jaro_winkler("abc", "xyz"), 0.0);
  EXPECT_DOUBLE_EQ(jaro_winkler("", ""), 1.0);
  EXPECT_DOUBLE_EQ(jaro_winkler("", "a"), 0.0);
}

std::string random_word(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> ch(0, 7);
  std::string s(static_cast<std::size_t>(len(rng)), 'a');
  for (auto& c : s) c = static_cast<char>('a' + ch(rng));
  return s;
}

TEST(JaroWinkler, BoundsNeverUnderestimate) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    const std::string a = random_word(rng);
    const std::string b = random_word(rng);
    const double v = jaro_winkler(a, b);
    ASSERT_GE(jaro_winkler_bound(a.size(), b.size()) + 1e-12, v) << a << " / " << b;
    ASSERT_GE(jaro_winkler_bound(CharProfile(a), CharProfile(b)) + 1e-12, v) << a << " / " << b;
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Thresholds, LevelsAndValidation) {
  SimilarityThresholds t;
  EXPECT_EQ(t.level(0.96), 3);
  EXPECT_EQ(t.level(0.95), 3);
  EXPECT_EQ(t.level(0.90), 2);
  EXPECT_EQ(t.level(0.80), 1);
  EXPECT_EQ(t.level(0.79), 0);
  t.level1 = 0.9;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(AuthorName, SurnameFirstLowercase) {
  Entity e{"x", "author", {{"fname", "Ann"}, {"lname", "Lee"}, {"mname", "J"}}};
  EXPECT_EQ(author_name(e), "lee ann j");
  Entity full{"y", "author", {{"name", "Ann Lee"}}};
  EXPECT_EQ(author_name(full), "ann lee");
  Entity none{"z", "author", {}};
  EXPECT_THROW(author_name(none), std::invalid_argument);
}

TEST(Discretize, SymmetricAndMonotoneInNames) {
  Entity a{"a", "author", {{"fname", "anna"}, {"lname", "lindqvist"}}};
  Entity b{"b", "author", {{"fname", "a"}, {"lname", "lindqvist"}}};
  Entity c{"c", "author", {{"fname", "boris"}, {"lname", "chandra"}}};
  EXPECT_EQ(discretize_similarity(a, a), 3);
  EXPECT_EQ(discretize_similarity(a, b), discretize_similarity(b, a));
  EXPECT_GT(discretize_similarity(a, b), 0);
  EXPECT_EQ(discretize_similarity(a, c), 0);
}

}  // namespace
}  // namespace cem

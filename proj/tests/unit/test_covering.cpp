#include <gtest/gtest.h>

#include <random>

#include "cem/covering.hpp"
#include "cem/similarity.hpp"
#include "support.hpp"

namespace cem {
namespace {

std::vector<std::string> ids(const Instance& inst, const EntitySet& s) {
  std::vector<std::string> out;
  for (EntityIndex e : s) out.push_back(inst.id(e));
  return out;
}

Instance coauthor_only(const Instance& inst) {
  Instance::Builder b;
  for (const auto& e : inst.entities()) b.add_entity(e);
  for (const auto& t : inst.relations().tuples(rel::kCoauthor)) {
    b.add_tuple(rel::kCoauthor, {inst.id(t.args[0]), inst.id(t.args[1])});
  }
  return std::move(b).build();
}

TEST(Boundary, RunningExample) {
  const Instance inst = testing::running_example();
  const EntitySet c1{inst.index_of("c1")};
  EXPECT_EQ(ids(inst, boundary(c1, inst)), (std::vector<std::string>{"b1", "c2", "c3", "d1"}));
  const Instance co = coauthor_only(inst);
  EXPECT_EQ(ids(co, boundary(EntitySet{co.index_of("c1")}, co)), (std::vector<std::string>{"b1", "d1"}));
  EXPECT_TRUE(boundary(inst.all_entities(), inst).empty());
}

TEST(Totality, ShippedCoverIsTotal) {
  const Instance inst = testing::running_example();
  const Cover cover = testing::running_example_cover(inst);
  EXPECT_TRUE(cover.total);
  EXPECT_TRUE(verify_total(cover, inst).total);
  EXPECT_EQ(cover.max_neighborhood(), 6u);
  EXPECT_EQ(cover.neighborhoods[1].induced, induced_relations(inst, cover.neighborhoods[1].members));
}

TEST(Totality, DroppingTheMiddleNeighborhoodLosesOneTuple) {
  const Instance inst = testing::running_example();
  auto sets = testing::running_example_cover_sets(inst);
  const Cover partial = make_cover(inst, {sets[0], sets[2]});
  EXPECT_FALSE(partial.total);
  const TotalityReport r = verify_total(partial, inst);
  ASSERT_EQ(r.missing.size(), 1u);
  EXPECT_EQ(r.missing[0].relation, "Coauthor");
  EXPECT_EQ(r.missing[0].tuple.args,
            (std::vector<EntityIndex>{inst.index_of("b1"), inst.index_of("c1")}));
  const Cover fixed = make_total(partial, inst);
  EXPECT_TRUE(fixed.total);
}

TEST(Cover, MustCoverEveryEntity) {
  const Instance inst = testing::running_example();
  EXPECT_THROW(make_cover(inst, {EntitySet{0, 1}}), std::invalid_argument);
}

TEST(Totality, MakeTotalOnRandomCovers) {
  std::mt19937_64 rng(31);
  testing::RandomSpec spec;
  spec.max_entities = 25;
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = testing::random_instance(rng, spec);
    std::vector<EntitySet> singletons;
    for (EntityIndex e = 0; e < inst.size(); ++e) singletons.push_back(EntitySet{e});
    const Cover total = make_total(make_cover(inst, singletons), inst);
    ASSERT_TRUE(verify_total(total, inst).total);
    const Cover random = testing::random_cover(inst, rng, 5);
    ASSERT_TRUE(verify_total(random, inst).total);
  }
}

TEST(Canopy, ThresholdsAndSeeds) {
  // Entities on a line; similarity falls off with distance.
  const EntitySet e{0, 1, 2, 3, 4, 5};
  auto sim = [](EntityIndex a, EntityIndex b) {
    const int d = std::abs(static_cast<int>(a) - static_cast<int>(b));
    return 1.0 - d / 8.0;
  };
  const auto canopies = canopy_cover(e, sim, 0.75, 0.875);
  // Seed 0 takes {0,1,2}, removes 1; seed 2 takes {0..4}, removes 3; seed 4 ...
  ASSERT_EQ(canopies.size(), 3u);
  EXPECT_EQ(canopies[0], (EntitySet{0, 1, 2}));
  EXPECT_EQ(canopies[1], (EntitySet{0, 1, 2, 3, 4}));
  EXPECT_EQ(canopies[2], (EntitySet{2, 3, 4, 5}));
  EXPECT_THROW(canopy_cover(e, sim, 0.9, 0.8), std::invalid_argument);
  // tight = loose = 1: one canopy per distinct point.
  EXPECT_EQ(canopy_cover(e, sim, 1.0, 1.0).size(), 6u);
}

TEST(Canopy, ProfileBoundDoesNotChangeAuthorCanopies) {
  Instance::Builder b;
  const char* names[] = {"anna lee", "ana lee", "anna li", "boris chandra", "b chandra",
                         "boris chandr", "carla moreau", "karla moreau", "carl moreau", "x"};
  for (int i = 0; i < 10; ++i) b.add_entity({"e" + std::to_string(i), "author", {{"name", names[i]}}});
  const Instance inst = std::move(b).build();
  const EntitySet all = inst.all_entities();
  for (double loose : {0.7, 0.8, 0.88}) {
    const double tight = std::min(1.0, loose + 0.07);
    auto plain = canopy_cover(
        all,
        [&](EntityIndex x, EntityIndex y) {
          const auto nx = author_name(inst.entity(x));
          const auto ny = author_name(inst.entity(y));
          return nx <= ny ? jaro_winkler(nx, ny) : jaro_winkler(ny, nx);
        },
        loose, tight);
    EXPECT_EQ(author_canopies(inst, all, loose, tight), plain);
  }
}

}  // namespace
}  // namespace cem

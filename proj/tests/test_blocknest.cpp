#include <gtest/gtest.h>

#include <vector>

#include "lcf/blocknest.hpp"

using namespace lcf;

namespace {

LatticePath straight(std::int64_t len) {
  std::vector<Vertex> vs;
  for (std::int64_t x = 0; x <= len; ++x) vs.push_back({x, 0});
  return LatticePath(vs, true);
}

std::vector<Vertex> row(std::initializer_list<std::int64_t> xs) {
  std::vector<Vertex> out;
  for (auto x : xs) out.push_back({x, 0});
  return out;
}

}  // namespace

TEST(DyadicBox, ContainingBoxUsesFloor) {
  EXPECT_EQ(dyadic_box_containing({-1, 5}, 2).corner, (Vertex{-4, 4}));
  EXPECT_EQ(dyadic_box_containing({7, 8}, 3).corner, (Vertex{0, 8}));
  const DyadicBox b{2, {4, 8}};
  EXPECT_TRUE(b.is_dyadic());
  EXPECT_EQ(b.rect(), (Rect{4, 8, 7, 11}));
  const auto [star, dstar] = enlargements(b);
  EXPECT_EQ(star, (Rect{0, 4, 11, 15}));
  EXPECT_EQ(dstar, (Rect{-8, -4, 19, 23}));
}

TEST(Traversing, ExtractFromStraightPath) {
  const auto p = straight(40);
  const auto t = extract_traversing(p, DyadicBox{3, {8, 0}});
  EXPECT_EQ(t.first, 8u);
  EXPECT_EQ(t.last, 23u);
  EXPECT_TRUE(is_traversing(p, t));
  EXPECT_THROW(extract_traversing(straight(10), DyadicBox{3, {8, 0}}), Error);
}

TEST(BlockNest, HandComputedSingleSectionCase) {
  // n=8, k=2, δ=0.9: m=4, j0=⌊0.595·4⌋=2, K1=1, K2=2.
  const auto out = block_nest(straight(100), build_grid_spec(8, 2), 0.9, 1);
  EXPECT_EQ(out.params.j0, 2);
  EXPECT_EQ(out.params.K1, 1);
  EXPECT_EQ(out.params.K2, 2);
  EXPECT_EQ(out.family(2).blocks, (std::vector<DyadicBox>{{4, {0, 0}}}));
  EXPECT_EQ(out.family(2).sections[0].last, 31u);
  EXPECT_EQ(out.family(1).blocks, (std::vector<DyadicBox>{{2, {0, 0}}}));
  EXPECT_EQ(out.family(1).sections[0].last, 7u);
  EXPECT_EQ(out.Q, row({0, 2}));
  EXPECT_TRUE(verify_output(out).pass());
}

TEST(BlockNest, HandComputedTwoSectionCase) {
  // n=12, k=3, δ=0.9: j0=2, K1=2, K2=4; the second block starts where the
  // path leaves the first B** = [−24, 31]² for good.
  const auto out = block_nest(straight(300), build_grid_spec(12, 3), 0.9, 1);
  ASSERT_EQ(out.params.j0, 2);
  const auto& f1 = out.family(1);
  EXPECT_EQ(f1.blocks, (std::vector<DyadicBox>{{3, {0, 0}}, {3, {32, 0}}}));
  EXPECT_EQ(f1.sections[0].first, 0u);
  EXPECT_EQ(f1.sections[0].last, 15u);
  EXPECT_EQ(f1.sections[1].first, 32u);
  EXPECT_EQ(f1.sections[1].last, 47u);
  EXPECT_EQ(out.Q, row({0, 2, 4, 6, 32, 34, 36, 38}));
  EXPECT_TRUE(verify_output(out).pass());
}

TEST(BlockNest, QLevelOnlyWhenJ0IsOne) {
  const auto out = block_nest(straight(40), build_grid_spec(9, 3), 0.9, 1);
  EXPECT_EQ(out.params.j0, 1);
  EXPECT_EQ(out.Q, row({0, 2, 4, 6}));
}

TEST(BlockNest, RandomPathsSatisfyStructure) {
  const auto spec = build_grid_spec(15, 3);
  const auto p = nest_params(spec, 0.4, 1);
  EXPECT_EQ(p.j0, 4);
  EXPECT_EQ(p.K1, 2);
  EXPECT_EQ(p.K2, 4);
  const std::int64_t need = 4 * (std::int64_t{1} << (p.j0 * p.k));
  Rng rng(2024);
  for (int t = 0; t < 10; ++t) {
    const auto path = t % 2 ? random_loop_erased_path(spec, rng, need) : random_staircase_path(spec, rng, need);
    ASSERT_GT(path.distance(), need);
    const auto out = block_nest(path, spec, 0.4, 1);
    EXPECT_EQ(out.Q.size(), 32u);
    for (std::size_t i = 0; i < out.Q.size(); ++i) EXPECT_EQ(path[out.q_indices[i]], out.Q[i]);
    for (int j = 1; j <= p.j0; ++j)
      for (const auto& s : out.family(j).sections) EXPECT_TRUE(is_traversing(path, s));
    const auto rep = verify_output(out, path);
    EXPECT_TRUE(rep.pass()) << rep.first_failure;
  }
}

TEST(BlockNest, CorruptedOutputsFailVerification) {
  const auto spec = build_grid_spec(15, 3);
  Rng rng(7);
  const auto path = random_staircase_path(spec, rng, 4 * (std::int64_t{1} << 12));
  const auto good = block_nest(path, spec, 0.4, 1);
  ASSERT_TRUE(verify_output(good).pass());

  auto dup = good;
  dup.Q[1] = dup.Q[0];
  EXPECT_FALSE(verify_output(dup).separated_points);

  auto dropped = good;
  dropped.Q.pop_back();
  EXPECT_FALSE(verify_output(dropped).counts);

  auto moved = good;
  auto& blocks = moved.families[moved.families.size() - 1].blocks;
  blocks[1] = blocks[0];
  const auto rep = verify_output(moved);
  EXPECT_FALSE(rep.separated_blocks);
  EXPECT_FALSE(rep.pass());

  // a one-step shift keeps (a)-(c) but leaves the path
  auto shifted = good;
  shifted.Q[5].x += 1;
  EXPECT_FALSE(verify_output(shifted, path).on_path);
  EXPECT_TRUE(verify_output(good, path).pass());
}

TEST(BlockNest, RejectsInvalidInputs) {
  const auto spec = build_grid_spec(15, 3);
  EXPECT_THROW(block_nest(straight(100), spec, 0.4, 1), Error);  // too short
  std::vector<Vertex> loop{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  EXPECT_THROW(block_nest(LatticePath(loop), spec, 0.4, 1), Error);
  EXPECT_THROW(nest_params(build_grid_spec(10, 1), 0.4, 1), Error);
  EXPECT_THROW(nest_params(spec, 0.4, 0), Error);
  EXPECT_THROW(nest_params(spec, 1.2, 1), Error);
  EXPECT_THROW(nest_params(build_grid_spec(6, 3), 0.4, 9), Error);  // K2 = 0
}

TEST(BlockNest, CountBoundsOnCorpus) {
  const auto spec = build_grid_spec(15, 3);
  std::vector<LatticePath> corpus;
  Rng rng(99);
  for (int t = 0; t < 12; ++t) corpus.push_back(random_loop_erased_path(spec, rng, 4 * (std::int64_t{1} << 12)));
  const auto rep = count_bound_check(spec, 0.4, 1, 3, corpus);
  EXPECT_EQ(rep.paths, 12u);
  EXPECT_DOUBLE_EQ(rep.log2_family_bound, 18.0);
  EXPECT_NEAR(rep.log2_output_bound, 3.0 + 32.0 * std::log2(13.0), 1e-12);
  EXPECT_LE(rep.observed_families, 12u);
  EXPECT_TRUE(rep.within_bounds);
  EXPECT_FALSE(rep.kprime_condition);
}

TEST(PathCorpus, GeneratorsProduceLongSelfAvoidingPaths) {
  const auto spec = build_grid_spec(10, 2);
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_staircase_path(spec, rng, 500);
    const auto b = random_loop_erased_path(spec, rng, 500);
    for (const auto* p : {&a, &b}) {
      EXPECT_TRUE(p->self_avoiding());
      EXPECT_GT(p->distance(), 500);
      for (const auto& v : p->vertices()) EXPECT_TRUE(spec.contains(v));
    }
  }
}

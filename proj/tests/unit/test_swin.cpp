#include <gtest/gtest.h>

#include "mtml/swin.hpp"

namespace mtml {
namespace {

TEST(Swin, HeadsPerWidth) {
  EXPECT_EQ(heads_for_width(16), 1);
  EXPECT_EQ(heads_for_width(32), 1);
  EXPECT_EQ(heads_for_width(64), 2);
  EXPECT_EQ(heads_for_width(128), 4);
  EXPECT_EQ(heads_for_width(256), 8);
}

TEST(Swin, MergeAndSplitAreInverse) {
  const Grid g{4, 6};
  const auto x = torch::randn({2, g.tokens(), 12});
  const auto merged = merge_2x2(x, g);
  ASSERT_EQ(merged.sizes(), (std::vector<int64_t>{2, 6, 48}));
  EXPECT_TRUE(torch::equal(split_2x2(merged, {2, 3}), x));
}

TEST(Swin, MergeGathersSpatialNeighbours) {
  // A 2x2 grid of scalar tokens 0..3 merges into a single token holding all four.
  const auto x = torch::arange(4, torch::kFloat).view({1, 4, 1});
  const auto m = merge_2x2(x, Grid{2, 2});
  EXPECT_TRUE(torch::equal(std::get<0>(m.sort(-1)).flatten(), torch::arange(4, torch::kFloat)));
}

TEST(Swin, BlockKeepsShapeAndClampsWindow) {
  torch::manual_seed(0);
  SwinBlock small(32, 1, 8, true, 2, Grid{4, 4});
  EXPECT_EQ(small->window(), 4);
  EXPECT_EQ(small->shift(), 0);
  SwinBlock shifted(32, 1, 4, true, 2, Grid{8, 8});
  EXPECT_EQ(shifted->window(), 4);
  EXPECT_EQ(shifted->shift(), 2);
  const auto x = torch::randn({2, 64, 32});
  EXPECT_EQ(shifted->forward(x).sizes(), x.sizes());
}

TEST(Swin, ShiftedWindowsMixAcrossBoundaries) {
  // With the shift, a token's output depends on tokens outside its unshifted window.
  torch::manual_seed(1);
  SwinStage stage(32, 2, 4, 2, Grid{8, 8});
  torch::NoGradGuard g;
  auto x = torch::randn({1, 64, 32});
  const auto base = stage->forward(x);
  auto y = x.clone();
  y[0][36] += 1.0;  // (4,4): other regular window than (2,2), same shifted window
  const auto moved = stage->forward(y);
  EXPECT_GT((moved[0][18] - base[0][18]).abs().max().item<double>(), 0.0);
}

TEST(Swin, UnshiftedWindowsAreIndependent) {
  torch::manual_seed(2);
  SwinStage stage(32, 1, 4, 2, Grid{8, 8});
  torch::NoGradGuard g;
  auto x = torch::randn({1, 64, 32});
  const auto base = stage->forward(x);
  auto y = x.clone();
  y[0][36] += 1.0;
  EXPECT_TRUE(torch::equal(stage->forward(y)[0][18], base[0][18]));
}

TEST(Swin, PatchOps) {
  torch::manual_seed(3);
  PatchEmbed embed(3, 16);
  PatchMerging merge(16, 32, Grid{8, 8});
  PatchDivision divide(32, 16, Grid{4, 4});
  const auto t = embed->forward(torch::rand({2, 3, 16, 16}));
  EXPECT_EQ(t.sizes(), (std::vector<int64_t>{2, 64, 16}));
  const auto m = merge->forward(t);
  EXPECT_EQ(m.sizes(), (std::vector<int64_t>{2, 16, 32}));
  EXPECT_EQ(divide->forward(m).sizes(), (std::vector<int64_t>{2, 64, 16}));
}

}  // namespace
}  // namespace mtml

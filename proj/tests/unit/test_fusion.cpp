#include <cmath>

#include <gtest/gtest.h>

#include "mtml/errors.hpp"
#include "mtml/fusion.hpp"

namespace mtml {
namespace {

FusionOptions small_fusion() {
  FusionOptions o;
  o.groups = 6;
  o.patch_len = 8;
  o.heads = 2;
  o.head_dim = 4;
  o.proj_len = 32;
  return o;
}

TEST(Attention, MatchesBruteForce) {
  torch::manual_seed(0);
  const auto q = torch::randn({3, 5}, torch::kDouble);
  const auto k = torch::randn({4, 5}, torch::kDouble);
  const auto v = torch::randn({4, 2}, torch::kDouble);
  const auto r = scaled_dot_attention(q, k, v);
  for (int64_t i = 0; i < 3; ++i) {
    std::vector<double> s(4);
    double z = 0.0;
    for (int64_t j = 0; j < 4; ++j) {
      double dot = 0.0;
      for (int64_t d = 0; d < 5; ++d) dot += q[i][d].item<double>() * k[j][d].item<double>();
      s[j] = std::exp(dot / std::sqrt(5.0));
      z += s[j];
    }
    for (int64_t c = 0; c < 2; ++c) {
      double want = 0.0;
      for (int64_t j = 0; j < 4; ++j) want += s[j] / z * v[j][c].item<double>();
      EXPECT_NEAR(r.output[i][c].item<double>(), want, 1e-12);
    }
  }
}

TEST(Attention, DegenerateKeysAndValuesReturnTheCommonRow) {
  torch::manual_seed(1);
  const auto q = torch::randn({2, 3, 4, 4}, torch::kDouble);
  const auto k = torch::randn({2, 3, 1, 4}, torch::kDouble).expand({2, 3, 4, 4});
  const auto v = torch::randn({2, 3, 1, 4}, torch::kDouble).expand({2, 3, 4, 4});
  const auto r = scaled_dot_attention(q, k, v);
  EXPECT_LT((r.output - v).abs().max().item<double>(), 1e-6);
  EXPECT_LT((r.weights - 0.25).abs().max().item<double>(), 1e-12);
}

TEST(MutualAttention, ShapesAndWeights) {
  torch::manual_seed(2);
  MutualAttention fusion(small_fusion());
  torch::NoGradGuard g;
  const auto r = fusion->forward_with_weights(torch::randn({3, 6, 8}), torch::randn({3, 6, 8}));
  EXPECT_EQ(r.output.sizes(), (std::vector<int64_t>{3, 6, 8}));
  EXPECT_EQ(r.weights.sizes(), (std::vector<int64_t>{3, 6, 2, 4, 4}));
  EXPECT_LT((r.weights.sum(-1) - 1.0).abs().max().item<double>(), 1e-6);
  EXPECT_GE(r.weights.min().item<double>(), 0.0);
}

TEST(MutualAttention, DegenerateProjectionsReturnTheCommonValue) {
  // Zero key/value maps with token-periodic biases make every SD token in a head
  // identical, so each head must return that value whatever the RD query is.
  torch::manual_seed(3);
  const auto o = small_fusion();
  MutualAttention fusion(o);
  fusion->to(torch::kDouble);
  torch::NoGradGuard g;
  const auto row = torch::randn({o.head_dim}, torch::kDouble);
  fusion->key_weight.zero_();
  fusion->value_weight.zero_();
  fusion->key_bias.copy_(torch::randn({o.groups, o.heads, 1, o.head_dim}, torch::kDouble)
                             .expand({o.groups, o.heads, o.tokens_per_head(), o.head_dim})
                             .reshape({o.groups, o.proj_len}));
  fusion->value_bias.copy_(row.repeat({o.groups, o.proj_len / o.head_dim}));
  const auto out = fusion->forward(torch::randn({2, o.groups, 8}, torch::kDouble),
                                   torch::randn({2, o.groups, 8}, torch::kDouble));
  const auto expected = fusion->output->forward(row.repeat({o.proj_len / o.head_dim})).expand_as(out);
  EXPECT_LT((out - expected).abs().max().item<double>(), 1e-6);
}

TEST(MutualAttention, GroupPermutationEquivariance) {
  torch::manual_seed(4);
  const auto o = small_fusion();
  MutualAttention a(o);
  MutualAttention b(o);
  const auto perm = torch::tensor({3L, 0L, 5L, 1L, 4L, 2L});
  torch::NoGradGuard g;
  b->query_weight.copy_(a->query_weight.index_select(0, perm));
  b->query_bias.copy_(a->query_bias.index_select(0, perm));
  b->key_weight.copy_(a->key_weight.index_select(0, perm));
  b->key_bias.copy_(a->key_bias.index_select(0, perm));
  b->value_weight.copy_(a->value_weight.index_select(0, perm));
  b->value_bias.copy_(a->value_bias.index_select(0, perm));
  b->output->weight.copy_(a->output->weight);
  b->output->bias.copy_(a->output->bias);
  const auto sd = torch::randn({2, 6, 8});
  const auto rd = torch::randn({2, 6, 8});
  const auto ref = a->forward(sd, rd).index_select(1, perm);
  const auto got = b->forward(sd.index_select(1, perm), rd.index_select(1, perm));
  EXPECT_LT((ref - got).abs().max().item<double>(), 1e-6);
}

TEST(MutualAttention, GroupsDoNotInteract) {
  torch::manual_seed(5);
  MutualAttention fusion(small_fusion());
  torch::NoGradGuard g;
  auto sd = torch::randn({1, 6, 8});
  const auto rd = torch::randn({1, 6, 8});
  const auto base = fusion->forward(sd, rd);
  sd[0][4] += 3.0;
  const auto moved = fusion->forward(sd, rd);
  for (int64_t j = 0; j < 6; ++j) {
    if (j == 4) {
      EXPECT_FALSE(torch::equal(moved[0][j], base[0][j]));
    } else {
      EXPECT_TRUE(torch::equal(moved[0][j], base[0][j]));
    }
  }
}

TEST(MutualAttention, ShapeErrors) {
  MutualAttention fusion(small_fusion());
  EXPECT_THROW(fusion->forward(torch::randn({1, 6, 8}), torch::randn({1, 5, 8})), ShapeError);
  EXPECT_THROW(fusion->forward(torch::randn({1, 5, 8}), torch::randn({1, 5, 8})), ShapeError);
  EXPECT_THROW(fusion->forward(torch::randn({1, 6, 6}), torch::randn({1, 6, 6})), ShapeError);
  auto bad = small_fusion();
  bad.proj_len = 30;
  EXPECT_THROW(MutualAttention{bad}, ShapeError);
}

}  // namespace
}  // namespace mtml

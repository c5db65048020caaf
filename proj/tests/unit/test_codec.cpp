#include <chrono>

#include <gtest/gtest.h>

#include "mtml/class_codec.hpp"
#include "mtml/classifiers.hpp"
#include "mtml/errors.hpp"
#include "mtml/jscc.hpp"

namespace mtml {
namespace {

CodecOptions small_codec(int64_t side = 16) {
  CodecOptions o;
  o.image_size = side;
  o.blocks = {1, 2};
  o.widths = {16, 32};
  o.window = 4;
  o.mlp_ratio = 2;
  o.patch_len = 8;
  return o;
}

TEST(Jscc, ShapesAtStl10Size) {
  torch::manual_seed(0);
  CodecOptions o;
  o.image_size = 96;
  o.widths = {16, 32};
  o.window = 8;
  JsccEncoder enc(o);
  JsccDecoder dec(o);
  torch::NoGradGuard g;
  const auto x = enc->encode(torch::rand({1, 3, 96, 96}));
  ASSERT_EQ(x.values.sizes(), (std::vector<int64_t>{1, 576, 4}));
  EXPECT_TRUE(x.values.is_complex());
  const auto img = dec->forward(complex_to_real(x.values));
  EXPECT_EQ(img.sizes(), (std::vector<int64_t>{1, 3, 96, 96}));
}

TEST(Jscc, DecoderOutputInUnitRange) {
  torch::manual_seed(1);
  JsccDecoder dec(small_codec());
  torch::NoGradGuard g;
  const auto img = dec->forward(torch::randn({3, 16, 8}) * 50.0);
  EXPECT_GE(img.min().item<double>(), 0.0);
  EXPECT_LE(img.max().item<double>(), 1.0);
}

TEST(Jscc, DeterministicForFixedWeights) {
  torch::manual_seed(2);
  JsccEncoder enc(small_codec());
  torch::NoGradGuard g;
  const auto img = torch::rand({2, 3, 16, 16});
  EXPECT_TRUE(torch::equal(enc->forward(img), enc->forward(img)));
}

TEST(Jscc, ShapeErrors) {
  torch::manual_seed(3);
  JsccEncoder enc(small_codec());
  JsccDecoder dec(small_codec());
  EXPECT_THROW(enc->forward(torch::rand({2, 3, 32, 32})), ShapeError);
  EXPECT_THROW(enc->forward(torch::rand({2, 1, 16, 16})), ShapeError);
  EXPECT_THROW(dec->forward(torch::rand({2, 15, 8})), ShapeError);
  EXPECT_THROW(dec->forward(torch::rand({2, 16, 6})), ShapeError);
}

TEST(PowerConstraint, EveryEncoderOutputHasUnitSymbolPower) {
  const auto start = std::chrono::steady_clock::now();
  torch::manual_seed(4);
  const auto o = small_codec();
  JsccEncoder plain(o);
  ClassAidedEncoder aided(o, 10);
  torch::NoGradGuard g;
  for (int batch = 0; batch < 100; ++batch) {
    const auto img = torch::rand({4, 3, 16, 16}) * (batch % 3 == 0 ? 0.01 : 1.0);
    const auto labels = torch::randint(0, 10, {4}, torch::kLong);
    for (const auto& x : {plain->encode(img).values, aided->encode(img, labels).values}) {
      const auto p = x.abs().square().to(torch::kDouble).mean({1, 2});
      ASSERT_LT((p - 1.0).abs().max().item<double>(), 1e-5) << "batch " << batch;
    }
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
}

TEST(LabelGate, IsPurelyMultiplicative) {
  torch::manual_seed(5);
  LabelGate gate(4, 8);
  torch::NoGradGuard g;
  const auto tokens = torch::randn({3, 5, 8});
  const auto labels = torch::tensor({0L, 3L, 1L});
  const auto gates = gate->gate(labels);
  ASSERT_EQ(gates.sizes(), (std::vector<int64_t>{3, 8}));
  EXPECT_TRUE(torch::allclose(gate->forward(tokens, labels), tokens * gates.unsqueeze(1)));
  // a zero entry silences that channel on every token
  auto zeroed = gates.clone();
  zeroed.select(1, 2).zero_();
  EXPECT_TRUE(torch::equal(apply_gate(tokens, zeroed).select(2, 2), torch::zeros({3, 5})));
}

TEST(LabelGate, DistinctLabelsGiveDistinctGates) {
  torch::manual_seed(6);
  LabelGate gate(10, 16);
  torch::NoGradGuard g;
  const auto all = gate->gate(torch::arange(10, torch::kLong));
  for (int64_t a = 0; a < 10; ++a) {
    for (int64_t b = a + 1; b < 10; ++b) EXPECT_FALSE(torch::equal(all[a], all[b]));
  }
}

TEST(LabelGate, StartsNearOneAndCanBeForcedToOne) {
  torch::manual_seed(7);
  LabelGate gate(10, 32);
  torch::NoGradGuard g;
  const auto gates = gate->gate(torch::arange(10, torch::kLong));
  EXPECT_LT((gates - 1.0).abs().max().item<double>(), 0.5);
  gate->force_unit_gate();
  EXPECT_TRUE(torch::equal(gate->gate(torch::arange(10, torch::kLong)), torch::ones({10, 32})));
}

TEST(LabelGate, RejectsBadLabels) {
  LabelGate gate(10, 8);
  EXPECT_THROW(gate->gate(torch::tensor({10L})), LabelError);
  EXPECT_THROW(gate->gate(torch::tensor({-1L})), LabelError);
  EXPECT_THROW(gate->gate(torch::tensor({1.0f})), LabelError);
  EXPECT_THROW(gate->gate(torch::zeros({2, 2}, torch::kLong)), LabelError);
}

TEST(ClassAided, UnitGatesMatchPlainCodecExactly) {
  torch::manual_seed(8);
  const auto o = small_codec();
  ClassAidedEncoder enc(o, 10);
  ClassAidedDecoder dec(o, 10);
  enc->gate(1)->force_unit_gate();
  enc->gate(2)->force_unit_gate();
  dec->gate()->force_unit_gate();
  torch::NoGradGuard g;
  const auto img = torch::rand({3, 3, 16, 16});
  const auto labels = torch::tensor({0L, 4L, 9L});
  EXPECT_TRUE(torch::equal(enc->encode(img, labels).values, enc->backbone()->encode(img).values));
  const auto y = torch::randn({3, 16, 8});
  EXPECT_TRUE(torch::equal(dec->forward(y, labels), dec->backbone()->forward(y)));
}

TEST(ClassAided, LabelChangesOutputs) {
  torch::manual_seed(9);
  const auto o = small_codec();
  ClassAidedEncoder enc(o, 10);
  ClassAidedDecoder dec(o, 10);
  torch::NoGradGuard g;
  const auto img = torch::rand({1, 3, 16, 16});
  EXPECT_FALSE(torch::equal(enc->forward(img, torch::tensor({1L})), enc->forward(img, torch::tensor({2L}))));
  const auto y = torch::randn({1, 16, 8});
  const auto a = dec->forward(y, torch::tensor({1L}));
  EXPECT_FALSE(torch::equal(a, dec->forward(y, torch::tensor({2L}))));
  EXPECT_GE(a.min().item<double>(), 0.0);
  EXPECT_LE(a.max().item<double>(), 1.0);
  EXPECT_TRUE(torch::equal(a, dec->forward(y, torch::tensor({1L}))));
}

TEST(ClassAided, GatesAreIndependentPerInjectionPoint) {
  torch::manual_seed(10);
  ClassAidedEncoder enc(small_codec(), 10);
  EXPECT_EQ(enc->gate(1)->width(), 16);
  EXPECT_EQ(enc->gate(2)->width(), 32);
  ClassAidedDecoder dec(small_codec(), 10);
  EXPECT_EQ(dec->gate()->width(), 16);
}

TEST(Classifiers, ShapesAndPrediction) {
  torch::manual_seed(11);
  const auto o = small_codec();
  ImageClassifier relay(o, 10);
  SignalClassifier dest(o, 10);
  torch::NoGradGuard g;
  EXPECT_EQ(relay->forward(torch::rand({2, 3, 16, 16})).sizes(), (std::vector<int64_t>{2, 10}));
  EXPECT_EQ(dest->forward(torch::randn({2, 16, 8})).sizes(), (std::vector<int64_t>{2, 10}));
  const auto logits = torch::tensor({{0.1, 2.0, -1.0}, {3.0, 2.0, 1.0}});
  EXPECT_TRUE(torch::equal(predict(logits), torch::tensor({1L, 0L})));
}

TEST(Classifiers, ArgmaxIsShiftInvariant) {
  torch::manual_seed(12);
  for (int i = 0; i < 50; ++i) {
    const auto logits = torch::randn({8, 10}, torch::kDouble);
    const auto shift = torch::randn({8, 1}, torch::kDouble) * 100.0;
    EXPECT_TRUE(torch::equal(predict(logits), predict(logits + shift)));
  }
}

}  // namespace
}  // namespace mtml

#include <set>
#include <type_traits>

#include <gtest/gtest.h>

#include "mtml/errors.hpp"
#include "mtml/pipeline.hpp"
#include "tiny.hpp"

namespace mtml {
namespace {

using testing::tiny_config;

bool same_parameters(torch::nn::Module& a, torch::nn::Module& b) {
  const auto pa = a.named_parameters();
  const auto pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (const auto& p : pa) {
    const auto* q = pb.find(p.key());
    if (q == nullptr || !torch::equal(p.value(), *q)) return false;
  }
  return true;
}

TEST(Network, GroupsPartitionEveryParameter) {
  RelayNetwork net(tiny_config());
  std::set<const void*> seen;
  std::size_t total = 0;
  for (auto g : {ParamGroup::kStage1, ParamGroup::kStage2, ParamGroup::kStage3Mtml, ParamGroup::kStage3Baseline}) {
    const auto params = net->parameters_of(g);
    EXPECT_FALSE(params.empty());
    for (const auto& p : params) EXPECT_TRUE(seen.insert(p.unsafeGetTensorImpl()).second) << "shared parameter";
    total += params.size();
  }
  EXPECT_EQ(total, net->parameters().size());
  EXPECT_THROW(RelayNetworkImpl::group_of("stray.weight"), Error);
  EXPECT_EQ(RelayNetworkImpl::group_of("mtml_fusion.key_weight"), ParamGroup::kStage3Mtml);
  EXPECT_EQ(stage3_group(Scheme::kBaseline), ParamGroup::kStage3Baseline);
}

TEST(Network, FreezeSelectsExactlyOneGroup) {
  RelayNetwork net(tiny_config());
  net->freeze_all_but(ParamGroup::kStage2);
  for (const auto& p : net->named_parameters()) {
    EXPECT_EQ(p.value().requires_grad(), RelayNetworkImpl::group_of(p.key()) == ParamGroup::kStage2) << p.key();
  }
  net->unfreeze_all();
  for (const auto& p : net->parameters()) EXPECT_TRUE(p.requires_grad());
}

TEST(Network, MirroredModulesStartIdentical) {
  RelayNetwork net(tiny_config());
  EXPECT_TRUE(same_parameters(*net->baseline_relay_encoder, *net->mtml_relay_encoder->backbone()));
  EXPECT_TRUE(same_parameters(*net->baseline_dest_decoder, *net->mtml_dest_decoder->backbone()));
  EXPECT_TRUE(same_parameters(*net->baseline_dest_classifier, *net->mtml_dest_classifier));
}

TEST(Network, SeedDeterminesInitialisation) {
  auto cfg = tiny_config();
  RelayNetwork a(cfg), b(cfg);
  EXPECT_TRUE(same_parameters(*a, *b));
  cfg.seed = 1;
  RelayNetwork c(cfg);
  EXPECT_FALSE(same_parameters(*a, *c));
}

TEST(Network, SchemeNames) {
  EXPECT_EQ(to_string(Scheme::kMtml), "mtml_rsc");
  EXPECT_EQ(parse_scheme("baseline"), Scheme::kBaseline);
  EXPECT_EQ(parse_scheme("mtml_rsc"), Scheme::kMtml);
  EXPECT_THROW(parse_scheme("af"), Error);
}

class PipelineTest : public ::testing::Test {
 protected:
  ExperimentConfig cfg = tiny_config();
  RelayNetwork net{cfg};
  RelayPipeline pipeline{net, cfg};
  torch::Tensor images = torch::rand({3, 3, 16, 16});
  torch::Tensor labels = torch::tensor({2L, 0L, 1L});
};

TEST_F(PipelineTest, OutputShapes) {
  auto gen = make_generator(1);
  const auto out = pipeline.forward_mtml_train(images, labels, gen);
  EXPECT_EQ(out.relay_recon.sizes(), images.sizes());
  EXPECT_EQ(out.dest_recon.sizes(), images.sizes());
  EXPECT_EQ(out.relay_logits.sizes(), (std::vector<int64_t>{3, 3}));
  EXPECT_EQ(out.dest_logits.sizes(), (std::vector<int64_t>{3, 3}));
  const auto base = pipeline.forward_baseline(images, gen);
  EXPECT_FALSE(base.relay_logits.defined());
  EXPECT_EQ(base.dest_recon.sizes(), images.sizes());
}

TEST_F(PipelineTest, TrainPathFeedsTrueLabelsToBothCodecs) {
  std::vector<std::pair<LabelSite, torch::Tensor>> seen;
  pipeline.set_label_probe([&](LabelSite s, const torch::Tensor& l) { seen.emplace_back(s, l.clone()); });
  auto gen = make_generator(2);
  pipeline.forward_mtml_train(images, labels, gen);
  ASSERT_EQ(seen.size(), 2U);
  EXPECT_EQ(seen[0].first, LabelSite::kRelayEncoder);
  EXPECT_EQ(seen[1].first, LabelSite::kDestinationDecoder);
  EXPECT_TRUE(torch::equal(seen[0].second, labels));
  EXPECT_TRUE(torch::equal(seen[1].second, labels));
}

TEST_F(PipelineTest, InferPathUsesOnlyPredictedLabels) {
  // The inference entry point has no way to accept labels at all.
  static_assert(!std::is_invocable_v<decltype(&RelayPipeline::forward_mtml_infer), RelayPipeline&,
                                     const torch::Tensor&, const torch::Tensor&, torch::Generator&>);
  static_assert(std::is_invocable_v<decltype(&RelayPipeline::forward_mtml_infer), RelayPipeline&,
                                    const torch::Tensor&, torch::Generator&>);
  std::vector<std::pair<LabelSite, torch::Tensor>> seen;
  pipeline.set_label_probe([&](LabelSite s, const torch::Tensor& l) { seen.emplace_back(s, l.clone()); });
  auto gen = make_generator(3);
  torch::NoGradGuard g;
  const auto out = pipeline.forward_mtml_infer(images, gen);
  ASSERT_EQ(seen.size(), 2U);
  EXPECT_TRUE(torch::equal(seen[0].second, predict(out.relay_logits)));
  EXPECT_TRUE(torch::equal(seen[1].second, predict(out.dest_logits)));
}

TEST_F(PipelineTest, SchemesShareChannelRealizations) {
  auto g1 = make_generator(4);
  auto g2 = make_generator(4);
  torch::NoGradGuard g;
  const auto a = pipeline.forward_mtml_infer(images, g1);
  const auto b = pipeline.forward_baseline(images, g2);
  EXPECT_TRUE(torch::equal(a.source_relay.noise, b.source_relay.noise));
  EXPECT_TRUE(torch::equal(a.source_destination.values, b.source_destination.values));
  EXPECT_TRUE(torch::equal(a.relay_destination.noise, b.relay_destination.noise));
  EXPECT_TRUE(torch::equal(a.relay_recon, b.relay_recon));
}

TEST_F(PipelineTest, BroadcastIsTreatedAsData) {
  auto gen = make_generator(5);
  const auto out = pipeline.forward_mtml_train(images, labels, gen);
  EXPECT_FALSE(out.relay_recon.requires_grad());
  EXPECT_FALSE(out.relay_logits.requires_grad());
  EXPECT_TRUE(out.dest_recon.requires_grad());
  EXPECT_TRUE(out.dest_logits.requires_grad());
}

TEST_F(PipelineTest, DecoderInputSwitch) {
  auto fused_cfg = cfg;
  fused_cfg.decoder_input = DecoderInput::kFused;
  RelayPipeline fused(net, fused_cfg);
  auto g1 = make_generator(6);
  auto g2 = make_generator(6);
  torch::NoGradGuard g;
  const auto a = pipeline.forward_mtml_train(images, labels, g1);
  const auto b = fused.forward_mtml_train(images, labels, g2);
  EXPECT_TRUE(torch::equal(a.dest_logits, b.dest_logits));
  EXPECT_FALSE(torch::equal(a.dest_recon, b.dest_recon));
}

TEST_F(PipelineTest, RejectsBadTrainingLabels) {
  auto gen = make_generator(7);
  EXPECT_THROW(pipeline.forward_mtml_train(images, torch::tensor({0L, 1L, 3L}), gen), LabelError);
}

}  // namespace
}  // namespace mtml

#include "mtml/network.hpp"

#include <fmt/format.h>

#include "mtml/errors.hpp"

namespace mtml {

std::string_view to_string(Scheme s) { return s == Scheme::kMtml ? "mtml_rsc" : "baseline"; }

Scheme parse_scheme(std::string_view s) {
  if (s == "mtml_rsc" || s == "mtml") return Scheme::kMtml;
  if (s == "baseline") return Scheme::kBaseline;
  throw Error(fmt::format("unknown scheme '{}' (expected mtml_rsc|baseline)", s));
}

ParamGroup stage3_group(Scheme s) {
  return s == Scheme::kMtml ? ParamGroup::kStage3Mtml : ParamGroup::kStage3Baseline;
}

RelayNetworkImpl::RelayNetworkImpl(const ExperimentConfig& cfg) : cfg_(cfg), codec_(CodecOptions::from(cfg)) {
  const auto seed = static_cast<int64_t>(cfg.seed);
  const int64_t classes = cfg.num_classes;
  FusionOptions fusion;
  fusion.groups = codec_.n_patches();
  fusion.patch_len = codec_.patch_len;
  fusion.heads = cfg.fusion_heads;
  fusion.head_dim = cfg.fusion_head_dim;
  fusion.proj_len = cfg.fusion_proj_len;

  torch::manual_seed(seed * 16 + 1);
  source_encoder = register_module("source_encoder", JsccEncoder(codec_));
  torch::manual_seed(seed * 16 + 2);
  relay_decoder = register_module("relay_decoder", JsccDecoder(codec_));
  torch::manual_seed(seed * 16 + 3);
  relay_classifier = register_module("relay_classifier", ImageClassifier(codec_, classes));

  torch::manual_seed(seed * 16 + 4);
  mtml_relay_encoder = register_module("mtml_relay_encoder", ClassAidedEncoder(codec_, classes));
  torch::manual_seed(seed * 16 + 4);
  baseline_relay_encoder = register_module("baseline_relay_encoder", JsccEncoder(codec_));

  torch::manual_seed(seed * 16 + 5);
  mtml_dest_classifier = register_module("mtml_dest_classifier", SignalClassifier(codec_, classes));
  torch::manual_seed(seed * 16 + 5);
  baseline_dest_classifier = register_module("baseline_dest_classifier", SignalClassifier(codec_, classes));

  torch::manual_seed(seed * 16 + 6);
  mtml_dest_decoder = register_module("mtml_dest_decoder", ClassAidedDecoder(codec_, classes));
  torch::manual_seed(seed * 16 + 6);
  baseline_dest_decoder = register_module("baseline_dest_decoder", JsccDecoder(codec_));

  torch::manual_seed(seed * 16 + 7);
  mtml_fusion = register_module("mtml_fusion", MutualAttention(fusion));
}

ParamGroup RelayNetworkImpl::group_of(std::string_view name) {
  const auto top = name.substr(0, name.find('.'));
  if (top == "source_encoder" || top == "relay_decoder") return ParamGroup::kStage1;
  if (top == "relay_classifier") return ParamGroup::kStage2;
  if (top.starts_with("mtml_")) return ParamGroup::kStage3Mtml;
  if (top.starts_with("baseline_")) return ParamGroup::kStage3Baseline;
  throw Error(fmt::format("parameter '{}' belongs to no training stage", name));
}

std::vector<torch::Tensor> RelayNetworkImpl::parameters_of(ParamGroup group) {
  std::vector<torch::Tensor> out;
  for (const auto& p : named_parameters()) {
    if (group_of(p.key()) == group) out.push_back(p.value());
  }
  return out;
}

void RelayNetworkImpl::freeze_all_but(ParamGroup trainable) {
  for (auto& p : named_parameters()) p.value().set_requires_grad(group_of(p.key()) == trainable);
}

void RelayNetworkImpl::unfreeze_all() {
  for (auto& p : parameters()) p.set_requires_grad(true);
}

}  // namespace mtml

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <torch/torch.h>

#include "mtml/class_codec.hpp"
#include "mtml/classifiers.hpp"
#include "mtml/config.hpp"
#include "mtml/fusion.hpp"
#include "mtml/jscc.hpp"

namespace mtml {

enum class Scheme { kMtml, kBaseline };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view s);

/// Disjoint trainable sets. Stages 1 and 2 are shared by both schemes; each
/// scheme has its own stage-3 set.
enum class ParamGroup { kStage1, kStage2, kStage3Mtml, kStage3Baseline };

ParamGroup stage3_group(Scheme s);

/// Every learnable module of both schemes.
///
/// Mirrored stage-3 modules (class-aided vs plain relay encoder, destination
/// classifiers, class-aided vs plain destination decoder) are initialised from
/// the same seed, so the class-aided backbones start from the plain weights.
class RelayNetworkImpl : public torch::nn::Module {
 public:
  explicit RelayNetworkImpl(const ExperimentConfig& cfg);

  // Stage 1: source node and relay decoder.
  JsccEncoder source_encoder{nullptr};
  JsccDecoder relay_decoder{nullptr};
  // Stage 2: relay classifier.
  ImageClassifier relay_classifier{nullptr};
  // Stage 3, MTML-RSC.
  ClassAidedEncoder mtml_relay_encoder{nullptr};
  MutualAttention mtml_fusion{nullptr};
  SignalClassifier mtml_dest_classifier{nullptr};
  ClassAidedDecoder mtml_dest_decoder{nullptr};
  // Stage 3, relay-only baseline.
  JsccEncoder baseline_relay_encoder{nullptr};
  SignalClassifier baseline_dest_classifier{nullptr};
  JsccDecoder baseline_dest_decoder{nullptr};

  std::vector<torch::Tensor> parameters_of(ParamGroup group);
  /// Group of a parameter by its fully qualified name. Throws for unknown names.
  static ParamGroup group_of(std::string_view name);

  /// Sets requires_grad on exactly the parameters of `trainable`.
  void freeze_all_but(ParamGroup trainable);
  void unfreeze_all();

  const ExperimentConfig& config() const { return cfg_; }
  const CodecOptions& codec_options() const { return codec_; }

 private:
  ExperimentConfig cfg_;
  CodecOptions codec_;
};
TORCH_MODULE(RelayNetwork);

}  // namespace mtml

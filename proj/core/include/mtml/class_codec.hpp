#pragma once

#include <torch/torch.h>

#include "mtml/jscc.hpp"

namespace mtml {

/// Label attention: maps a class label to a per-channel gate of the local token
/// width (one-hot -> Linear -> GELU -> Linear) and multiplies it into every token.
class LabelGateImpl : public torch::nn::Module {
 public:
  LabelGateImpl(int64_t num_classes, int64_t width);

  /// (B,) int64 labels -> (B, width) gates. Throws LabelError when out of range.
  torch::Tensor gate(const torch::Tensor& labels);

  /// tokens (B, T, width) * gate broadcast over T.
  torch::Tensor forward(const torch::Tensor& tokens, const torch::Tensor& labels);

  /// Sets the last layer to weight 0, bias 1 so every gate is exactly one.
  void force_unit_gate();

  int64_t num_classes() const { return num_classes_; }
  int64_t width() const { return width_; }

 private:
  int64_t num_classes_;
  int64_t width_;
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(LabelGate);

/// Broadcast-multiply a (B, width) gate into (B, T, width) tokens.
torch::Tensor apply_gate(const torch::Tensor& tokens, const torch::Tensor& gate);

void check_labels(const torch::Tensor& labels, int64_t num_classes);

/// Relay-side class-aided encoder: the plain JSCC encoder with a label gate at
/// the end of each of its two stages.
class ClassAidedEncoderImpl : public torch::nn::Module {
 public:
  ClassAidedEncoderImpl(const CodecOptions& opts, int64_t num_classes);

  ChannelSymbols encode(const torch::Tensor& image, const torch::Tensor& labels);
  torch::Tensor forward(const torch::Tensor& image, const torch::Tensor& labels) {
    return encode(image, labels).values;
  }

  JsccEncoder& backbone() { return backbone_; }
  LabelGate& gate(int stage) { return stage == 1 ? gate1_ : gate2_; }

 private:
  JsccEncoder backbone_{nullptr};
  LabelGate gate1_{nullptr};
  LabelGate gate2_{nullptr};
};
TORCH_MODULE(ClassAidedEncoder);

/// Destination-side class-aided decoder: the plain JSCC decoder with a single
/// label gate at the end of its second stage.
class ClassAidedDecoderImpl : public torch::nn::Module {
 public:
  ClassAidedDecoderImpl(const CodecOptions& opts, int64_t num_classes);

  torch::Tensor forward(const torch::Tensor& received, const torch::Tensor& labels);

  JsccDecoder& backbone() { return backbone_; }
  LabelGate& gate() { return gate_; }

 private:
  JsccDecoder backbone_{nullptr};
  LabelGate gate_{nullptr};
};
TORCH_MODULE(ClassAidedDecoder);

}  // namespace mtml

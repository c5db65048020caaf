#include "mtml/class_codec.hpp"

#include <fmt/format.h>

#include "mtml/errors.hpp"

namespace mtml {

void check_labels(const torch::Tensor& labels, int64_t num_classes) {
  if (labels.dim() != 1 || labels.scalar_type() != torch::kLong) {
    throw LabelError("labels must be a 1-D int64 tensor");
  }
  if (labels.numel() == 0) return;
  const auto lo = labels.min().item<int64_t>();
  const auto hi = labels.max().item<int64_t>();
  if (lo < 0 || hi >= num_classes) {
    throw LabelError(fmt::format("label out of range [0, {}): saw [{}, {}]", num_classes, lo, hi));
  }
}

LabelGateImpl::LabelGateImpl(int64_t num_classes, int64_t width) : num_classes_(num_classes), width_(width) {
  fc1_ = register_module("fc1", torch::nn::Linear(num_classes, width));
  fc2_ = register_module("fc2", torch::nn::Linear(width, width));
  // Gates start near one so a fresh class-aided codec behaves like its plain backbone.
  torch::NoGradGuard no_grad;
  fc2_->weight.normal_(0.0, 0.02);
  fc2_->bias.fill_(1.0);
}

torch::Tensor LabelGateImpl::gate(const torch::Tensor& labels) {
  check_labels(labels, num_classes_);
  const auto one_hot = torch::one_hot(labels, num_classes_).to(fc1_->weight.dtype());
  return fc2_->forward(torch::gelu(fc1_->forward(one_hot)));
}

torch::Tensor LabelGateImpl::forward(const torch::Tensor& tokens, const torch::Tensor& labels) {
  return apply_gate(tokens, gate(labels));
}

void LabelGateImpl::force_unit_gate() {
  torch::NoGradGuard no_grad;
  fc2_->weight.zero_();
  fc2_->bias.fill_(1.0);
}

torch::Tensor apply_gate(const torch::Tensor& tokens, const torch::Tensor& gate) {
  if (tokens.size(0) != gate.size(0) || tokens.size(-1) != gate.size(-1)) {
    throw ShapeError("gate does not match token batch or width");
  }
  return tokens * gate.unsqueeze(1);
}

ClassAidedEncoderImpl::ClassAidedEncoderImpl(const CodecOptions& opts, int64_t num_classes) {
  backbone_ = register_module("backbone", JsccEncoder(opts));
  gate1_ = register_module("gate1", LabelGate(num_classes, opts.widths[0]));
  gate2_ = register_module("gate2", LabelGate(num_classes, opts.widths[1]));
}

ChannelSymbols ClassAidedEncoderImpl::encode(const torch::Tensor& image, const torch::Tensor& labels) {
  check_labels(labels, gate1_->num_classes());
  return backbone_->encode(image, [&](int stage, const torch::Tensor& tokens) {
    return stage == 1 ? gate1_->forward(tokens, labels) : gate2_->forward(tokens, labels);
  });
}

ClassAidedDecoderImpl::ClassAidedDecoderImpl(const CodecOptions& opts, int64_t num_classes) {
  backbone_ = register_module("backbone", JsccDecoder(opts));
  gate_ = register_module("gate", LabelGate(num_classes, opts.widths[0]));
}

torch::Tensor ClassAidedDecoderImpl::forward(const torch::Tensor& received, const torch::Tensor& labels) {
  check_labels(labels, gate_->num_classes());
  return backbone_->forward(received, [&](int, const torch::Tensor& tokens) { return gate_->forward(tokens, labels); });
}

}  // namespace mtml

#include "mtml/classifiers.hpp"

namespace mtml {

namespace {

torch::nn::Sequential mlp_head(int64_t width, int64_t num_classes) {
  return torch::nn::Sequential(torch::nn::LayerNorm(torch::nn::LayerNormOptions({width})),
                               torch::nn::Linear(width, width), torch::nn::GELU(),
                               torch::nn::Linear(width, num_classes));
}

}  // namespace

ImageClassifierImpl::ImageClassifierImpl(const CodecOptions& opts, int64_t num_classes) {
  backbone_ = register_module("backbone", ImageBackbone(opts));
  head_ = register_module("head", mlp_head(opts.widths[1], num_classes));
}

torch::Tensor ImageClassifierImpl::forward(const torch::Tensor& image) {
  return head_->forward(backbone_->forward(image).mean(1));
}

SignalClassifierImpl::SignalClassifierImpl(const CodecOptions& opts, int64_t num_classes) : opts_(opts) {
  const int64_t width = opts.widths[1];
  lift_ = register_module("lift", torch::nn::Linear(opts.patch_len, width));
  blocks_ = register_module("blocks", SwinStage(width, opts.blocks[1], opts.window, opts.mlp_ratio,
                                                opts.stage2_grid()));
  head_ = register_module("head", mlp_head(width, num_classes));
}

torch::Tensor SignalClassifierImpl::forward(const torch::Tensor& patches) {
  check_patch_shape(patches, opts_);
  return head_->forward(blocks_->forward(lift_->forward(patches)).mean(1));
}

torch::Tensor predict(const torch::Tensor& logits) { return logits.argmax(-1); }

}  // namespace mtml

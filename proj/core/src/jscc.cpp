#include "mtml/jscc.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mtml/errors.hpp"

namespace mtml {

CodecOptions CodecOptions::from(const ExperimentConfig& cfg) {
  CodecOptions o;
  o.image_size = cfg.image_size;
  o.blocks = cfg.blocks;
  o.widths = cfg.widths;
  o.window = cfg.window_size;
  o.mlp_ratio = cfg.mlp_ratio;
  o.patch_len = derive_dims(cfg).patch_len_real;
  o.power = cfg.power;
  return o;
}

void check_image_shape(const torch::Tensor& image, const CodecOptions& opts) {
  if (image.dim() != 4 || image.size(1) != 3 || image.size(2) != opts.image_size ||
      image.size(3) != opts.image_size) {
    throw ShapeError(fmt::format("expected images (B, 3, {0}, {0}), got {1}", opts.image_size,
                                 fmt::join(image.sizes(), "x")));
  }
}

void check_patch_shape(const torch::Tensor& patches, const CodecOptions& opts) {
  if (patches.dim() != 3 || patches.size(1) != opts.n_patches() || patches.size(2) != opts.patch_len) {
    throw ShapeError(fmt::format("expected patches (B, {}, {}), got {}", opts.n_patches(), opts.patch_len,
                                 fmt::join(patches.sizes(), "x")));
  }
}

ImageBackboneImpl::ImageBackboneImpl(const CodecOptions& opts) : opts_(opts) {
  const auto [c1, c2] = opts.widths;
  embed_ = register_module("embed", PatchEmbed(3, c1));
  stage1_ = register_module("stage1", SwinStage(c1, opts.blocks[0], opts.window, opts.mlp_ratio, opts.stage1_grid()));
  merge_ = register_module("merge", PatchMerging(c1, c2, opts.stage1_grid()));
  stage2_ = register_module("stage2", SwinStage(c2, opts.blocks[1], opts.window, opts.mlp_ratio, opts.stage2_grid()));
}

torch::Tensor ImageBackboneImpl::forward(const torch::Tensor& image, const StageHook& hook) {
  check_image_shape(image, opts_);
  auto x = stage1_->forward(embed_->forward(image));
  if (hook) x = hook(1, x);
  x = stage2_->forward(merge_->forward(x));
  if (hook) x = hook(2, x);
  return x;
}

JsccEncoderImpl::JsccEncoderImpl(const CodecOptions& opts) : opts_(opts) {
  backbone_ = register_module("backbone", ImageBackbone(opts));
  head_ = register_module("head", torch::nn::Linear(opts.widths[1], opts.patch_len));
}

torch::Tensor JsccEncoderImpl::project(const torch::Tensor& image, const StageHook& hook) {
  return head_->forward(backbone_->forward(image, hook));
}

ChannelSymbols JsccEncoderImpl::encode(const torch::Tensor& image, const StageHook& hook) {
  return power_normalize(real_to_complex(project(image, hook)), opts_.power);
}

JsccDecoderImpl::JsccDecoderImpl(const CodecOptions& opts) : opts_(opts) {
  const auto [c1, c2] = opts.widths;
  lift_ = register_module("lift", torch::nn::Linear(opts.patch_len, c2));
  stage2_ = register_module("stage2", SwinStage(c2, opts.blocks[1], opts.window, opts.mlp_ratio, opts.stage2_grid()));
  divide2_ = register_module("divide2", PatchDivision(c2, c1, opts.stage2_grid()));
  stage1_ = register_module("stage1", SwinStage(c1, opts.blocks[0], opts.window, opts.mlp_ratio, opts.stage1_grid()));
  divide1_ = register_module("divide1", PatchDivision(c1, 3, opts.stage1_grid()));
  // Start reconstructions at mid-grey so the output clamp is not saturated.
  torch::NoGradGuard no_grad;
  divide1_->named_parameters()["expansion.bias"].fill_(0.5);
}

torch::Tensor JsccDecoderImpl::forward(const torch::Tensor& received, const StageHook& hook) {
  check_patch_shape(received, opts_);
  const auto b = received.size(0);
  auto x = divide2_->forward(stage2_->forward(lift_->forward(received)));
  if (hook) x = hook(2, x);
  x = divide1_->forward(stage1_->forward(x));  // (B, H*W, 3)
  x = x.view({b, opts_.image_size, opts_.image_size, 3}).permute({0, 3, 1, 2});
  return torch::clamp(x, 0.0, 1.0);
}

}  // namespace mtml

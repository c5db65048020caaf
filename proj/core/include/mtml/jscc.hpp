#pragma once

#include <array>
#include <functional>

#include <torch/torch.h>

#include "mtml/channel.hpp"
#include "mtml/config.hpp"
#include "mtml/swin.hpp"

namespace mtml {

/// Architecture of the two-stage codec backbone.
struct CodecOptions {
  int64_t image_size = 32;
  std::array<int64_t, 2> blocks{1, 2};
  std::array<int64_t, 2> widths{32, 64};
  int64_t window = 4;
  int64_t mlp_ratio = 2;
  int64_t patch_len = 8;  // l: real values per channel patch
  double power = 1.0;

  Grid stage1_grid() const { return {image_size / 2, image_size / 2}; }
  Grid stage2_grid() const { return {image_size / 4, image_size / 4}; }
  int64_t n_patches() const { return stage2_grid().tokens(); }

  static CodecOptions from(const ExperimentConfig& cfg);
};

/// Called at the end of a stage with (stage index 1 or 2, tokens); returns the
/// tokens to continue with. Used to inject label gates.
using StageHook = std::function<torch::Tensor(int, const torch::Tensor&)>;

/// Patch embedding, stage-1 blocks, patch merging, stage-2 blocks:
/// (B, 3, H, W) -> (B, H/4 * W/4, c2).
class ImageBackboneImpl : public torch::nn::Module {
 public:
  explicit ImageBackboneImpl(const CodecOptions& opts);

  torch::Tensor forward(const torch::Tensor& image, const StageHook& hook = {});

  const CodecOptions& options() const { return opts_; }

 private:
  CodecOptions opts_;
  PatchEmbed embed_{nullptr};
  SwinStage stage1_{nullptr};
  PatchMerging merge_{nullptr};
  SwinStage stage2_{nullptr};
};
TORCH_MODULE(ImageBackbone);

/// Source-node JSCC encoder: backbone, per-token projection to l reals,
/// complex packing and per-sample power normalisation.
class JsccEncoderImpl : public torch::nn::Module {
 public:
  explicit JsccEncoderImpl(const CodecOptions& opts);

  /// Real pre-normalisation projection, (B, n, l).
  torch::Tensor project(const torch::Tensor& image, const StageHook& hook = {});
  ChannelSymbols encode(const torch::Tensor& image, const StageHook& hook = {});
  torch::Tensor forward(const torch::Tensor& image) { return encode(image).values; }

  const CodecOptions& options() const { return opts_; }

 private:
  CodecOptions opts_;
  ImageBackbone backbone_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(JsccEncoder);

/// Relay-node JSCC decoder, the mirror of the encoder:
/// (B, n, l) real -> (B, 3, H, W) clamped to [0, 1].
class JsccDecoderImpl : public torch::nn::Module {
 public:
  explicit JsccDecoderImpl(const CodecOptions& opts);

  /// `hook` is invoked once, with stage 2, after the stage-2 patch division.
  torch::Tensor forward(const torch::Tensor& received, const StageHook& hook = {});

  const CodecOptions& options() const { return opts_; }

 private:
  CodecOptions opts_;
  torch::nn::Linear lift_{nullptr};
  SwinStage stage2_{nullptr};
  PatchDivision divide2_{nullptr};
  SwinStage stage1_{nullptr};
  PatchDivision divide1_{nullptr};
};
TORCH_MODULE(JsccDecoder);

void check_image_shape(const torch::Tensor& image, const CodecOptions& opts);
void check_patch_shape(const torch::Tensor& patches, const CodecOptions& opts);

}  // namespace mtml

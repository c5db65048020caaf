#pragma once

#include <torch/torch.h>

namespace mtml {

/// Token grid geometry of a (batch, rows * cols, width) sequence.
struct Grid {
  int64_t rows = 0;
  int64_t cols = 0;
  int64_t tokens() const { return rows * cols; }
};

/// Heads per attention layer: one head per 32 channels.
int64_t heads_for_width(int64_t width);

/// Windowed multi-head self-attention with a learned relative position bias.
class WindowAttentionImpl : public torch::nn::Module {
 public:
  WindowAttentionImpl(int64_t dim, int64_t window, int64_t heads);

  /// `windows`: (batch * n_windows, window^2, dim). `mask`, when defined, is
  /// (n_windows, window^2, window^2) of additive logits.
  torch::Tensor forward(const torch::Tensor& windows, const torch::Tensor& mask);

 private:
  int64_t dim_;
  int64_t window_;
  int64_t heads_;
  double scale_;
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear proj_{nullptr};
  torch::Tensor bias_table_;
  torch::Tensor bias_index_;  // not a buffer: integer tables must survive dtype casts
};
TORCH_MODULE(WindowAttention);

/// Pre-norm Swin block: (shifted) window attention then MLP, each residual.
class SwinBlockImpl : public torch::nn::Module {
 public:
  SwinBlockImpl(int64_t dim, int64_t heads, int64_t window, bool shifted, int64_t mlp_ratio, Grid grid);

  torch::Tensor forward(const torch::Tensor& x);

  int64_t window() const { return window_; }
  int64_t shift() const { return shift_; }

 private:
  int64_t dim_;
  int64_t window_;
  int64_t shift_;
  Grid grid_;
  torch::nn::LayerNorm norm1_{nullptr};
  torch::nn::LayerNorm norm2_{nullptr};
  WindowAttention attn_{nullptr};
  torch::nn::Sequential mlp_{nullptr};
  torch::Tensor mask_;  // (n_windows, w^2, w^2) or undefined
};
TORCH_MODULE(SwinBlock);

/// `depth` Swin blocks alternating regular and shifted windows.
class SwinStageImpl : public torch::nn::Module {
 public:
  SwinStageImpl(int64_t dim, int64_t depth, int64_t window, int64_t mlp_ratio, Grid grid);

  torch::Tensor forward(torch::Tensor x);

 private:
  torch::nn::ModuleList blocks_{nullptr};
};
TORCH_MODULE(SwinStage);

/// Non-overlapping 2x2 patch embedding: (B, 3, H, W) -> (B, H/2 * W/2, width).
class PatchEmbedImpl : public torch::nn::Module {
 public:
  PatchEmbedImpl(int64_t in_channels, int64_t width);

  torch::Tensor forward(const torch::Tensor& image);

 private:
  torch::nn::Conv2d proj_{nullptr};
  torch::nn::LayerNorm norm_{nullptr};
};
TORCH_MODULE(PatchEmbed);

/// 2x2 token merge: concatenates each 2x2 neighbourhood and projects to `out_width`.
class PatchMergingImpl : public torch::nn::Module {
 public:
  PatchMergingImpl(int64_t in_width, int64_t out_width, Grid grid);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  Grid grid_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear reduction_{nullptr};
};
TORCH_MODULE(PatchMerging);

/// Transpose of PatchMerging: projects every token to 4 * out_width values and
/// spreads them over a 2x2 neighbourhood of the doubled grid.
class PatchDivisionImpl : public torch::nn::Module {
 public:
  PatchDivisionImpl(int64_t in_width, int64_t out_width, Grid grid);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  Grid grid_;
  int64_t out_width_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear expansion_{nullptr};
};
TORCH_MODULE(PatchDivision);

/// (B, R*C, 4w) <-> (B, 2R*2C, w) rearrangements used by merging and division.
torch::Tensor merge_2x2(const torch::Tensor& x, Grid grid);
torch::Tensor split_2x2(const torch::Tensor& x, Grid grid);

}  // namespace mtml

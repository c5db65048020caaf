#pragma once

#include <torch/torch.h>

namespace mtml {

struct FusionOptions {
  int64_t groups = 64;     // n
  int64_t patch_len = 8;   // l
  int64_t heads = 2;       // h
  int64_t head_dim = 4;    // l_s, the per-head key dimension
  int64_t proj_len = 32;   // per-group projection length, a multiple of h * l_s

  int64_t tokens_per_head() const { return proj_len / (heads * head_dim); }
};

struct AttentionResult {
  torch::Tensor output;   // (..., heads, t, head_dim)
  torch::Tensor weights;  // (..., heads, t, t); rows sum to one
};

/// softmax(Q K^T / sqrt(d)) V over the last two dimensions, d = head dim.
AttentionResult scaled_dot_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v);

/// Mutual attention between the direct (SD) and relayed (RD) signals.
///
/// Group j of the SD signal is projected by its own maps to K_j and V_j, and
/// group j of the RD signal to Q_j. Each projection is split into `heads`
/// heads of `t` tokens of length l_s, so that the softmax runs over t SD
/// tokens per RD query. Head outputs are flattened per group and a shared
/// output map brings every group back to length l.
class MutualAttentionImpl : public torch::nn::Module {
 public:
  explicit MutualAttentionImpl(const FusionOptions& opts);

  /// (B, n, l) x (B, n, l) -> (B, n, l).
  torch::Tensor forward(const torch::Tensor& y_sd, const torch::Tensor& y_rd);

  /// Same as forward, also returning the per-group attention weights
  /// (B, n, heads, t, t).
  AttentionResult forward_with_weights(const torch::Tensor& y_sd, const torch::Tensor& y_rd);

  const FusionOptions& options() const { return opts_; }

  // Per-group projection weights, (n, proj_len, l) and biases (n, proj_len).
  torch::Tensor query_weight, query_bias;
  torch::Tensor key_weight, key_bias;
  torch::Tensor value_weight, value_bias;
  torch::nn::Linear output{nullptr};

 private:
  torch::Tensor project(const torch::Tensor& y, const torch::Tensor& w, const torch::Tensor& b) const;

  FusionOptions opts_;
};
TORCH_MODULE(MutualAttention);

}  // namespace mtml

#include "mtml/fusion.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mtml/errors.hpp"

namespace mtml {

AttentionResult scaled_dot_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size(-1)));
  auto weights = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) * scale, -1);
  return {torch::matmul(weights, v), weights};
}

MutualAttentionImpl::MutualAttentionImpl(const FusionOptions& opts) : opts_(opts) {
  if (opts.proj_len % (opts.heads * opts.head_dim) != 0) {
    throw ShapeError("fusion projection length must be a multiple of heads * head_dim");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(opts.patch_len));
  auto uniform = [&](std::initializer_list<int64_t> shape) {
    return torch::empty(shape).uniform_(-bound, bound);
  };
  const int64_t n = opts.groups, p = opts.proj_len, l = opts.patch_len;
  query_weight = register_parameter("query_weight", uniform({n, p, l}));
  query_bias = register_parameter("query_bias", uniform({n, p}));
  key_weight = register_parameter("key_weight", uniform({n, p, l}));
  key_bias = register_parameter("key_bias", uniform({n, p}));
  value_weight = register_parameter("value_weight", uniform({n, p, l}));
  value_bias = register_parameter("value_bias", uniform({n, p}));
  output = register_module("output", torch::nn::Linear(p, l));
}

torch::Tensor MutualAttentionImpl::project(const torch::Tensor& y, const torch::Tensor& w,
                                           const torch::Tensor& b) const {
  // (B, n, l) x (n, p, l) -> (B, n, p), then split to (B, n, heads, t, l_s).
  const auto projected = torch::einsum("bnl,npl->bnp", {y, w}) + b;
  return projected.view({y.size(0), opts_.groups, opts_.heads, opts_.tokens_per_head(), opts_.head_dim});
}

AttentionResult MutualAttentionImpl::forward_with_weights(const torch::Tensor& y_sd, const torch::Tensor& y_rd) {
  if (y_sd.sizes() != y_rd.sizes()) {
    throw ShapeError(fmt::format("fusion inputs differ: SD {} vs RD {}", fmt::join(y_sd.sizes(), "x"),
                                 fmt::join(y_rd.sizes(), "x")));
  }
  if (y_rd.dim() != 3 || y_rd.size(1) != opts_.groups || y_rd.size(2) != opts_.patch_len) {
    throw ShapeError(fmt::format("fusion expects (B, {}, {}), got {}", opts_.groups, opts_.patch_len,
                                 fmt::join(y_rd.sizes(), "x")));
  }
  const auto q = project(y_rd, query_weight, query_bias);
  const auto k = project(y_sd, key_weight, key_bias);
  const auto v = project(y_sd, value_weight, value_bias);
  auto attended = scaled_dot_attention(q, k, v);
  const auto flat = attended.output.reshape({y_rd.size(0), opts_.groups, opts_.proj_len});
  return {output->forward(flat), attended.weights};
}

torch::Tensor MutualAttentionImpl::forward(const torch::Tensor& y_sd, const torch::Tensor& y_rd) {
  return forward_with_weights(y_sd, y_rd).output;
}

}  // namespace mtml

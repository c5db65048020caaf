#include "mtml/swin.hpp"

#include <cmath>

#include "mtml/errors.hpp"

namespace mtml {

namespace {

torch::Tensor relative_position_index(int64_t window) {
  const auto coords = torch::arange(window, torch::kLong);
  const auto grid = torch::meshgrid({coords, coords}, "ij");
  const auto flat = torch::stack({grid[0].flatten(), grid[1].flatten()});  // (2, w^2)
  auto rel = flat.unsqueeze(2) - flat.unsqueeze(1);                      // (2, w^2, w^2)
  rel = rel + (window - 1);
  return (rel[0] * (2 * window - 1) + rel[1]).contiguous();
}

// (B, R, C, D) -> (B * nW, w*w, D)
torch::Tensor window_partition(const torch::Tensor& x, int64_t w) {
  const auto b = x.size(0), r = x.size(1), c = x.size(2), d = x.size(3);
  return x.view({b, r / w, w, c / w, w, d}).permute({0, 1, 3, 2, 4, 5}).reshape({-1, w * w, d});
}

torch::Tensor window_reverse(const torch::Tensor& windows, int64_t w, int64_t b, Grid grid) {
  const auto d = windows.size(-1);
  return windows.view({b, grid.rows / w, grid.cols / w, w, w, d})
      .permute({0, 1, 3, 2, 4, 5})
      .reshape({b, grid.rows, grid.cols, d});
}

torch::Tensor shifted_window_mask(Grid grid, int64_t window, int64_t shift) {
  auto img = torch::zeros({1, grid.rows, grid.cols, 1});
  const int64_t row_cuts[] = {0, grid.rows - window, grid.rows - shift, grid.rows};
  const int64_t col_cuts[] = {0, grid.cols - window, grid.cols - shift, grid.cols};
  float region = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      img.index_put_({torch::indexing::Slice(), torch::indexing::Slice(row_cuts[i], row_cuts[i + 1]),
                      torch::indexing::Slice(col_cuts[j], col_cuts[j + 1]), torch::indexing::Slice()},
                     region);
      region += 1;
    }
  }
  const auto windows = window_partition(img, window).squeeze(-1);  // (nW, w^2)
  const auto diff = windows.unsqueeze(1) - windows.unsqueeze(2);
  return torch::where(diff != 0, torch::full_like(diff, -100.0), torch::zeros_like(diff));
}

}  // namespace

int64_t heads_for_width(int64_t width) { return std::max<int64_t>(1, width / 32); }

WindowAttentionImpl::WindowAttentionImpl(int64_t dim, int64_t window, int64_t heads)
    : dim_(dim), window_(window), heads_(heads) {
  if (dim % heads != 0) throw ShapeError("attention width must be divisible by head count");
  scale_ = 1.0 / std::sqrt(static_cast<double>(dim / heads));
  qkv_ = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj_ = register_module("proj", torch::nn::Linear(dim, dim));
  bias_table_ = register_parameter("relative_position_bias",
                                   torch::randn({(2 * window - 1) * (2 * window - 1), heads}) * 0.02);
  bias_index_ = relative_position_index(window);
}

torch::Tensor WindowAttentionImpl::forward(const torch::Tensor& windows, const torch::Tensor& mask) {
  const auto bw = windows.size(0);
  const auto n = windows.size(1);
  const auto qkv = qkv_->forward(windows).reshape({bw, n, 3, heads_, dim_ / heads_}).permute({2, 0, 3, 1, 4});
  const auto q = qkv[0] * scale_;
  const auto k = qkv[1];
  const auto v = qkv[2];
  auto attn = torch::matmul(q, k.transpose(-2, -1));  // (bw, heads, n, n)
  const auto bias = bias_table_.index_select(0, bias_index_.view(-1)).view({n, n, heads_}).permute({2, 0, 1});
  attn = attn + bias.unsqueeze(0);
  if (mask.defined()) {
    const auto nw = mask.size(0);
    attn = attn.view({bw / nw, nw, heads_, n, n}) + mask.to(attn.dtype()).unsqueeze(1).unsqueeze(0);
    attn = attn.view({bw, heads_, n, n});
  }
  attn = torch::softmax(attn, -1);
  const auto out = torch::matmul(attn, v).transpose(1, 2).reshape({bw, n, dim_});
  return proj_->forward(out);
}

SwinBlockImpl::SwinBlockImpl(int64_t dim, int64_t heads, int64_t window, bool shifted, int64_t mlp_ratio,
                             Grid grid)
    : dim_(dim), window_(window), shift_(0), grid_(grid) {
  const int64_t side = std::min(grid.rows, grid.cols);
  if (side <= window_) {
    window_ = side;  // a single window covers the grid; shifting is meaningless
  } else if (shifted) {
    shift_ = window_ / 2;
  }
  if (grid.rows % window_ != 0 || grid.cols % window_ != 0) {
    throw ShapeError("window size must divide the token grid");
  }
  norm1_ = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn_ = register_module("attn", WindowAttention(dim, window_, heads));
  norm2_ = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  mlp_ = register_module("mlp", torch::nn::Sequential(torch::nn::Linear(dim, dim * mlp_ratio), torch::nn::GELU(),
                                                      torch::nn::Linear(dim * mlp_ratio, dim)));
  if (shift_ > 0) mask_ = shifted_window_mask(grid_, window_, shift_);
}

torch::Tensor SwinBlockImpl::forward(const torch::Tensor& x) {
  const auto b = x.size(0);
  if (x.size(1) != grid_.tokens() || x.size(2) != dim_) {
    throw ShapeError("SwinBlock: token sequence does not match its grid");
  }
  auto h = norm1_->forward(x).view({b, grid_.rows, grid_.cols, dim_});
  if (shift_ > 0) h = torch::roll(h, {-shift_, -shift_}, {1, 2});
  auto windows = attn_->forward(window_partition(h, window_), mask_);
  h = window_reverse(windows, window_, b, grid_);
  if (shift_ > 0) h = torch::roll(h, {shift_, shift_}, {1, 2});
  auto out = x + h.reshape({b, grid_.tokens(), dim_});
  return out + mlp_->forward(norm2_->forward(out));
}

SwinStageImpl::SwinStageImpl(int64_t dim, int64_t depth, int64_t window, int64_t mlp_ratio, Grid grid) {
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int64_t i = 0; i < depth; ++i) {
    blocks_->push_back(SwinBlock(dim, heads_for_width(dim), window, i % 2 == 1, mlp_ratio, grid));
  }
}

torch::Tensor SwinStageImpl::forward(torch::Tensor x) {
  for (const auto& block : *blocks_) x = block->as<SwinBlock>()->forward(x);
  return x;
}

PatchEmbedImpl::PatchEmbedImpl(int64_t in_channels, int64_t width) {
  proj_ = register_module("proj", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, width, 2).stride(2)));
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({width})));
}

torch::Tensor PatchEmbedImpl::forward(const torch::Tensor& image) {
  return norm_->forward(proj_->forward(image).flatten(2).transpose(1, 2));
}

torch::Tensor merge_2x2(const torch::Tensor& x, Grid grid) {
  const auto b = x.size(0), d = x.size(2);
  return x.view({b, grid.rows / 2, 2, grid.cols / 2, 2, d})
      .permute({0, 1, 3, 2, 4, 5})
      .reshape({b, grid.tokens() / 4, 4 * d});
}

torch::Tensor split_2x2(const torch::Tensor& x, Grid grid) {
  const auto b = x.size(0), d = x.size(2) / 4;
  return x.view({b, grid.rows, grid.cols, 2, 2, d})
      .permute({0, 1, 3, 2, 4, 5})
      .reshape({b, grid.tokens() * 4, d});
}

PatchMergingImpl::PatchMergingImpl(int64_t in_width, int64_t out_width, Grid grid) : grid_(grid) {
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({4 * in_width})));
  reduction_ = register_module("reduction", torch::nn::Linear(torch::nn::LinearOptions(4 * in_width, out_width)
                                                                  .bias(false)));
}

torch::Tensor PatchMergingImpl::forward(const torch::Tensor& x) {
  return reduction_->forward(norm_->forward(merge_2x2(x, grid_)));
}

PatchDivisionImpl::PatchDivisionImpl(int64_t in_width, int64_t out_width, Grid grid)
    : grid_(grid), out_width_(out_width) {
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({in_width})));
  expansion_ = register_module("expansion", torch::nn::Linear(in_width, 4 * out_width));
}

torch::Tensor PatchDivisionImpl::forward(const torch::Tensor& x) {
  return split_2x2(expansion_->forward(norm_->forward(x)), grid_);
}

}  // namespace mtml

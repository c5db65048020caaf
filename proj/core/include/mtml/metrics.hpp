#pragma once

#include <cstdint>
#include <span>

#include <torch/torch.h>

namespace mtml {

inline constexpr double kPsnrCapDb = 100.0;

struct Psnr {
  double db = 0.0;
  bool saturated = false;  // at least one image had zero error and was capped
};

/// Batch mean of per-image 10 log10(1 / MSE) for images in [0, 1].
Psnr psnr(const torch::Tensor& source, const torch::Tensor& reconstruction, double cap_db = kPsnrCapDb);

/// Per-image PSNR values, (B,) double.
torch::Tensor psnr_per_image(const torch::Tensor& source, const torch::Tensor& reconstruction,
                             double cap_db = kPsnrCapDb);

/// Fraction of exact matches. Throws on length mismatch.
double accuracy(std::span<const int64_t> predictions, std::span<const int64_t> truth);
double accuracy(const torch::Tensor& predictions, const torch::Tensor& truth);

}  // namespace mtml

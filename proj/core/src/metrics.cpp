#include "mtml/metrics.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mtml/errors.hpp"

namespace mtml {

torch::Tensor psnr_per_image(const torch::Tensor& source, const torch::Tensor& reconstruction, double cap_db) {
  if (source.sizes() != reconstruction.sizes() || source.dim() < 1) {
    throw ShapeError(fmt::format("psnr: {} vs {}", fmt::join(source.sizes(), "x"),
                                 fmt::join(reconstruction.sizes(), "x")));
  }
  const auto diff = (source.to(torch::kDouble) - reconstruction.to(torch::kDouble)).reshape({source.size(0), -1});
  const auto mse = diff.square().mean(1);
  const auto db = -10.0 * torch::log10(mse);
  return torch::where(mse == 0, torch::full_like(db, cap_db), db);
}

Psnr psnr(const torch::Tensor& source, const torch::Tensor& reconstruction, double cap_db) {
  const auto per_image = psnr_per_image(source, reconstruction, cap_db);
  const auto diff = (source - reconstruction).reshape({source.size(0), -1});
  const bool saturated = (diff.abs().amax(1) == 0).any().item<bool>();
  return {per_image.mean().item<double>(), saturated};
}

double accuracy(std::span<const int64_t> predictions, std::span<const int64_t> truth) {
  if (predictions.size() != truth.size()) {
    throw ShapeError(fmt::format("accuracy: {} predictions vs {} labels", predictions.size(), truth.size()));
  }
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const torch::Tensor& predictions, const torch::Tensor& truth) {
  const auto p = predictions.to(torch::kLong).contiguous();
  const auto t = truth.to(torch::kLong).contiguous();
  return accuracy(std::span<const int64_t>(p.data_ptr<int64_t>(), p.numel()),
                  std::span<const int64_t>(t.data_ptr<int64_t>(), t.numel()));
}

}  // namespace mtml

#include "mtml/losses.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mtml/class_codec.hpp"
#include "mtml/errors.hpp"

namespace mtml {

torch::Tensor reconstruction_loss(const torch::Tensor& source, const torch::Tensor& reconstruction) {
  if (source.sizes() != reconstruction.sizes()) {
    throw ShapeError(fmt::format("reconstruction_loss: {} vs {}", fmt::join(source.sizes(), "x"),
                                 fmt::join(reconstruction.sizes(), "x")));
  }
  return (source - reconstruction).square().mean();
}

torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels) {
  if (logits.dim() != 2 || labels.dim() != 1 || logits.size(0) != labels.size(0)) {
    throw ShapeError("classification_loss expects (B, C) logits and (B,) labels");
  }
  check_labels(labels, logits.size(1));
  return -torch::log_softmax(logits, 1).gather(1, labels.unsqueeze(1)).mean();
}

JointLoss joint_loss(const torch::Tensor& source, const torch::Tensor& reconstruction, const torch::Tensor& logits,
                     const torch::Tensor& labels, double lambda) {
  if (lambda < 0.0) throw Error("joint_loss: lambda must be non-negative");
  JointLoss out;
  out.mse = reconstruction_loss(source, reconstruction);
  out.cross_entropy = classification_loss(logits, labels);
  out.total = lambda == 0.0 ? out.mse : out.mse + lambda * out.cross_entropy;
  return out;
}

}  // namespace mtml

#pragma once

#include <torch/torch.h>

namespace mtml {

/// Stage-1 objective: mean of (s - s_hat)^2 over batch and pixels.
torch::Tensor reconstruction_loss(const torch::Tensor& source, const torch::Tensor& reconstruction);

/// Stage-2 objective: batch mean of -log softmax(logits)[label].
torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels);

struct JointLoss {
  torch::Tensor total;
  torch::Tensor mse;
  torch::Tensor cross_entropy;
};

/// Stage-3 objective: mse + lambda * cross_entropy, components kept for logging.
JointLoss joint_loss(const torch::Tensor& source, const torch::Tensor& reconstruction, const torch::Tensor& logits,
                     const torch::Tensor& labels, double lambda);

}  // namespace mtml

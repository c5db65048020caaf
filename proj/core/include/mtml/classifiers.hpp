#pragma once

#include <torch/torch.h>

#include "mtml/jscc.hpp"

namespace mtml {

/// Relay classifier: the encoder backbone without projection, mean over
/// tokens, then an MLP head (c2 -> c2 -> classes).
class ImageClassifierImpl : public torch::nn::Module {
 public:
  ImageClassifierImpl(const CodecOptions& opts, int64_t num_classes);

  /// (B, 3, H, W) -> (B, num_classes) logits.
  torch::Tensor forward(const torch::Tensor& image);

 private:
  ImageBackbone backbone_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(ImageClassifier);

/// Destination classifier on received patches: linear lift l -> c2, stage-2
/// Swin blocks on the patch grid, mean pooling, MLP head.
class SignalClassifierImpl : public torch::nn::Module {
 public:
  SignalClassifierImpl(const CodecOptions& opts, int64_t num_classes);

  /// (B, n, l) real -> (B, num_classes) logits.
  torch::Tensor forward(const torch::Tensor& patches);

 private:
  CodecOptions opts_;
  torch::nn::Linear lift_{nullptr};
  SwinStage blocks_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(SignalClassifier);

/// argmax over the class dimension.
torch::Tensor predict(const torch::Tensor& logits);

}  // namespace mtml

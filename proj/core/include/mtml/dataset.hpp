#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "mtml/config.hpp"

namespace mtml {

enum class Split { kTrain, kEval };

/// Images (N, 3, H, W) float32 in [0, 1] with int64 labels (N,).
struct LabeledImageSet {
  torch::Tensor images;
  torch::Tensor labels;
  Split split = Split::kTrain;
  std::vector<int64_t> class_counts;

  int64_t size() const { return labels.defined() ? labels.size(0) : 0; }
  LabeledImageSet subset(const torch::Tensor& indices) const;
};

/// Builds a set and fills `class_counts`; throws DataError on labels outside [0, num_classes).
LabeledImageSet make_labeled_set(torch::Tensor images, torch::Tensor labels, Split split, int64_t num_classes);

/// Loads (train, eval) according to `cfg.dataset`:
///   stl10      <data_dir>/stl10_binary/{train,test}_{X,y}.bin   (5000 / 8000 images, 96x96)
///   cifar10    <data_dir>/cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin
///   toy_subset synthesized from cfg.seed, no files needed
/// Real datasets are filtered to labels < num_classes and resized to image_size.
/// If a `MANIFEST` file ("<fnv1a64 hex> <file name>" per line) sits next to
/// the binaries, every listed file is verified against it.
std::pair<LabeledImageSet, LabeledImageSet> load_dataset(const ExperimentConfig& cfg);

/// Deterministic synthetic set: class k is a grating at orientation k*pi/C in a
/// class colour with a class-coloured disc; phase, frequency, contrast,
/// brightness and disc position vary per image. Labels cycle 0,1,..,C-1.
LabeledImageSet make_toy_subset(int64_t num_classes, int64_t per_class, int64_t image_size, uint64_t seed,
                                Split split);

/// STL-10 binary layout: 3 x 96 x 96 uint8 per image, each channel
/// column-major; labels are bytes 1..10.
LabeledImageSet parse_stl10(std::span<const uint8_t> images, std::span<const uint8_t> labels, Split split);

/// CIFAR-10 binary layout: records of 1 label byte + 3 x 32 x 32 uint8 (row-major).
LabeledImageSet parse_cifar10(std::span<const uint8_t> records, Split split);

/// Shuffled minibatch index tensors for one epoch.
std::vector<torch::Tensor> epoch_batches(int64_t size, int64_t batch_size, uint64_t seed);

}  // namespace mtml

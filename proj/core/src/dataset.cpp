#include "mtml/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <ATen/CPUGeneratorImpl.h>
#include <fmt/format.h>

#include "mtml/errors.hpp"
#include "mtml/hash.hpp"

namespace mtml {

namespace fs = std::filesystem;

namespace {

constexpr int64_t kStlSide = 96;
constexpr int64_t kStlBytes = 3 * kStlSide * kStlSide;
constexpr int64_t kStlTrain = 5000;
constexpr int64_t kStlEval = 8000;
constexpr int64_t kCifarSide = 32;
constexpr int64_t kCifarRecord = 1 + 3 * kCifarSide * kCifarSide;
constexpr int64_t kCifarPerBatch = 10000;

// Class colours for the synthetic set, RGB in [0, 1].
constexpr std::array<std::array<float, 3>, 10> kPalette = {{
    {0.90f, 0.20f, 0.15f},
    {0.15f, 0.45f, 0.90f},
    {0.20f, 0.80f, 0.25f},
    {0.95f, 0.80f, 0.10f},
    {0.70f, 0.25f, 0.85f},
    {0.10f, 0.80f, 0.80f},
    {0.95f, 0.55f, 0.15f},
    {0.55f, 0.35f, 0.20f},
    {0.85f, 0.45f, 0.65f},
    {0.45f, 0.60f, 0.30f},
}};

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("missing data file '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void verify_manifest(const fs::path& dir) {
  const auto manifest = dir / "MANIFEST";
  if (!fs::exists(manifest)) return;
  std::ifstream in(manifest);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string hex, name;
    if (!(ls >> hex >> name)) continue;
    const auto bytes = read_file(dir / name);
    const auto actual = fnv1a64(std::span<const unsigned char>(bytes.data(), bytes.size()));
    if (fmt::format("{:016x}", actual) != hex) {
      throw DataError(fmt::format("checksum mismatch for '{}': expected {}, got {:016x}", name, hex, actual));
    }
  }
}

void expect_size(const std::vector<uint8_t>& bytes, int64_t expected, const fs::path& path) {
  if (static_cast<int64_t>(bytes.size()) != expected) {
    throw DataError(fmt::format("size mismatch for '{}': expected {} bytes, got {}", path.string(), expected,
                                bytes.size()));
  }
}

LabeledImageSet adapt(const LabeledImageSet& raw, const ExperimentConfig& cfg) {
  auto keep = (raw.labels < cfg.num_classes).nonzero().squeeze(1);
  auto images = raw.images.index_select(0, keep);
  auto labels = raw.labels.index_select(0, keep);
  if (images.size(2) != cfg.image_size) {
    namespace F = torch::nn::functional;
    auto opts = F::InterpolateFuncOptions().size(std::vector<int64_t>{cfg.image_size, cfg.image_size});
    if (images.size(2) > cfg.image_size) {
      opts.mode(torch::kArea);
    } else {
      opts.mode(torch::kBilinear).align_corners(false);
    }
    images = F::interpolate(images, opts).clamp(0.0, 1.0);
  }
  return make_labeled_set(images.contiguous(), labels, raw.split, cfg.num_classes);
}

std::pair<LabeledImageSet, LabeledImageSet> load_stl10(const ExperimentConfig& cfg) {
  const auto dir = fs::path(cfg.data_dir) / "stl10_binary";
  if (!fs::is_directory(dir)) throw DataError(fmt::format("missing dataset directory '{}'", dir.string()));
  verify_manifest(dir);
  auto load_split = [&](const char* stem, int64_t count, Split split) {
    const auto xp = dir / fmt::format("{}_X.bin", stem);
    const auto yp = dir / fmt::format("{}_y.bin", stem);
    const auto x = read_file(xp);
    const auto y = read_file(yp);
    expect_size(x, count * kStlBytes, xp);
    expect_size(y, count, yp);
    return adapt(parse_stl10(x, y, split), cfg);
  };
  return {load_split("train", kStlTrain, Split::kTrain), load_split("test", kStlEval, Split::kEval)};
}

std::pair<LabeledImageSet, LabeledImageSet> load_cifar10(const ExperimentConfig& cfg) {
  const auto dir = fs::path(cfg.data_dir) / "cifar-10-batches-bin";
  if (!fs::is_directory(dir)) throw DataError(fmt::format("missing dataset directory '{}'", dir.string()));
  verify_manifest(dir);
  std::vector<uint8_t> train;
  for (int i = 1; i <= 5; ++i) {
    const auto p = dir / fmt::format("data_batch_{}.bin", i);
    const auto bytes = read_file(p);
    expect_size(bytes, kCifarPerBatch * kCifarRecord, p);
    train.insert(train.end(), bytes.begin(), bytes.end());
  }
  const auto tp = dir / "test_batch.bin";
  const auto test = read_file(tp);
  expect_size(test, kCifarPerBatch * kCifarRecord, tp);
  return {adapt(parse_cifar10(train, Split::kTrain), cfg), adapt(parse_cifar10(test, Split::kEval), cfg)};
}

}  // namespace

LabeledImageSet LabeledImageSet::subset(const torch::Tensor& indices) const {
  LabeledImageSet out;
  out.images = images.index_select(0, indices);
  out.labels = labels.index_select(0, indices);
  out.split = split;
  out.class_counts.assign(class_counts.size(), 0);
  const auto l = out.labels.contiguous();
  for (int64_t i = 0; i < l.numel(); ++i) ++out.class_counts[static_cast<std::size_t>(l.data_ptr<int64_t>()[i])];
  return out;
}

LabeledImageSet make_labeled_set(torch::Tensor images, torch::Tensor labels, Split split, int64_t num_classes) {
  if (images.dim() != 4 || images.size(1) != 3 || labels.dim() != 1 || images.size(0) != labels.size(0)) {
    throw DataError("dataset: images must be (N, 3, H, W) with N labels");
  }
  LabeledImageSet set{std::move(images), labels.to(torch::kLong).contiguous(), split, {}};
  set.class_counts.assign(static_cast<std::size_t>(num_classes), 0);
  const auto* p = set.labels.data_ptr<int64_t>();
  for (int64_t i = 0; i < set.labels.numel(); ++i) {
    if (p[i] < 0 || p[i] >= num_classes) {
      throw DataError(fmt::format("dataset: label {} outside [0, {})", p[i], num_classes));
    }
    ++set.class_counts[static_cast<std::size_t>(p[i])];
  }
  return set;
}

LabeledImageSet parse_stl10(std::span<const uint8_t> images, std::span<const uint8_t> labels, Split split) {
  const auto count = static_cast<int64_t>(labels.size());
  if (static_cast<int64_t>(images.size()) != count * kStlBytes) {
    throw DataError(fmt::format("stl10: {} image bytes do not match {} labels", images.size(), count));
  }
  auto raw = torch::from_blob(const_cast<uint8_t*>(images.data()), {count, 3, kStlSide, kStlSide}, torch::kUInt8);
  // Stored column-major per channel.
  auto x = raw.transpose(2, 3).to(torch::kFloat).div(255.0).contiguous();
  auto y = torch::from_blob(const_cast<uint8_t*>(labels.data()), {count}, torch::kUInt8).to(torch::kLong) - 1;
  return make_labeled_set(x, y, split, 10);
}

LabeledImageSet parse_cifar10(std::span<const uint8_t> records, Split split) {
  if (records.size() % kCifarRecord != 0) {
    throw DataError(fmt::format("cifar10: {} bytes is not a whole number of records", records.size()));
  }
  const auto count = static_cast<int64_t>(records.size()) / kCifarRecord;
  auto raw = torch::from_blob(const_cast<uint8_t*>(records.data()), {count, kCifarRecord}, torch::kUInt8);
  auto y = raw.select(1, 0).to(torch::kLong);
  auto x = raw.slice(1, 1).reshape({count, 3, kCifarSide, kCifarSide}).to(torch::kFloat).div(255.0).contiguous();
  return make_labeled_set(x, y, split, 10);
}

LabeledImageSet make_toy_subset(int64_t num_classes, int64_t per_class, int64_t image_size, uint64_t seed,
                                Split split) {
  if (num_classes < 1 || num_classes > 10 || per_class < 1 || image_size < 4) {
    throw DataError("toy_subset: need 1..10 classes, a positive count and image_size >= 4");
  }
  const int64_t count = num_classes * per_class;
  std::mt19937_64 rng(seed * 2 + (split == Split::kTrain ? 0 : 1));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.02);
  auto images = torch::empty({count, 3, image_size, image_size});
  auto labels = torch::empty({count}, torch::kLong);
  auto img = images.accessor<float, 4>();
  const double side = static_cast<double>(image_size);
  for (int64_t i = 0; i < count; ++i) {
    const int64_t k = i % num_classes;
    labels[i] = k;
    const auto& colour = kPalette[static_cast<std::size_t>(k)];
    const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_classes) +
                         0.15 * (u01(rng) - 0.5);
    const double freq = 1.5 + 1.5 * u01(rng);
    const double phase = 2.0 * std::numbers::pi * u01(rng);
    const double contrast = 0.20 + 0.15 * u01(rng);
    const double brightness = 0.35 + 0.30 * u01(rng);
    const double cx = side * (0.25 + 0.5 * u01(rng));
    const double cy = side * (0.25 + 0.5 * u01(rng));
    const double radius = side * (0.10 + 0.12 * u01(rng));
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int64_t y = 0; y < image_size; ++y) {
      for (int64_t x = 0; x < image_size; ++x) {
        const double t = (static_cast<double>(x) * ct + static_cast<double>(y) * st) / side;
        const double stripe = std::sin(2.0 * std::numbers::pi * freq * t + phase);
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        const bool in_disc = dx * dx + dy * dy <= radius * radius;
        for (int c = 0; c < 3; ++c) {
          double v = brightness * (0.6 + 0.4 * colour[c]) + contrast * stripe * (0.5 + colour[c]);
          if (in_disc) v = 0.2 * v + 0.8 * colour[c];
          v += jitter(rng);
          img[i][c][y][x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    }
  }
  return make_labeled_set(images, labels, split, num_classes);
}

std::pair<LabeledImageSet, LabeledImageSet> load_dataset(const ExperimentConfig& cfg) {
  switch (cfg.dataset) {
    case DatasetName::kStl10: return load_stl10(cfg);
    case DatasetName::kCifar10: return load_cifar10(cfg);
    case DatasetName::kToySubset:
      return {make_toy_subset(cfg.num_classes, cfg.toy_per_class_train, cfg.image_size, cfg.seed, Split::kTrain),
              make_toy_subset(cfg.num_classes, cfg.toy_per_class_eval, cfg.image_size, cfg.seed, Split::kEval)};
  }
  throw DataError("unknown dataset");
}

std::vector<torch::Tensor> epoch_batches(int64_t size, int64_t batch_size, uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  const auto order = torch::randperm(size, gen, torch::kLong);
  std::vector<torch::Tensor> out;
  for (int64_t start = 0; start < size; start += batch_size) {
    out.push_back(order.slice(0, start, std::min(size, start + batch_size)));
  }
  return out;
}

}  // namespace mtml

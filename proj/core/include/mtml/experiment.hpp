#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "mtml/checkpoint.hpp"
#include "mtml/dataset.hpp"
#include "mtml/metrics.hpp"
#include "mtml/pipeline.hpp"
#include "mtml/results.hpp"

namespace mtml {

struct EvalResult {
  Scheme scheme = Scheme::kMtml;
  Psnr psnr;
  double accuracy = 0.0;
  int64_t eval_size = 0;
  uint64_t seed = 0;
};

/// Inference over the whole eval split, one channel realization per image,
/// drawn from `noise_seed` (identical for every scheme).
EvalResult evaluate(RelayPipeline& pipeline, const LabeledImageSet& eval, Scheme scheme, uint64_t noise_seed);

/// Noise seed used for evaluation trial `trial` of a config.
uint64_t eval_noise_seed(const ExperimentConfig& cfg, int trial);

/// Trains whatever stages `progress` is missing for `schemes`, in order.
TrainingProgress train_missing(RelayPipeline& pipeline, const LabeledImageSet& train, TrainingProgress progress,
                               const std::vector<Scheme>& schemes, std::ostream* log,
                               std::string* optimizer_state = nullptr);

enum class SweepAxis { kSnr, kDistance };

struct SweepOptions {
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<double> points;
  std::vector<Scheme> schemes{Scheme::kMtml, Scheme::kBaseline};
  std::filesystem::path checkpoint_dir = "checkpoints";
  bool train_on_demand = false;
  int trials = 1;
  std::ostream* log = nullptr;
};

/// Config of one sweep point: the SNR axis varies snr_db; the distance axis
/// varies d_sr (d_rd follows as 1 - d_sr) at the base config's SNR.
ExperimentConfig config_for_point(const ExperimentConfig& base, SweepAxis axis, double value);

/// "<fading>_snr<snr>_dsr<d>_seed<seed>.ckpt"
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const ExperimentConfig& cfg);

/// Evaluates every scheme at every point (ascending), loading per-point
/// checkpoints or training them when `train_on_demand` is set.
ResultsTable run_sweep(const ExperimentConfig& base, const SweepOptions& opts);

}  // namespace mtml

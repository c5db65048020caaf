#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "mtml/checkpoint.hpp"
#include "mtml/dataset.hpp"
#include "mtml/pipeline.hpp"

namespace mtml {

/// One line of the training log.
struct EpochRecord {
  int stage = 0;
  std::string scheme;  // "shared" for stages 1-2
  int64_t epoch = 0;
  double loss = 0.0;
  double mse = 0.0;
  double cross_entropy = 0.0;
  double psnr_db = 0.0;
  double accuracy = 0.0;
};

/// Tab-separated header and row writers for EpochRecord.
std::string epoch_log_header();
std::string format_epoch(const EpochRecord& r);

/// Three-stage optimisation of a RelayNetwork:
///   stage 1  source encoder + relay decoder, MSE over the SR link
///   stage 2  relay classifier on relay reconstructions, cross-entropy
///   stage 3  per scheme: relay re-encoder + destination modules, MSE + lambda * CE
/// Each stage uses Adam at cfg.learning_rate over its own parameter group only.
class Trainer {
 public:
  Trainer(RelayPipeline& pipeline, const LabeledImageSet& train, std::ostream* log = nullptr);

  std::vector<EpochRecord> run_stage1();
  /// Throws StageOrderError unless stage 1 is complete.
  std::vector<EpochRecord> run_stage2();
  /// Throws StageOrderError unless stages 1 and 2 are complete.
  std::vector<EpochRecord> run_stage3(Scheme scheme);

  const TrainingProgress& progress() const { return progress_; }
  void set_progress(const TrainingProgress& p) { progress_ = p; }

  /// Serialised Adam state of the most recent stage, empty before any stage ran.
  std::string optimizer_state() const;

  CheckpointState checkpoint();

 private:
  torch::optim::Adam& start_stage(ParamGroup group);
  void emit(const EpochRecord& r);
  void check_finite(const EpochRecord& partial, int64_t batch, double loss) const;

  RelayPipeline& pipeline_;
  const LabeledImageSet& train_;
  std::ostream* log_;
  bool header_written_ = false;
  TrainingProgress progress_;
  std::unique_ptr<torch::optim::Adam> optimizer_;
};

}  // namespace mtml

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "mtml/network.hpp"

namespace mtml {

inline constexpr uint32_t kCheckpointVersion = 1;

/// Which trainable sets hold trained weights.
struct TrainingProgress {
  bool stage1 = false;
  bool stage2 = false;
  bool mtml_stage3 = false;
  bool baseline_stage3 = false;

  bool completed(ParamGroup g) const;
  void mark(ParamGroup g);
  bool operator==(const TrainingProgress&) const = default;
};

struct CheckpointState {
  TrainingProgress progress;
  std::string config_text;      // resolved config the weights were trained with
  std::vector<std::pair<std::string, torch::Tensor>> parameters;
  std::string optimizer_state;  // serialised optimizer archive of the last stage run; may be empty
};

/// File layout (little-endian):
///   "MTMLCKPT" | u32 version | u8 progress bits | u64 config len | config
///   | u64 n | n x (u32 name len | name | u8 dtype | u32 ndim | i64 dims... | u64 bytes | data)
///   | u64 optimizer len | optimizer | u64 FNV-1a of everything before it
/// Written to a temporary file and renamed into place.
void save_checkpoint(const CheckpointState& state, const std::filesystem::path& path);

/// Reads and fully validates a checkpoint before returning it; a truncated,
/// corrupted or foreign-version file throws CheckpointError.
CheckpointState load_checkpoint(const std::filesystem::path& path);

/// Snapshot of every parameter of `net`.
CheckpointState capture_state(RelayNetwork& net, const TrainingProgress& progress, std::string optimizer_state = {});

/// Copies parameters of completed groups into `net`; parameters of incomplete
/// groups keep their current (fresh) values.
void restore_state(RelayNetwork& net, const CheckpointState& state);

std::string serialize_optimizer(torch::optim::Optimizer& optimizer);
void deserialize_optimizer(torch::optim::Optimizer& optimizer, const std::string& blob);

}  // namespace mtml

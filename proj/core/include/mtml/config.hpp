#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mtml {

enum class DatasetName { kStl10, kCifar10, kToySubset };
enum class Fading { kAwgn, kRayleigh };

/// Which destination signal feeds the class-aided decoder.
enum class DecoderInput {
  kRelayLink,  // y^f from the relay-destination link (default)
  kFused,      // output of the mutual attention module
};

enum class AwgnEqualizer { kMmse, kPassThrough };

std::string_view to_string(DatasetName v);
std::string_view to_string(Fading v);
std::string_view to_string(DecoderInput v);
std::string_view to_string(AwgnEqualizer v);
Fading parse_fading(std::string_view s);

/// Fully resolved experiment description. Defaults are the desk-scale setup;
/// configs/stl10_full.cfg carries the full-scale values.
struct ExperimentConfig {
  DatasetName dataset = DatasetName::kToySubset;
  std::string data_dir = "data";
  int64_t image_size = 32;
  int64_t num_classes = 2;
  int64_t toy_per_class_train = 100;
  int64_t toy_per_class_eval = 50;

  double cbr = 1.0 / 12.0;
  double snr_db = 15.0;
  Fading fading = Fading::kAwgn;
  AwgnEqualizer awgn_equalizer = AwgnEqualizer::kMmse;
  double d_sr = 0.5;
  double path_loss_exp = 2.0;
  double power = 1.0;

  double lambda_cls = 0.1;
  DecoderInput decoder_input = DecoderInput::kRelayLink;

  std::array<int64_t, 2> blocks{1, 2};
  std::array<int64_t, 2> widths{32, 64};
  int64_t window_size = 4;
  int64_t mlp_ratio = 2;
  int64_t fusion_heads = 2;
  int64_t fusion_head_dim = 4;
  int64_t fusion_proj_len = 32;

  uint64_t seed = 0;
  std::array<int64_t, 3> epochs{20, 20, 20};
  int64_t batch_size = 32;
  double learning_rate = 1e-4;

  static constexpr double kDistanceSd = 1.0;
  double d_rd() const { return 1.0 - d_sr; }
};

/// Throws ConfigError naming the first field that violates an invariant.
void validate(const ExperimentConfig& cfg);

/// Parses a flat `key = value` document (`#` starts a comment). Unspecified
/// keys keep their defaults; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serialises every field, so that parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& cfg);
void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Channel-side dimensions implied by image size and bandwidth ratio.
struct CodecDims {
  int64_t complex_symbols = 0;    // round(cbr * 3 * H * W)
  int64_t n_patches = 0;          // (H/4) * (W/4)
  int64_t patch_len_real = 0;     // l, always even
  int64_t complex_per_patch = 0;  // l / 2
  int64_t grid_side = 0;          // H / 4
  int64_t residual = 0;           // complex_symbols - n_patches * l / 2
};

CodecDims derive_dims(const ExperimentConfig& cfg);

}  // namespace mtml

#include "mtml/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "mtml/errors.hpp"

namespace mtml {

std::string_view to_string(DatasetName v) {
  switch (v) {
    case DatasetName::kStl10: return "stl10";
    case DatasetName::kCifar10: return "cifar10";
    case DatasetName::kToySubset: return "toy_subset";
  }
  return "?";
}

std::string_view to_string(Fading v) {
  return v == Fading::kAwgn ? "awgn" : "rayleigh";
}

std::string_view to_string(DecoderInput v) {
  return v == DecoderInput::kRelayLink ? "relay_link" : "fused";
}

std::string_view to_string(AwgnEqualizer v) {
  return v == AwgnEqualizer::kMmse ? "mmse" : "pass_through";
}

Fading parse_fading(std::string_view s) {
  if (s == "awgn") return Fading::kAwgn;
  if (s == "rayleigh") return Fading::kRayleigh;
  throw ConfigError("fading", fmt::format("expected awgn|rayleigh, got '{}'", s));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  // Accept simple fractions such as "1/12".
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    const double num = parse_double(key, trim(v.substr(0, slash)));
    const double den = parse_double(key, trim(v.substr(slash + 1)));
    if (den == 0.0) throw ConfigError(std::string(key), "zero denominator");
    return num / den;
  }
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(std::string(key), fmt::format("not a number: '{}'", v));
  }
  return out;
}

int64_t parse_int(std::string_view key, std::string_view v) {
  int64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(std::string(key), fmt::format("not an integer: '{}'", v));
  }
  return out;
}

template <std::size_t N>
std::array<int64_t, N> parse_int_list(std::string_view key, std::string_view v) {
  std::array<int64_t, N> out{};
  std::size_t i = 0;
  while (true) {
    const auto comma = v.find(',');
    if (i >= N) throw ConfigError(std::string(key), fmt::format("expected {} values", N));
    out[i++] = parse_int(key, trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  if (i != N) throw ConfigError(std::string(key), fmt::format("expected {} values", N));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "stl10") c.dataset = DatasetName::kStl10;
         else if (v == "cifar10") c.dataset = DatasetName::kCifar10;
         else if (v == "toy_subset") c.dataset = DatasetName::kToySubset;
         else throw ConfigError("dataset", fmt::format("unknown dataset '{}'", v));
       }},
      {"data_dir", [](ExperimentConfig& c, std::string_view v) { c.data_dir = std::string(v); }},
      {"image_size", [](ExperimentConfig& c, std::string_view v) { c.image_size = parse_int("image_size", v); }},
      {"num_classes", [](ExperimentConfig& c, std::string_view v) { c.num_classes = parse_int("num_classes", v); }},
      {"toy_per_class_train",
       [](ExperimentConfig& c, std::string_view v) { c.toy_per_class_train = parse_int("toy_per_class_train", v); }},
      {"toy_per_class_eval",
       [](ExperimentConfig& c, std::string_view v) { c.toy_per_class_eval = parse_int("toy_per_class_eval", v); }},
      {"cbr", [](ExperimentConfig& c, std::string_view v) { c.cbr = parse_double("cbr", v); }},
      {"snr_db", [](ExperimentConfig& c, std::string_view v) { c.snr_db = parse_double("snr_db", v); }},
      {"fading", [](ExperimentConfig& c, std::string_view v) { c.fading = parse_fading(v); }},
      {"awgn_equalizer",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "mmse") c.awgn_equalizer = AwgnEqualizer::kMmse;
         else if (v == "pass_through") c.awgn_equalizer = AwgnEqualizer::kPassThrough;
         else throw ConfigError("awgn_equalizer", fmt::format("expected mmse|pass_through, got '{}'", v));
       }},
      {"d_sr", [](ExperimentConfig& c, std::string_view v) { c.d_sr = parse_double("d_sr", v); }},
      {"path_loss_exp", [](ExperimentConfig& c, std::string_view v) { c.path_loss_exp = parse_double("path_loss_exp", v); }},
      {"power", [](ExperimentConfig& c, std::string_view v) { c.power = parse_double("power", v); }},
      {"lambda_cls", [](ExperimentConfig& c, std::string_view v) { c.lambda_cls = parse_double("lambda_cls", v); }},
      {"decoder_input",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "relay_link") c.decoder_input = DecoderInput::kRelayLink;
         else if (v == "fused") c.decoder_input = DecoderInput::kFused;
         else throw ConfigError("decoder_input", fmt::format("expected relay_link|fused, got '{}'", v));
       }},
      {"blocks", [](ExperimentConfig& c, std::string_view v) { c.blocks = parse_int_list<2>("blocks", v); }},
      {"widths", [](ExperimentConfig& c, std::string_view v) { c.widths = parse_int_list<2>("widths", v); }},
      {"window_size", [](ExperimentConfig& c, std::string_view v) { c.window_size = parse_int("window_size", v); }},
      {"mlp_ratio", [](ExperimentConfig& c, std::string_view v) { c.mlp_ratio = parse_int("mlp_ratio", v); }},
      {"fusion_heads", [](ExperimentConfig& c, std::string_view v) { c.fusion_heads = parse_int("fusion_heads", v); }},
      {"fusion_head_dim",
       [](ExperimentConfig& c, std::string_view v) { c.fusion_head_dim = parse_int("fusion_head_dim", v); }},
      {"fusion_proj_len",
       [](ExperimentConfig& c, std::string_view v) { c.fusion_proj_len = parse_int("fusion_proj_len", v); }},
      {"seed",
       [](ExperimentConfig& c, std::string_view v) {
         const auto s = parse_int("seed", v);
         if (s < 0) throw ConfigError("seed", "must be non-negative");
         c.seed = static_cast<uint64_t>(s);
       }},
      {"epochs", [](ExperimentConfig& c, std::string_view v) { c.epochs = parse_int_list<3>("epochs", v); }},
      {"batch_size", [](ExperimentConfig& c, std::string_view v) { c.batch_size = parse_int("batch_size", v); }},
      {"learning_rate", [](ExperimentConfig& c, std::string_view v) { c.learning_rate = parse_double("learning_rate", v); }},
  };
  return table;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* field, const std::string& why) {
    if (!ok) throw ConfigError(field, why);
  };
  require(c.image_size > 0 && c.image_size % 4 == 0, "image_size", "must be a positive multiple of 4");
  require(c.num_classes >= 2 && c.num_classes <= 10, "num_classes", "must be in [2, 10]");
  require(c.toy_per_class_train > 0, "toy_per_class_train", "must be positive");
  require(c.toy_per_class_eval > 0, "toy_per_class_eval", "must be positive");
  require(std::isfinite(c.cbr) && c.cbr > 0.0, "cbr", "must be positive");
  require(std::isfinite(c.snr_db), "snr_db", "must be finite");
  require(c.d_sr > 0.0 && c.d_sr < 1.0, "d_sr", "must lie strictly between 0 and 1");
  require(std::isfinite(c.path_loss_exp) && c.path_loss_exp >= 0.0, "path_loss_exp", "must be non-negative");
  require(c.power > 0.0, "power", "must be positive");
  require(std::isfinite(c.lambda_cls) && c.lambda_cls >= 0.0, "lambda_cls", "must be non-negative");
  require(c.blocks[0] >= 1 && c.blocks[1] >= 1, "blocks", "each stage needs at least one block");
  require(c.widths[0] > 0 && c.widths[1] == 2 * c.widths[0], "widths", "stage-2 width must be twice stage-1 width");
  require(c.window_size >= 1, "window_size", "must be positive");
  const int64_t grid1 = c.image_size / 2;
  const int64_t grid2 = c.image_size / 4;
  require(grid1 % std::min(c.window_size, grid1) == 0 && grid2 % std::min(c.window_size, grid2) == 0,
          "window_size", "must divide both token grids");
  require(c.mlp_ratio >= 1, "mlp_ratio", "must be positive");
  require(c.fusion_heads >= 1 && c.fusion_head_dim >= 1, "fusion_heads", "must be positive");
  require(c.fusion_proj_len > 0 && c.fusion_proj_len % (c.fusion_heads * c.fusion_head_dim) == 0,
          "fusion_proj_len", "must be a multiple of fusion_heads * fusion_head_dim");
  require(c.epochs[0] >= 0 && c.epochs[1] >= 0 && c.epochs[2] >= 0, "epochs", "must be non-negative");
  require(c.batch_size >= 1, "batch_size", "must be positive");
  require(c.learning_rate > 0.0, "learning_rate", "must be positive");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  const auto& table = setters();
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}", line_no), "expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(std::string(key), "unknown key");
    it->second(cfg, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("path", fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::string out;
  auto put = [&out](std::string_view k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
  put("dataset", to_string(c.dataset));
  put("data_dir", c.data_dir);
  put("image_size", c.image_size);
  put("num_classes", c.num_classes);
  put("toy_per_class_train", c.toy_per_class_train);
  put("toy_per_class_eval", c.toy_per_class_eval);
  // Shortest round-trip representation.
  put("cbr", fmt::format("{}", c.cbr));
  put("snr_db", fmt::format("{}", c.snr_db));
  put("fading", to_string(c.fading));
  put("awgn_equalizer", to_string(c.awgn_equalizer));
  put("d_sr", fmt::format("{}", c.d_sr));
  put("path_loss_exp", fmt::format("{}", c.path_loss_exp));
  put("power", fmt::format("{}", c.power));
  put("lambda_cls", fmt::format("{}", c.lambda_cls));
  put("decoder_input", to_string(c.decoder_input));
  put("blocks", fmt::format("{},{}", c.blocks[0], c.blocks[1]));
  put("widths", fmt::format("{},{}", c.widths[0], c.widths[1]));
  put("window_size", c.window_size);
  put("mlp_ratio", c.mlp_ratio);
  put("fusion_heads", c.fusion_heads);
  put("fusion_head_dim", c.fusion_head_dim);
  put("fusion_proj_len", c.fusion_proj_len);
  put("seed", c.seed);
  put("epochs", fmt::format("{},{},{}", c.epochs[0], c.epochs[1], c.epochs[2]));
  put("batch_size", c.batch_size);
  put("learning_rate", fmt::format("{}", c.learning_rate));
  return out;
}

void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("path", fmt::format("cannot write '{}'", path.string()));
  out << "# resolved experiment configuration\n" << to_config_text(cfg);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_config_text(a) == to_config_text(b);
}

CodecDims derive_dims(const ExperimentConfig& cfg) {
  if (!(cfg.cbr > 0.0)) throw ConfigError("cbr", "must be positive");
  if (cfg.image_size <= 0 || cfg.image_size % 4 != 0) {
    throw ConfigError("image_size", "must be a positive multiple of 4");
  }
  CodecDims d;
  const double values = 3.0 * static_cast<double>(cfg.image_size * cfg.image_size);
  d.complex_symbols = std::llround(cfg.cbr * values);
  d.grid_side = cfg.image_size / 4;
  d.n_patches = d.grid_side * d.grid_side;
  // l = 2 * (symbols per patch), rounded so l stays even.
  const int64_t per_patch = std::llround(static_cast<double>(d.complex_symbols) / static_cast<double>(d.n_patches));
  d.complex_per_patch = per_patch;
  d.patch_len_real = 2 * per_patch;
  if (d.patch_len_real < 2) {
    throw ConfigError("cbr", fmt::format("too small: {} complex symbols over {} patches", d.complex_symbols,
                                         d.n_patches));
  }
  d.residual = d.complex_symbols - d.n_patches * d.complex_per_patch;
  return d;
}

}  // namespace mtml

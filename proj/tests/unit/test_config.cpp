#include <cmath>

#include <gtest/gtest.h>

#include "mtml/config.hpp"
#include "mtml/errors.hpp"

namespace mtml {
namespace {

// Independent arithmetic for the channel dimensions.
struct DimsOracle {
  int64_t symbols, n, l;
};
DimsOracle dims_oracle(int64_t side, double cbr) {
  const double values = 3.0 * side * side;
  const auto symbols = static_cast<int64_t>(std::floor(cbr * values + 0.5));
  const int64_t n = (side / 4) * (side / 4);
  const auto per = static_cast<int64_t>(std::floor(static_cast<double>(symbols) / n + 0.5));
  return {symbols, n, 2 * per};
}

TEST(DeriveDims, Stl10SizeAtOneTwelfth) {
  ExperimentConfig cfg;
  cfg.image_size = 96;
  const auto d = derive_dims(cfg);
  EXPECT_EQ(d.n_patches, 576);
  EXPECT_EQ(d.patch_len_real, 8);
  EXPECT_EQ(d.complex_symbols, 2304);
  EXPECT_EQ(d.residual, 0);
  EXPECT_EQ(d.grid_side, 24);
}

TEST(DeriveDims, CifarSizeAtOneTwelfth) {
  ExperimentConfig cfg;
  cfg.image_size = 32;
  const auto d = derive_dims(cfg);
  EXPECT_EQ(d.n_patches, 64);
  EXPECT_EQ(d.patch_len_real, 8);
  EXPECT_EQ(d.complex_symbols, 256);
  EXPECT_EQ(d.residual, 0);
}

TEST(DeriveDims, MatchesOracleOverSizesAndRatios) {
  for (int64_t side : {16, 32, 48, 64, 96, 128}) {
    for (double cbr : {1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0}) {
      ExperimentConfig cfg;
      cfg.image_size = side;
      cfg.cbr = cbr;
      const auto o = dims_oracle(side, cbr);
      if (o.l < 2) {
        EXPECT_THROW(derive_dims(cfg), ConfigError);
        continue;
      }
      const auto d = derive_dims(cfg);
      EXPECT_EQ(d.complex_symbols, o.symbols) << side << " " << cbr;
      EXPECT_EQ(d.n_patches, o.n);
      EXPECT_EQ(d.patch_len_real, o.l);
      EXPECT_EQ(d.patch_len_real % 2, 0);
      EXPECT_EQ(d.residual, o.symbols - o.n * o.l / 2);
    }
  }
}

TEST(DeriveDims, RejectsBadInputs) {
  ExperimentConfig cfg;
  cfg.image_size = 30;
  EXPECT_THROW(derive_dims(cfg), ConfigError);
  cfg.image_size = 32;
  cfg.cbr = 0.0;
  EXPECT_THROW(derive_dims(cfg), ConfigError);
  cfg.cbr = 1e-4;
  EXPECT_THROW(derive_dims(cfg), ConfigError);
}

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(validate(ExperimentConfig{})); }

TEST(Config, RelayDistanceIsComplementary) {
  ExperimentConfig cfg;
  cfg.d_sr = 0.7;
  EXPECT_DOUBLE_EQ(cfg.d_rd(), 1.0 - 0.7);
  EXPECT_EQ(ExperimentConfig::kDistanceSd, 1.0);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig cfg;
  cfg.dataset = DatasetName::kStl10;
  cfg.image_size = 96;
  cfg.fading = Fading::kRayleigh;
  cfg.snr_db = -5.0;
  cfg.d_sr = 0.9;
  cfg.blocks = {2, 4};
  cfg.widths = {128, 256};
  cfg.seed = 17;
  cfg.learning_rate = 1e-4;
  cfg.decoder_input = DecoderInput::kFused;
  cfg.awgn_equalizer = AwgnEqualizer::kPassThrough;
  const auto back = parse_config(to_config_text(cfg));
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(back.d_sr, 0.9);
  EXPECT_EQ(back.cbr, cfg.cbr);
}

TEST(Config, ParsesCommentsFractionsAndLists) {
  const auto cfg = parse_config(
      "# comment\n"
      "cbr = 1/12   # trailing\n"
      "\n"
      "  snr_db=  -5\n"
      "fading = rayleigh\n"
      "epochs = 3, 4, 5\n");
  EXPECT_DOUBLE_EQ(cfg.cbr, 1.0 / 12.0);
  EXPECT_EQ(cfg.snr_db, -5.0);
  EXPECT_EQ(cfg.fading, Fading::kRayleigh);
  EXPECT_EQ(cfg.epochs[2], 5);
  EXPECT_EQ(cfg.image_size, ExperimentConfig{}.image_size);
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const char* text) {
    try {
      validate(parse_config(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of("bogus_key = 1\n"), "bogus_key");
  EXPECT_EQ(field_of("fading = rician\n"), "fading");
  EXPECT_EQ(field_of("snr_db = loud\n"), "snr_db");
  EXPECT_EQ(field_of("epochs = 1, 2\n"), "epochs");
  EXPECT_EQ(field_of("d_sr = 1.0\n"), "d_sr");
  EXPECT_EQ(field_of("d_sr = 0\n"), "d_sr");
  EXPECT_EQ(field_of("num_classes = 11\n"), "num_classes");
  EXPECT_EQ(field_of("widths = 32, 48\n"), "widths");
  EXPECT_EQ(field_of("lambda_cls = -0.1\n"), "lambda_cls");
  EXPECT_EQ(field_of("fusion_proj_len = 30\n"), "fusion_proj_len");
  EXPECT_EQ(field_of("image_size = 30\n"), "image_size");
  EXPECT_EQ(field_of("cbr = 1/0\n"), "cbr");
  EXPECT_EQ(field_of("just words\n"), "line 1");
}

TEST(Config, MissingFileIsAnError) { EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError); }

}  // namespace
}  // namespace mtml

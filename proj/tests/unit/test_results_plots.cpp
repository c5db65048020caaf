#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mtml/errors.hpp"
#include "mtml/plots.hpp"
#include "mtml/results.hpp"

namespace mtml {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mtml_results_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ResultsTable snr_table() {
  ResultsTable t;
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
    for (auto s : {Scheme::kMtml, Scheme::kBaseline}) {
      const double bonus = s == Scheme::kMtml ? 0.1 * (snr + 5.0) : 0.0;
      t.rows.push_back({s, Fading::kAwgn, snr, 0.5, 20.0 + 0.4 * snr + bonus, false,
                        0.6 + 0.01 * snr + 0.001 * bonus, 7, 100});
    }
  }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Results, CsvRoundTripIsExact) {
  auto t = snr_table();
  t.rows[3].psnr_db = 1.0 / 3.0;
  t.rows[4].psnr_saturated = true;
  t.rows[5].fading = Fading::kRayleigh;
  t.rows[6].seed = 18446744073709551615ULL;
  const auto csv = to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsHeader);
  EXPECT_EQ(parse_results(csv), t);
}

TEST(Results, AppendNeverRewritesAndWritesHeaderOnce) {
  const auto path = scratch("append") / "results.csv";
  ResultsTable one{{snr_table().rows[0]}};
  append_results(one, path, "run A");
  const auto first = slurp(path);
  append_results(one, path, "run B");
  const auto both = slurp(path);
  EXPECT_EQ(both.substr(0, first.size()), first);
  std::size_t headers = 0;
  for (std::size_t pos = 0; (pos = both.find(kResultsHeader, pos)) != std::string::npos; ++pos) ++headers;
  EXPECT_EQ(headers, 1U);
  EXPECT_NE(both.find("# run A"), std::string::npos);
  EXPECT_NE(both.find("# run B"), std::string::npos);
  EXPECT_EQ(read_results(path).rows.size(), 2U);
}

TEST(Results, MalformedInputIsAnError) {
  EXPECT_THROW(parse_results("mtml_rsc,awgn,5\n"), Error);
  EXPECT_THROW(parse_results("mtml_rsc,awgn,x,0.5,20,0,0.6,1,100\n"), Error);
  EXPECT_THROW(read_results("/nonexistent/results.csv"), Error);
}

TEST(Plots, SnrSweepGivesTwoFiguresAndOneCsv) {
  const auto table = snr_table();
  ASSERT_EQ(table.rows.size(), 10U);
  const auto figures = build_figures(table);
  ASSERT_EQ(figures.size(), 2U);
  EXPECT_EQ(figures[0].x_label, "SNR (dB)");
  EXPECT_EQ(figures[0].y_label, "PSNR (dB)");
  EXPECT_EQ(figures[1].y_label, "Accuracy (%)");
  ASSERT_EQ(figures[0].series.size(), 2U);
  for (const auto& s : figures[0].series) {
    ASSERT_EQ(s.points.size(), 5U);
    for (std::size_t i = 1; i < s.points.size(); ++i) EXPECT_LT(s.points[i - 1].first, s.points[i].first);
  }

  const auto dir = scratch("plots");
  const auto written = emit_plots(table, dir);
  ASSERT_EQ(written.size(), 3U);
  int png = 0, csv = 0;
  for (const auto& p : written) {
    ASSERT_TRUE(fs::exists(p)) << p;
    if (p.extension() == ".png") {
      ++png;
      EXPECT_EQ(slurp(p).substr(1, 3), "PNG");
    } else if (p.extension() == ".csv") {
      ++csv;
      EXPECT_EQ(read_results(p), table);
    }
  }
  EXPECT_EQ(png, 2);
  EXPECT_EQ(csv, 1);
}

TEST(Plots, DistanceSweepUsesRelayPositionAxis) {
  ResultsTable t;
  for (double d : {0.5, 0.7, 0.9}) t.rows.push_back({Scheme::kMtml, Fading::kRayleigh, 5.0, d, 25.0, false, 0.6, 0, 10});
  const auto figures = build_figures(t);
  ASSERT_EQ(figures.size(), 2U);
  EXPECT_EQ(figures[0].x_label, "d_SR (normalized distance)");
}

TEST(Plots, EmptyTableIsAnError) { EXPECT_THROW(build_figures(ResultsTable{}), Error); }

}  // namespace
}  // namespace mtml

#include "mtml/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mtml/errors.hpp"

namespace mtml {

namespace fs = std::filesystem;

namespace {

const cv::Scalar kPalette[] = {{200, 80, 30}, {30, 30, 200}, {40, 150, 40}, {150, 40, 150}};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::vector<FigureSpec> build_figures(const ResultsTable& table) {
  if (table.rows.empty()) throw Error("plot: results table is empty");
  std::set<double> snrs, dists;
  for (const auto& r : table.rows) snrs.insert(r.snr_db), dists.insert(r.d_sr);
  const bool snr_axis = snrs.size() > 1 || dists.size() <= 1;

  std::map<Fading, std::map<Scheme, std::map<double, std::pair<double, double>>>> data;
  std::map<Fading, std::map<Scheme, std::map<double, int>>> counts;
  for (const auto& r : table.rows) {
    const double x = snr_axis ? r.snr_db : r.d_sr;
    auto& cell = data[r.fading][r.scheme][x];
    cell.first += r.psnr_db;
    cell.second += r.accuracy * 100.0;
    ++counts[r.fading][r.scheme][x];
  }

  std::vector<FigureSpec> figures;
  const std::string axis_tag = snr_axis ? "snr" : "dsr";
  const std::string x_label = snr_axis ? "SNR (dB)" : "d_SR (normalized distance)";
  for (const auto& [fading, by_scheme] : data) {
    for (const bool is_psnr : {true, false}) {
      FigureSpec f;
      f.file_name = fmt::format("{}_vs_{}_{}.png", is_psnr ? "psnr" : "accuracy", axis_tag, to_string(fading));
      f.title = fmt::format("{} vs {} ({})", is_psnr ? "PSNR" : "Accuracy", snr_axis ? "SNR" : "d_SR",
                            to_string(fading));
      f.x_label = x_label;
      f.y_label = is_psnr ? "PSNR (dB)" : "Accuracy (%)";
      for (const auto& [scheme, points] : by_scheme) {
        Series s{std::string(to_string(scheme)), {}};
        for (const auto& [x, v] : points) {
          const double n = counts[fading][scheme][x];
          s.points.emplace_back(x, (is_psnr ? v.first : v.second) / n);
        }
        f.series.push_back(std::move(s));
      }
      figures.push_back(std::move(f));
    }
  }
  return figures;
}

void render_png(const FigureSpec& figure, const fs::path& path) {
  constexpr int kW = 720, kH = 480, kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
  cv::Mat img(kH, kW, CV_8UC3, cv::Scalar(255, 255, 255));
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : figure.series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (x1 <= x0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.08 * (y1 - y0);
  y0 -= pad, y1 += pad;
  const int pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto to_px = [&](double x, double y) {
    return cv::Point(kLeft + static_cast<int>(std::lround((x - x0) / (x1 - x0) * pw)),
                     kTop + ph - static_cast<int>(std::lround((y - y0) / (y1 - y0) * ph)));
  };
  const auto black = cv::Scalar(0, 0, 0), grey = cv::Scalar(220, 220, 220);
  const auto font = cv::FONT_HERSHEY_SIMPLEX;

  for (const auto& [lo, hi, vertical] : {std::tuple{x0, x1, true}, std::tuple{y0, y1, false}}) {
    const double step = nice_step(hi - lo);
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9; t += step) {
      const auto a = vertical ? to_px(t, y0) : to_px(x0, t);
      const auto b = vertical ? to_px(t, y1) : to_px(x1, t);
      cv::line(img, a, b, grey, 1);
      const auto label = fmt::format("{:g}", std::abs(t) < 1e-12 ? 0.0 : t);
      const auto at = vertical ? cv::Point(a.x - 12, a.y + 18) : cv::Point(kLeft - 55, a.y + 5);
      cv::putText(img, label, at, font, 0.45, black, 1, cv::LINE_AA);
    }
  }
  cv::rectangle(img, to_px(x0, y1), to_px(x1, y0), black, 1);

  for (std::size_t i = 0; i < figure.series.size(); ++i) {
    const auto& s = figure.series[i];
    const auto colour = kPalette[i % std::size(kPalette)];
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      const auto p = to_px(s.points[j].first, s.points[j].second);
      cv::circle(img, p, 4, colour, cv::FILLED, cv::LINE_AA);
      if (j > 0) cv::line(img, to_px(s.points[j - 1].first, s.points[j - 1].second), p, colour, 2, cv::LINE_AA);
    }
    const int ly = kTop + 20 + 24 * static_cast<int>(i);
    cv::line(img, {kW - kRight + 15, ly - 5}, {kW - kRight + 45, ly - 5}, colour, 2, cv::LINE_AA);
    cv::putText(img, s.name, {kW - kRight + 52, ly}, font, 0.5, black, 1, cv::LINE_AA);
  }
  cv::putText(img, figure.title, {kLeft, kTop - 14}, font, 0.6, black, 1, cv::LINE_AA);
  cv::putText(img, figure.x_label, {kLeft + pw / 2 - 80, kH - 15}, font, 0.5, black, 1, cv::LINE_AA);
  cv::Mat ylabel(30, ph, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(ylabel, figure.y_label, {ph / 2 - 50, 20}, font, 0.5, black, 1, cv::LINE_AA);
  cv::rotate(ylabel, ylabel, cv::ROTATE_90_COUNTERCLOCKWISE);
  ylabel.copyTo(img(cv::Rect(5, kTop, 30, ph)));

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), img)) throw Error(fmt::format("cannot write figure '{}'", path.string()));
}

std::vector<fs::path> emit_plots(const ResultsTable& table, const fs::path& out_dir) {
  const auto figures = build_figures(table);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error(fmt::format("cannot create '{}'", out_dir.string()));
  std::vector<fs::path> written;
  for (const auto& f : figures) {
    written.push_back(out_dir / f.file_name);
    render_png(f, written.back());
  }
  written.push_back(out_dir / "figures.csv");
  std::ofstream out(written.back());
  if (!out) throw Error(fmt::format("cannot write '{}'", written.back().string()));
  out << to_csv(table);
  return written;
}

}  // namespace mtml

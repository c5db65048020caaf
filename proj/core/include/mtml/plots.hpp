#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mtml/results.hpp"

namespace mtml {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

struct FigureSpec {
  std::string file_name;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// One PSNR figure and one accuracy figure per fading kind, every scheme
/// overlaid. The x axis is SNR when it varies in the table, otherwise d_SR.
std::vector<FigureSpec> build_figures(const ResultsTable& table);

/// Rasterises a figure to PNG.
void render_png(const FigureSpec& figure, const std::filesystem::path& path);

/// Writes all figures plus a `figures.csv` export into `out_dir` (kept apart from the
/// append-only `results.csv`); returns the paths written.
std::vector<std::filesystem::path> emit_plots(const ResultsTable& table, const std::filesystem::path& out_dir);

}  // namespace mtml

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtml/config.hpp"
#include "mtml/network.hpp"

namespace mtml {

struct ResultRow {
  Scheme scheme = Scheme::kMtml;
  Fading fading = Fading::kAwgn;
  double snr_db = 0.0;
  double d_sr = 0.5;
  double psnr_db = 0.0;
  bool psnr_saturated = false;
  double accuracy = 0.0;
  uint64_t seed = 0;
  int64_t eval_size = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  bool operator==(const ResultsTable&) const = default;
};

/// Column order of the comma-separated export.
inline constexpr const char* kResultsHeader =
    "scheme,fading,snr_db,d_sr,psnr_db,psnr_saturated,accuracy,seed,eval_size";

/// Full-precision CSV body (header + rows).
std::string to_csv(const ResultsTable& table);

/// Appends a `# ...` metadata line and the rows to `path`; the column header is
/// written only when the file is new. Existing content is never rewritten.
void append_results(const ResultsTable& table, const std::filesystem::path& path, const std::string& metadata);

/// Parses a results file, skipping metadata comments and repeated headers.
ResultsTable read_results(const std::filesystem::path& path);
ResultsTable parse_results(const std::string& text);

}  // namespace mtml

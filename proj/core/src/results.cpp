#include "mtml/results.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mtml/errors.hpp"

namespace mtml {

namespace {

std::string row_to_csv(const ResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(r.scheme), to_string(r.fading), r.snr_db, r.d_sr,
                     r.psnr_db, r.psnr_saturated ? 1 : 0, r.accuracy, r.seed, r.eval_size);
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(fmt::format("results line {}: bad number '{}'", line, s));
  }
  return v;
}

}  // namespace

std::string to_csv(const ResultsTable& table) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : table.rows) out += row_to_csv(r);
  return out;
}

void append_results(const ResultsTable& table, const std::filesystem::path& path, const std::string& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(fmt::format("cannot write results to '{}'", path.string()));
  if (fresh) out << kResultsHeader << '\n';
  out << "# " << metadata << '\n';
  for (const auto& r : table.rows) out << row_to_csv(r);
}

ResultsTable parse_results(const std::string& text) {
  ResultsTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("scheme,", 0) == 0) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw Error(fmt::format("results line {}: expected 9 columns, got {}", line_no, f.size()));
    ResultRow r;
    r.scheme = parse_scheme(f[0]);
    r.fading = parse_fading(f[1]);
    r.snr_db = parse_number<double>(f[2], line_no);
    r.d_sr = parse_number<double>(f[3], line_no);
    r.psnr_db = parse_number<double>(f[4], line_no);
    r.psnr_saturated = parse_number<int>(f[5], line_no) != 0;
    r.accuracy = parse_number<double>(f[6], line_no);
    r.seed = parse_number<uint64_t>(f[7], line_no);
    r.eval_size = parse_number<int64_t>(f[8], line_no);
    table.rows.push_back(r);
  }
  return table;
}

ResultsTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read results '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_results(buf.str());
}

}  // namespace mtml

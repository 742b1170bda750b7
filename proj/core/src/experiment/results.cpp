#include "riskcal/experiment/results.hpp"

#include "riskcal/data/csv.hpp"
#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace riskcal::experiment {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(fmt::format("results line {}: '{}' is not a number", line_no, text));
  }
  return value;
}

ResultRow parse_row(const std::string& line, std::size_t line_no) {
  const auto f = split_fields(line);
  if (f.size() != 10) {
    throw DataError(fmt::format("results line {}: expected 10 fields, found {}", line_no, f.size()));
  }
  ResultRow row;
  row.dataset = f[0];
  const double fold = parse_number(f[1], line_no);
  if (fold != std::floor(fold) || fold < 0) throw DataError(fmt::format("results line {}: bad fold", line_no));
  row.fold = static_cast<int>(fold);
  row.regressor = f[2];
  row.calibrator = f[3];
  row.cost = parse_number(f[4], line_no);
  row.rwr_loss = parse_number(f[5], line_no);
  row.reject_rate = parse_number(f[6], line_no);
  row.calib_mae = parse_number(f[7], line_no);
  row.predictor_loss = parse_number(f[8], line_no);
  row.wall_time_ms = parse_number(f[9], line_no);
  if (row.dataset.empty() || row.regressor.empty() || row.calibrator.empty()) {
    throw DataError(fmt::format("results line {}: empty identifier", line_no));
  }
  return row;
}

}  // namespace

bool ResultRow::failed() const {
  return std::isnan(rwr_loss) || std::isnan(reject_rate) || std::isnan(calib_mae) || std::isnan(predictor_loss);
}

std::string ResultRow::key() const {
  return fmt::format("{},{},{},{},{}", dataset, fold, regressor, calibrator, data::format_double(cost));
}

std::string format_result_row(const ResultRow& row) {
  using data::format_double;
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", row.dataset, row.fold, row.regressor, row.calibrator,
                     format_double(row.cost), format_double(row.rwr_loss), format_double(row.reject_rate),
                     format_double(row.calib_mae), format_double(row.predictor_loss),
                     format_double(std::round(row.wall_time_ms * 1000.0) / 1000.0));
}

std::vector<ResultRow> parse_results(const std::string& text, bool tolerate_torn_tail) {
  std::vector<ResultRow> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    if (!terminated) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kResultHeader) throw DataError("results file does not start with the expected header");
      header_seen = true;
      continue;
    }
    try {
      rows.push_back(parse_row(line, line_no));
    } catch (const DataError&) {
      if (tolerate_torn_tail && !terminated) break;
      throw;
    }
  }
  return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path, bool tolerate_torn_tail) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open results '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_results(text.str(), tolerate_torn_tail);
}

void write_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", tmp.string()));
    out << kResultHeader << '\n';
    for (const auto& row : rows) out << format_result_row(row) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace riskcal::experiment

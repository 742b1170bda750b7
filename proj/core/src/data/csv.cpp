#include "riskcal/data/csv.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace riskcal::data {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool all_numeric(const std::vector<std::string>& fields) {
  double ignored = 0.0;
  for (const auto& f : fields) {
    if (!parse_number(f, ignored)) return false;
  }
  return true;
}

std::size_t resolve_target(const CsvSchema& schema, const std::vector<std::string>& header, std::size_t ncols) {
  if (const auto* idx = std::get_if<int>(&schema.target_column)) {
    const long resolved = *idx < 0 ? static_cast<long>(ncols) + *idx : *idx;
    if (resolved < 0 || resolved >= static_cast<long>(ncols)) {
      throw DataError(fmt::format("target column index {} out of range for {} columns", *idx, ncols));
    }
    return static_cast<std::size_t>(resolved);
  }
  const auto& wanted = std::get<std::string>(schema.target_column);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == wanted) return j;
  }
  // A numeric string names an index in headerless files.
  double as_number = 0.0;
  if (parse_number(wanted, as_number) && as_number == std::floor(as_number)) {
    CsvSchema numeric = schema;
    numeric.target_column = static_cast<int>(as_number);
    return resolve_target(numeric, header, ncols);
  }
  throw DataError(fmt::format("target column '{}' not found in header", wanted));
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t ncols = 0;
  std::size_t line_no = 0;
  bool first = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (first) {
      first = false;
      ncols = fields.size();
      const bool is_header = schema.header == HeaderMode::present ||
                             (schema.header == HeaderMode::automatic && !all_numeric(fields));
      if (is_header) {
        header = std::move(fields);
        continue;
      }
    }
    if (fields.size() != ncols) {
      throw DataError(fmt::format("line {}: expected {} fields, found {}", line_no, ncols, fields.size()));
    }
    std::vector<double> values(ncols);
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!parse_number(fields[j], values[j])) {
        throw DataError(fmt::format("line {}, column {}: non-numeric cell '{}'", line_no, j + 1, fields[j]));
      }
      if (!std::isfinite(values[j])) {
        throw DataError(fmt::format("line {}, column {}: non-finite value '{}'", line_no, j + 1, fields[j]));
      }
    }
    rows.push_back(std::move(values));
  }

  if (rows.empty()) throw DataError("empty dataset: no data rows");
  if (ncols < 2) throw DataError("need at least one feature column and one target column");

  const std::size_t target = resolve_target(schema, header, ncols);
  Dataset ds;
  ds.name = schema.name;
  ds.kind = schema.kind;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols - 1));
  ds.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (j == target) {
        ds.targets[static_cast<Eigen::Index>(i)] = rows[i][j];
      } else {
        ds.features(static_cast<Eigen::Index>(i), col++) = rows[i][j];
      }
    }
  }
  for (std::size_t j = 0; j < ncols; ++j) {
    const std::string name = header.empty() ? fmt::format("x{}", j) : header[j];
    if (j == target) {
      ds.target_name = header.empty() ? "y" : name;
    } else {
      ds.feature_names.push_back(name);
    }
  }
  if (ds.kind == TaskKind::classification) {
    ds.num_classes = ds.targets.size() > 0 ? static_cast<int>(ds.targets.maxCoeff()) + 1 : 0;
  }
  ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  CsvSchema named = schema;
  if (named.name.empty()) named.name = path.stem().string();
  try {
    return parse_csv(buffer.str(), named);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), ptr};
}

std::string format_csv(const Dataset& dataset) {
  std::string out;
  const auto d = dataset.features.cols();
  for (Eigen::Index j = 0; j < d; ++j) {
    out += j < static_cast<Eigen::Index>(dataset.feature_names.size()) ? dataset.feature_names[static_cast<std::size_t>(j)]
                                                                        : fmt::format("x{}", j);
    out += ',';
  }
  out += dataset.target_name.empty() ? "y" : dataset.target_name;
  out += '\n';
  for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out += format_double(dataset.features(i, j));
      out += ',';
    }
    out += format_double(dataset.targets[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << format_csv(dataset);
}

}  // namespace riskcal::data

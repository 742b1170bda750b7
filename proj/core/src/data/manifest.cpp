#include "riskcal/data/manifest.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace riskcal::data {
namespace {

const std::set<std::string> kEntryKeys = {"path",          "target_column", "header", "kind",
                                          "expected_rows", "expected_cols", "url"};

HeaderMode parse_header(const toml::node& node, const std::string& name) {
  if (const auto* b = node.as_boolean()) return b->get() ? HeaderMode::present : HeaderMode::absent;
  if (const auto* s = node.as_string(); s && s->get() == "auto") return HeaderMode::automatic;
  throw ConfigError(fmt::format("manifest entry '{}': header must be true, false or \"auto\"", name));
}

}  // namespace

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.parent_path());
}

Manifest Manifest::parse(const std::string& toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("manifest parse error: {}", e.description()));
  }
  const auto* datasets = root["datasets"].as_table();
  if (datasets == nullptr) throw ConfigError("manifest has no [datasets] table");

  Manifest manifest;
  for (const auto& [key, node] : *datasets) {
    const std::string name(key.str());
    const auto* tbl = node.as_table();
    if (tbl == nullptr) throw ConfigError(fmt::format("manifest entry '{}' is not a table", name));
    for (const auto& [field, value] : *tbl) {
      if (!kEntryKeys.contains(std::string(field.str()))) {
        throw ConfigError(fmt::format("manifest entry '{}': unknown key '{}'", name, field.str()));
      }
    }
    ManifestEntry entry;
    entry.name = name;
    const auto path = (*tbl)["path"].value<std::string>();
    if (!path) throw ConfigError(fmt::format("manifest entry '{}' needs a path", name));
    entry.path = std::filesystem::path(*path).is_absolute() ? std::filesystem::path(*path) : base_dir / *path;
    if (const auto* target = tbl->get("target_column")) {
      if (const auto i = target->value<std::int64_t>()) {
        entry.target_column = static_cast<int>(*i);
      } else if (const auto s = target->value<std::string>()) {
        entry.target_column = *s;
      } else {
        throw ConfigError(fmt::format("manifest entry '{}': target_column must be int or string", name));
      }
    }
    if (const auto* header = tbl->get("header")) entry.header = parse_header(*header, name);
    entry.kind = parse_task_kind((*tbl)["kind"].value_or(std::string("regression")));
    entry.expected_rows = static_cast<std::size_t>((*tbl)["expected_rows"].value_or(std::int64_t{0}));
    entry.expected_cols = static_cast<std::size_t>((*tbl)["expected_cols"].value_or(std::int64_t{0}));
    entry.url = (*tbl)["url"].value_or(std::string());
    manifest.entries_.emplace(name, std::move(entry));
  }
  return manifest;
}

const ManifestEntry& Manifest::at(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError(fmt::format("dataset '{}' is not in the manifest", name));
  return it->second;
}

Dataset load_dataset(const ManifestEntry& entry) {
  CsvSchema schema;
  schema.target_column = entry.target_column;
  schema.header = entry.header;
  schema.kind = entry.kind;
  schema.name = entry.name;
  Dataset ds = load_csv(entry.path, schema);
  if (entry.expected_rows != 0 && ds.rows() != entry.expected_rows) {
    throw DataError(fmt::format("dataset '{}': expected {} rows, found {}", entry.name, entry.expected_rows, ds.rows()));
  }
  if (entry.expected_cols != 0 && ds.cols() != entry.expected_cols) {
    throw DataError(fmt::format("dataset '{}': expected {} feature columns, found {}", entry.name, entry.expected_cols,
                                ds.cols()));
  }
  return ds;
}

InspectReport inspect_dataset(const ManifestEntry& entry) {
  InspectReport report;
  report.name = entry.name;
  if (!std::filesystem::exists(entry.path)) {
    report.message = fmt::format("missing file {}", entry.path.string());
    return report;
  }
  report.present = true;
  try {
    CsvSchema schema;
    schema.target_column = entry.target_column;
    schema.header = entry.header;
    schema.kind = entry.kind;
    schema.name = entry.name;
    const Dataset ds = load_csv(entry.path, schema);
    report.rows = ds.rows();
    report.cols = ds.cols();
    report.shape_ok = (entry.expected_rows == 0 || ds.rows() == entry.expected_rows) &&
                      (entry.expected_cols == 0 || ds.cols() == entry.expected_cols);
    report.message = report.shape_ok ? "ok"
                                     : fmt::format("expected {}x{}", entry.expected_rows, entry.expected_cols);
  } catch (const Error& e) {
    report.message = e.what();
  }
  return report;
}

}  // namespace riskcal::data

#pragma once

#include "riskcal/data/csv.hpp"
#include "riskcal/data/dataset.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace riskcal::data {

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;  // resolved against the manifest directory
  std::variant<int, std::string> target_column = -1;
  HeaderMode header = HeaderMode::automatic;
  TaskKind kind = TaskKind::regression;
  std::size_t expected_rows = 0;
  std::size_t expected_cols = 0;
  /// Optional download source for `data fetch` (plain or gzip CSV).
  std::string url;
};

class Manifest {
 public:
  static Manifest load(const std::filesystem::path& path);
  static Manifest parse(const std::string& toml_text, const std::filesystem::path& base_dir);

  [[nodiscard]] const ManifestEntry& at(const std::string& name) const;
  [[nodiscard]] bool contains(const std::string& name) const { return entries_.contains(name); }
  [[nodiscard]] const std::map<std::string, ManifestEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, ManifestEntry> entries_;
};

/// Loads the CSV behind an entry and checks its (rows, cols) against the
/// expectations recorded in the manifest.
Dataset load_dataset(const ManifestEntry& entry);

struct InspectReport {
  std::string name;
  bool present = false;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool shape_ok = false;
  std::string message;
};

InspectReport inspect_dataset(const ManifestEntry& entry);

}  // namespace riskcal::data

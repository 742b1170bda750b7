#pragma once

#include "riskcal/data/dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace riskcal::data {

enum class HeaderMode { automatic, present, absent };

/// Column layout for load_csv. Target column defaults to the last one;
/// negative indices count from the end.
struct CsvSchema {
  std::variant<int, std::string> target_column = -1;
  HeaderMode header = HeaderMode::automatic;
  TaskKind kind = TaskKind::regression;
  std::string name;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset parse_csv(const std::string& text, const CsvSchema& schema = {});

/// Writes a headered CSV with features followed by the target column.
/// Values use shortest round-trip formatting so load_csv recovers them exactly.
void write_csv(const std::filesystem::path& path, const Dataset& dataset);
std::string format_csv(const Dataset& dataset);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace riskcal::data

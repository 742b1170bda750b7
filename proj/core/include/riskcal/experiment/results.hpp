#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace riskcal::experiment {

inline constexpr std::string_view kResultHeader =
    "dataset,fold,regressor,calibrator,cost,rwr_loss,reject_rate,calib_mae,predictor_loss,wall_time_ms";

/// One (dataset, fold, regressor, calibrator, cost) cell. Failed cells carry NaN metrics.
struct ResultRow {
  std::string dataset;
  int fold = 0;
  std::string regressor;
  std::string calibrator;
  double cost = 0.0;
  double rwr_loss = 0.0;
  double reject_rate = 0.0;
  double calib_mae = 0.0;
  double predictor_loss = 0.0;
  double wall_time_ms = 0.0;

  [[nodiscard]] bool failed() const;
  /// Identity of the cell, independent of its metrics.
  [[nodiscard]] std::string key() const;
};

std::string format_result_row(const ResultRow& row);

/// Parses a results file. With `tolerate_torn_tail`, a final line without a
/// terminating newline that fails to parse is dropped (an interrupted append).
std::vector<ResultRow> parse_results(const std::string& text, bool tolerate_torn_tail = false);
std::vector<ResultRow> read_results(const std::filesystem::path& path, bool tolerate_torn_tail = false);
void write_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

}  // namespace riskcal::experiment

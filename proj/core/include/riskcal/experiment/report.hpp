#pragma once

#include "riskcal/experiment/results.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace riskcal::experiment {

enum class ReportFormat { csv, markdown };

ReportFormat parse_report_format(const std::string& text);

/// Published SelNet and NN+kNNRej RwR losses keyed by (dataset, cost).
struct ReferenceTable {
  std::map<std::pair<std::string, double>, std::pair<double, double>> values;

  [[nodiscard]] std::optional<std::pair<double, double>> find(const std::string& dataset, double cost) const;
};

ReferenceTable load_reference_table(const std::filesystem::path& path);

/// Fold means per (dataset, regressor, calibrator, cost).
struct AggregateRow {
  std::string dataset;
  std::string regressor;
  std::string calibrator;
  double cost = 0.0;
  std::size_t folds = 0;
  double rwr_loss = 0.0;
  double reject_rate = 0.0;
  double calib_mae = 0.0;
  double predictor_loss = 0.0;
  /// Lowest mean RwR loss among the calibrators of its (dataset, regressor, cost).
  bool best_calibrator = false;
};

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format,
                          const ReferenceTable* reference = nullptr);

}  // namespace riskcal::experiment

#pragma once

#include "riskcal/calib/calibrator.hpp"
#include "riskcal/data/dataset.hpp"
#include "riskcal/data/splits.hpp"
#include "riskcal/experiment/config.hpp"
#include "riskcal/experiment/results.hpp"

#include <functional>
#include <string>
#include <vector>

namespace riskcal::experiment {

struct GridOptions {
  /// Reuse complete cells already present in the output file.
  bool resume = true;
  std::function<void(const std::string&)> log;
};

struct GridSummary {
  std::size_t rows_written = 0;
  std::size_t rows_reused = 0;
  std::size_t failed_rows = 0;
  std::vector<std::string> errors;

  [[nodiscard]] bool partial() const { return failed_rows > 0 || !errors.empty(); }
};

/// Runs every (dataset, fold, regressor, calibrator, cost) cell and writes the
/// result CSV in canonical order. Output does not depend on the worker count.
GridSummary run_grid(const ExperimentConfig& config, const GridOptions& options = {});

std::uint64_t split_seed(const ExperimentConfig& config, const std::string& dataset);
std::uint64_t regressor_seed(const ExperimentConfig& config, const std::string& dataset, int fold,
                             models::Family regressor);
std::uint64_t calibrator_seed(const ExperimentConfig& config, const std::string& dataset, int fold,
                              models::Family regressor, models::Family calibrator);

/// All rows for one fold of one dataset, in canonical order. Fit failures
/// become NaN rows; their messages are appended to `errors` when given.
std::vector<ResultRow> evaluate_fold(const ExperimentConfig& config, const data::Dataset& dataset,
                                     const data::SplitPlan& plan, std::vector<std::string>* errors = nullptr);

/// A fitted regressor/calibrator pair for one cell, loaded from the model
/// directory when present, otherwise fit with the grid's seeds.
struct TrainedPair {
  models::Predictor regressor;
  calib::RiskCalibrator calibrator;
};

TrainedPair trained_pair(const ExperimentConfig& config, const data::Dataset& dataset, const data::SplitPlan& plan,
                         models::Family regressor, models::Family calibrator);

struct PlotRow {
  double target = 0.0;
  double prediction = 0.0;
  double sqrt_estimated_loss = 0.0;
};

/// Test rows of one fold sorted by target: (y, f(x), sqrt(max(g(x), 0))).
std::vector<PlotRow> export_plot_data(const ExperimentConfig& config, const std::string& dataset,
                                      models::Family regressor, models::Family calibrator, int fold);
std::string format_plot_csv(const std::vector<PlotRow>& rows);

}  // namespace riskcal::experiment

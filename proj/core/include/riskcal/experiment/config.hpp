#pragma once

#include "riskcal/calib/loss.hpp"
#include "riskcal/data/synthetic.hpp"
#include "riskcal/models/spec.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace riskcal::experiment {

/// `rwr run` configuration. Relative paths resolve against the config file.
struct ExperimentConfig {
  std::filesystem::path manifest;
  std::vector<std::string> datasets;
  std::vector<models::Family> regressors;
  /// Regression-based calibrator families.
  std::vector<models::Family> calibrators;
  std::vector<double> costs;
  /// Number of folds to run out of the 10-fold plan (a prefix; 10 = all).
  int folds = 10;
  std::uint64_t seed = 42;
  calib::LossKind loss = calib::LossKind::squared;
  std::filesystem::path output;
  /// 0 picks the number of hardware threads.
  int workers = 0;
  /// When set, fitted regressors and calibrators are persisted here.
  std::optional<std::filesystem::path> model_dir;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir);

/// `classify run` configuration: L2D on a synthetic tabular classification task.
struct ClassifyConfig {
  data::SyntheticSpec task;
  std::vector<models::Family> predictors;
  std::vector<models::Family> plugin_backends;
  /// Backends that also get a temperature-scaled plug-in calibrator.
  std::vector<models::Family> temperature_scaled;
  /// Regression-based calibrators on raw features.
  std::vector<models::Family> regression_calibrators;
  /// Regression-based calibrators on the hidden representation of the
  /// `representation_source` probability model.
  std::vector<models::Family> representation_calibrators;
  std::optional<models::Family> representation_source;
  std::vector<double> costs;
  int seeds = 10;
  std::uint64_t seed = 7;
  std::filesystem::path output;
  int workers = 0;
};

ClassifyConfig load_classify_config(const std::filesystem::path& path);
ClassifyConfig parse_classify_config(const std::string& toml_text, const std::filesystem::path& base_dir);

/// Throws ConfigError unless costs are positive and strictly ascending.
void check_costs(const std::vector<double>& costs);

int resolve_workers(int requested);

}  // namespace riskcal::experiment

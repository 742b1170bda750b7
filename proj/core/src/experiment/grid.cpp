#include "riskcal/experiment/grid.hpp"

#include "riskcal/calib/serialize.hpp"
#include "riskcal/data/csv.hpp"
#include "riskcal/data/manifest.hpp"
#include "riskcal/defer/rejector.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/models/serialize.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace riskcal::experiment {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::filesystem::path fold_dir(const std::filesystem::path& root, const std::string& dataset, int fold) {
  return root / dataset / fmt::format("fold{}", fold);
}

std::filesystem::path regressor_path(const std::filesystem::path& root, const std::string& dataset, int fold,
                                     models::Family reg) {
  return fold_dir(root, dataset, fold) / fmt::format("regressor-{}.json", models::to_string(reg));
}

std::filesystem::path calibrator_path(const std::filesystem::path& root, const std::string& dataset, int fold,
                                      models::Family reg, models::Family cal) {
  return fold_dir(root, dataset, fold) /
         fmt::format("calibrator-{}-{}.json", models::to_string(reg), models::to_string(cal));
}

ResultRow failed_row(const std::string& dataset, int fold, models::Family reg, models::Family cal, double cost) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {dataset, fold, models::to_string(reg), models::to_string(cal), cost, nan, nan, nan, nan, 0.0};
}

models::Predictor fit_regressor(const ExperimentConfig& config, const data::Dataset& ds, const data::SplitPlan& plan,
                                models::Family reg) {
  const auto spec = models::make_spec(reg, regressor_seed(config, ds.name, plan.fold_index, reg));
  return models::fit(spec, data::take_rows(ds.features, plan.regressor_rows),
                     data::take_rows(ds.targets, plan.regressor_rows))
      .predictor;
}

calib::RiskCalibrator fit_calibrator(const ExperimentConfig& config, const data::Dataset& ds,
                                     const data::SplitPlan& plan, const models::Predictor& f, models::Family reg,
                                     models::Family cal) {
  const auto spec = models::make_spec(cal, calibrator_seed(config, ds.name, plan.fold_index, reg, cal));
  return calib::fit_regression_calibrator(spec, calib::LossFn{config.loss}, f,
                                          data::take_rows(ds.features, plan.calibrator_rows),
                                          data::take_rows(ds.targets, plan.calibrator_rows));
}

struct Unit {
  std::size_t dataset_index = 0;
  int fold = 0;
  std::vector<ResultRow> rows;
  bool reused = false;
};

std::vector<std::string> expected_keys(const ExperimentConfig& config, const std::string& dataset, int fold) {
  std::vector<std::string> keys;
  for (const auto reg : config.regressors) {
    for (const auto cal : config.calibrators) {
      for (const double c : config.costs) keys.push_back(failed_row(dataset, fold, reg, cal, c).key());
    }
  }
  return keys;
}

}  // namespace

std::uint64_t split_seed(const ExperimentConfig& config, const std::string& dataset) {
  return derive_seed(config.seed, {dataset, "split"});
}

std::uint64_t regressor_seed(const ExperimentConfig& config, const std::string& dataset, int fold,
                             models::Family regressor) {
  const std::string f = std::to_string(fold);
  return derive_seed(config.seed, {dataset, f, "regressor", models::to_string(regressor)});
}

std::uint64_t calibrator_seed(const ExperimentConfig& config, const std::string& dataset, int fold,
                              models::Family regressor, models::Family calibrator) {
  const std::string f = std::to_string(fold);
  return derive_seed(config.seed,
                     {dataset, f, "calibrator", models::to_string(regressor), models::to_string(calibrator)});
}

std::vector<ResultRow> evaluate_fold(const ExperimentConfig& config, const data::Dataset& ds,
                                     const data::SplitPlan& plan, std::vector<std::string>* errors) {
  const auto note = [&](const std::string& what, const std::exception& e) {
    if (errors) errors->push_back(fmt::format("{} fold {} {}: {}", ds.name, plan.fold_index, what, e.what()));
  };
  const calib::LossFn loss{config.loss};
  const Eigen::MatrixXd x_test = data::take_rows(ds.features, plan.test_rows);
  const Eigen::VectorXd y_test = data::take_rows(ds.targets, plan.test_rows);
  const int fold = plan.fold_index;
  std::vector<ResultRow> rows;

  for (const auto reg : config.regressors) {
    const auto reg_start = Clock::now();
    models::Predictor f;
    Eigen::VectorXd test_losses;
    try {
      f = fit_regressor(config, ds, plan, reg);
      test_losses = calib::sample_losses(f, loss, x_test, y_test);
      if (config.model_dir) {
        std::filesystem::create_directories(fold_dir(*config.model_dir, ds.name, fold));
        models::save_predictor(regressor_path(*config.model_dir, ds.name, fold, reg), f);
      }
    } catch (const std::exception& e) {
      note(models::to_string(reg), e);
      for (const auto cal : config.calibrators) {
        for (const double c : config.costs) rows.push_back(failed_row(ds.name, fold, reg, cal, c));
      }
      continue;
    }
    const double reg_ms = elapsed_ms(reg_start);
    const double predictor_loss = test_losses.mean();

    for (const auto cal : config.calibrators) {
      const auto cal_start = Clock::now();
      try {
        const calib::RiskCalibrator g = fit_calibrator(config, ds, plan, f, reg, cal);
        if (config.model_dir) {
          calib::save_calibrator(calibrator_path(*config.model_dir, ds.name, fold, reg, cal), g);
        }
        const Eigen::VectorXd est = g.estimate(f, x_test);
        const double mae = calib::calib_error(est, test_losses).mae;
        const auto reports = defer::sweep_from_estimates(est, test_losses, config.costs);
        const double ms = reg_ms + elapsed_ms(cal_start);
        for (const auto& r : reports) {
          rows.push_back({ds.name, fold, models::to_string(reg), models::to_string(cal), r.cost, r.rwr_loss,
                          r.reject_rate, mae, predictor_loss, ms});
        }
      } catch (const std::exception& e) {
        note(fmt::format("{}+{}", models::to_string(reg), models::to_string(cal)), e);
        for (const double c : config.costs) rows.push_back(failed_row(ds.name, fold, reg, cal, c));
      }
    }
  }
  return rows;
}

GridSummary run_grid(const ExperimentConfig& config, const GridOptions& options) {
  const auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  GridSummary summary;
  const data::Manifest manifest = data::Manifest::load(config.manifest);

  std::vector<data::Dataset> datasets;
  std::vector<std::vector<data::SplitPlan>> plans;
  for (const auto& name : config.datasets) {
    try {
      data::Dataset ds = data::load_dataset(manifest.at(name));
      auto all = data::make_split_plans(ds.rows(), split_seed(config, name));
      all.resize(static_cast<std::size_t>(config.folds));
      datasets.push_back(std::move(ds));
      plans.push_back(std::move(all));
    } catch (const Error& e) {
      summary.errors.push_back(fmt::format("{}: {}", name, e.what()));
      log(fmt::format("skipping dataset {}: {}", name, e.what()));
    }
  }

  std::map<std::string, ResultRow> previous;
  if (options.resume && std::filesystem::exists(config.output)) {
    try {
      for (auto& row : read_results(config.output, true)) {
        if (!row.failed()) previous[row.key()] = std::move(row);
      }
    } catch (const DataError& e) {
      log(fmt::format("ignoring unreadable results file {}: {}", config.output.string(), e.what()));
      previous.clear();
    }
  }

  std::vector<Unit> units;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (const auto& plan : plans[d]) {
      Unit unit{d, plan.fold_index, {}, false};
      const auto keys = expected_keys(config, datasets[d].name, plan.fold_index);
      if (std::all_of(keys.begin(), keys.end(), [&](const std::string& k) { return previous.contains(k); })) {
        for (const auto& k : keys) unit.rows.push_back(previous.at(k));
        unit.reused = true;
      }
      units.push_back(std::move(unit));
    }
  }

  // Reused units go first so an interrupted run leaves a clean, resumable file.
  std::vector<ResultRow> reused_rows;
  for (const auto& u : units) {
    if (u.reused) reused_rows.insert(reused_rows.end(), u.rows.begin(), u.rows.end());
  }
  write_results(config.output, reused_rows);

  std::mutex writer_mutex;
  std::ofstream appender(config.output, std::ios::binary | std::ios::app);
  if (!appender) throw DataError(fmt::format("cannot append to '{}'", config.output.string()));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      Unit& unit = units[i];
      if (unit.reused) continue;
      const data::Dataset& ds = datasets[unit.dataset_index];
      const auto& plan = plans[unit.dataset_index][static_cast<std::size_t>(unit.fold)];
      std::vector<std::string> unit_errors;
      unit.rows = evaluate_fold(config, ds, plan, &unit_errors);
      std::lock_guard lock(writer_mutex);
      for (const auto& e : unit_errors) log(e);
      std::string block;
      for (const auto& row : unit.rows) block += format_result_row(row) + '\n';
      appender << block << std::flush;
      log(fmt::format("{} fold {} done", ds.name, unit.fold));
    }
  };
  const int workers = std::max(1, std::min<int>(resolve_workers(config.workers), static_cast<int>(units.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  appender.close();

  std::vector<ResultRow> all;
  for (const auto& u : units) {
    for (const auto& row : u.rows) {
      if (u.reused) {
        ++summary.rows_reused;
      } else {
        ++summary.rows_written;
      }
      if (row.failed()) ++summary.failed_rows;
      all.push_back(row);
    }
  }
  write_results(config.output, all);
  return summary;
}

TrainedPair trained_pair(const ExperimentConfig& config, const data::Dataset& ds, const data::SplitPlan& plan,
                         models::Family regressor, models::Family calibrator) {
  if (config.model_dir) {
    const auto rp = regressor_path(*config.model_dir, ds.name, plan.fold_index, regressor);
    const auto cp = calibrator_path(*config.model_dir, ds.name, plan.fold_index, regressor, calibrator);
    if (std::filesystem::exists(rp) && std::filesystem::exists(cp)) {
      return {models::load_predictor(rp), calib::load_calibrator(cp)};
    }
  }
  models::Predictor f = fit_regressor(config, ds, plan, regressor);
  calib::RiskCalibrator g = fit_calibrator(config, ds, plan, f, regressor, calibrator);
  return {std::move(f), std::move(g)};
}

std::vector<PlotRow> export_plot_data(const ExperimentConfig& config, const std::string& dataset,
                                      models::Family regressor, models::Family calibrator, int fold) {
  if (fold < 0 || fold >= data::kNumFolds) throw ConfigError(fmt::format("fold {} is outside [0, 9]", fold));
  const data::Manifest manifest = data::Manifest::load(config.manifest);
  const data::Dataset ds = data::load_dataset(manifest.at(dataset));
  const auto plans = data::make_split_plans(ds.rows(), split_seed(config, dataset));
  const auto& plan = plans[static_cast<std::size_t>(fold)];
  const TrainedPair pair = trained_pair(config, ds, plan, regressor, calibrator);

  const Eigen::MatrixXd x = data::take_rows(ds.features, plan.test_rows);
  const Eigen::VectorXd y = data::take_rows(ds.targets, plan.test_rows);
  const Eigen::VectorXd pred = pair.regressor.predict(x);
  const Eigen::VectorXd est = pair.calibrator.estimate(pair.regressor, x);

  std::vector<PlotRow> rows(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    rows[static_cast<std::size_t>(i)] = {y[i], pred[i], std::sqrt(std::max(est[i], 0.0))};
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PlotRow& a, const PlotRow& b) { return a.target < b.target; });
  return rows;
}

std::string format_plot_csv(const std::vector<PlotRow>& rows) {
  std::string out = "target,prediction,sqrt_estimated_loss\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{}\n", data::format_double(r.target), data::format_double(r.prediction),
                       data::format_double(r.sqrt_estimated_loss));
  }
  return out;
}

}  // namespace riskcal::experiment

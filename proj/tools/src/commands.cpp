#include "commands.hpp"

#include "riskcal/data/fetch.hpp"
#include "riskcal/data/manifest.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/experiment/classify.hpp"
#include "riskcal/experiment/grid.hpp"
#include "riskcal/experiment/report.hpp"
#include "riskcal/verify/checks.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>

namespace riskcal::cli {

int data_fetch(const std::string& manifest_path, const std::vector<std::string>& names, bool overwrite) {
  const auto manifest = data::Manifest::load(manifest_path);
  std::vector<std::string> wanted = names;
  if (wanted.empty()) {
    for (const auto& [name, entry] : manifest.entries()) wanted.push_back(name);
  }
  int failures = 0;
  for (const auto& name : wanted) {
    const auto& entry = manifest.at(name);
    try {
      const auto ds = data::fetch_dataset(entry, overwrite);
      fmt::print("{:<12} {}x{}  {}\n", name, ds.rows(), ds.cols(), entry.path.string());
    } catch (const Error& e) {
      ++failures;
      fmt::print(stderr, "{:<12} FAILED: {}\n", name, e.what());
    }
  }
  return failures == 0 ? kOk : kPartial;
}

int data_inspect(const std::string& manifest_path) {
  const auto manifest = data::Manifest::load(manifest_path);
  int bad = 0;
  for (const auto& [name, entry] : manifest.entries()) {
    const auto r = data::inspect_dataset(entry);
    if (!r.present || !r.shape_ok) ++bad;
    fmt::print("{:<12} {:<8} {:>5}x{:<3} {}\n", name, r.present ? "present" : "missing", r.rows, r.cols, r.message);
  }
  return bad == 0 ? kOk : kPartial;
}

int rwr_run(const std::string& config_path, std::optional<int> workers, bool resume) {
  auto config = experiment::load_experiment_config(config_path);
  if (workers) config.workers = *workers;
  experiment::GridOptions options;
  options.resume = resume;
  options.log = [](const std::string& msg) { fmt::print(stderr, "{}\n", msg); };
  const auto summary = experiment::run_grid(config, options);
  fmt::print("{} rows computed, {} reused, {} failed -> {}\n", summary.rows_written, summary.rows_reused,
             summary.failed_rows, config.output.string());
  for (const auto& e : summary.errors) fmt::print(stderr, "error: {}\n", e);
  return summary.partial() ? kPartial : kOk;
}

int classify_run(const std::string& config_path, std::optional<int> workers) {
  auto config = experiment::load_classify_config(config_path);
  if (workers) config.workers = *workers;
  const auto rows = experiment::run_classify(config);
  std::size_t failed = 0;
  // Mean over seeds per (predictor, calibrator, cost).
  std::map<std::tuple<std::string, std::string, double>, std::pair<double, int>> loss, mae;
  for (const auto& r : rows) {
    if (r.failed()) {
      ++failed;
      continue;
    }
    auto& l = loss[{r.regressor, r.calibrator, r.cost}];
    l.first += r.rwr_loss;
    ++l.second;
    auto& m = mae[{r.regressor, r.calibrator, r.cost}];
    m.first += r.calib_mae;
    ++m.second;
  }
  fmt::print("{:<14} {:<28} {:>6} {:>10} {:>10}\n", "predictor", "calibrator", "cost", "l2d_loss", "calib_mae");
  for (const auto& [key, v] : loss) {
    const auto& m = mae.at(key);
    fmt::print("{:<14} {:<28} {:>6} {:>10.4f} {:>10.4f}\n", std::get<0>(key), std::get<1>(key), std::get<2>(key),
               v.first / v.second, m.first / m.second);
  }
  if (!config.output.empty()) fmt::print("results -> {}\n", config.output.string());
  return failed == 0 ? kOk : kPartial;
}

int verify(std::size_t brier_n, std::size_t seeds, std::uint64_t seed) {
  verify::SuiteOptions options;
  options.brier_n = brier_n;
  options.separable_seeds = seeds;
  options.seed = seed;
  int unexpected = 0;
  for (const auto& r : verify::run_theory_suite(options)) {
    const bool ok = r.as_expected();
    if (!ok) ++unexpected;
    fmt::print("{:<4} {:<40} statistic={:.3e} tolerance={:.3e} n={}{}\n", ok ? "ok" : "FAIL", r.name, r.statistic,
               r.tolerance, r.n, r.negative_control ? " (negative control, must fail)" : "");
  }
  return unexpected == 0 ? kOk : kVerifyFailed;
}

int report(const std::string& input, const std::string& format, const std::string& reference) {
  const auto fmt_kind = experiment::parse_report_format(format);
  const auto rows = experiment::read_results(input);
  std::optional<experiment::ReferenceTable> table;
  if (!reference.empty()) table = experiment::load_reference_table(reference);
  fmt::print("{}", experiment::render_report(rows, fmt_kind, table ? &*table : nullptr));
  return kOk;
}

int plot_data(const PlotArgs& args) {
  experiment::ExperimentConfig config;
  if (!args.config.empty()) {
    config = experiment::load_experiment_config(args.config);
  } else {
    config.manifest = args.manifest;
    config.seed = args.seed;
  }
  const auto rows = experiment::export_plot_data(config, args.dataset, models::parse_family(args.regressor),
                                                 models::parse_family(args.calibrator), args.fold);
  const std::string csv = experiment::format_plot_csv(rows);
  if (args.output.empty()) {
    fmt::print("{}", csv);
  } else {
    std::ofstream out(args.output, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", args.output));
    out << csv;
  }
  return kOk;
}

}  // namespace riskcal::cli

#include "commands.hpp"

#include "riskcal/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>

namespace {

const std::string kDataDir = RISKCAL_DEFAULT_DATA_DIR;

}  // namespace

int main(int argc, char** argv) {
  using namespace riskcal::cli;
  CLI::App app{"Conditional risk calibration and regression with rejection"};
  app.require_subcommand(1);

  std::string manifest = kDataDir + "/manifest.toml";
  std::vector<std::string> names;
  bool overwrite = false;
  auto* data_cmd = app.add_subcommand("data", "Fetch or inspect benchmark datasets");
  data_cmd->require_subcommand(1);
  auto* fetch = data_cmd->add_subcommand("fetch", "Download datasets listed in the manifest");
  fetch->add_option("--manifest", manifest, "Dataset manifest")->capture_default_str();
  fetch->add_option("--dataset", names, "Only these datasets (repeatable)");
  fetch->add_flag("--overwrite", overwrite, "Replace files that already exist");
  auto* inspect = data_cmd->add_subcommand("inspect", "Report presence and shape of each dataset");
  inspect->add_option("--manifest", manifest, "Dataset manifest")->capture_default_str();

  std::string config;
  std::optional<int> workers;
  bool no_resume = false;
  auto* rwr = app.add_subcommand("rwr", "Regression with rejection experiments");
  rwr->require_subcommand(1);
  auto* rwr_run_cmd = rwr->add_subcommand("run", "Run the configured grid");
  rwr_run_cmd->add_option("--config", config, "Experiment TOML")->required();
  rwr_run_cmd->add_option("--workers", workers, "Worker threads (default: hardware threads)");
  rwr_run_cmd->add_flag("--no-resume", no_resume, "Recompute cells already present in the output");

  auto* classify = app.add_subcommand("classify", "Learning-to-defer on a synthetic classification task");
  classify->require_subcommand(1);
  auto* classify_run_cmd = classify->add_subcommand("run", "Run the configured sweep");
  classify_run_cmd->add_option("--config", config, "Experiment TOML")->required();
  classify_run_cmd->add_option("--workers", workers, "Worker threads (default: hardware threads)");

  std::size_t brier_n = 100000;
  std::size_t seeds = 10;
  std::uint64_t verify_seed = 20240601;
  auto* verify_cmd = app.add_subcommand("verify", "Numerical checks of the theory");
  verify_cmd->add_option("--brier-n", brier_n, "Sample size of the Brier identity check")->capture_default_str();
  verify_cmd->add_option("--seeds", seeds, "Seeds of the separable comparison")->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "Master seed")->capture_default_str();

  std::string input, format = "md", reference = kDataDir + "/reference/rwr_benchmarks.csv";
  auto* report_cmd = app.add_subcommand("report", "Aggregate a results CSV over folds");
  report_cmd->add_option("--input", input, "Results CSV")->required();
  report_cmd->add_option("--format", format, "csv or md")->capture_default_str();
  report_cmd->add_option("--reference", reference, "Published SelNet / NN+kNNRej table (empty to omit)")
      ->capture_default_str();

  PlotArgs plot;
  plot.manifest = manifest;
  auto* plot_cmd = app.add_subcommand("plot-data", "Export (target, prediction, sqrt estimated loss) for one fold");
  plot_cmd->add_option("--config", plot.config, "Experiment TOML supplying manifest, seed and model_dir");
  plot_cmd->add_option("--manifest", plot.manifest, "Manifest when no config is given")->capture_default_str();
  plot_cmd->add_option("--seed", plot.seed, "Master seed when no config is given")->capture_default_str();
  plot_cmd->add_option("--dataset", plot.dataset)->required();
  plot_cmd->add_option("--regressor", plot.regressor)->required();
  plot_cmd->add_option("--calibrator", plot.calibrator)->required();
  plot_cmd->add_option("--fold", plot.fold)->required();
  plot_cmd->add_option("--output", plot.output, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*fetch) return data_fetch(manifest, names, overwrite);
    if (*inspect) return data_inspect(manifest);
    if (*rwr_run_cmd) return rwr_run(config, workers, !no_resume);
    if (*classify_run_cmd) return classify_run(config, workers);
    if (*verify_cmd) return verify(brier_n, seeds, verify_seed);
    if (*report_cmd) return report(input, format, reference);
    if (*plot_cmd) return plot_data(plot);
  } catch (const riskcal::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const riskcal::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfigError;
  }
  return kOk;
}

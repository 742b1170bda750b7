#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace riskcal::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kPartial = 2, kVerifyFailed = 3 };

int data_fetch(const std::string& manifest, const std::vector<std::string>& names, bool overwrite);
int data_inspect(const std::string& manifest);
int rwr_run(const std::string& config, std::optional<int> workers, bool resume);
int classify_run(const std::string& config, std::optional<int> workers);
int verify(std::size_t brier_n, std::size_t seeds, std::uint64_t seed);
int report(const std::string& input, const std::string& format, const std::string& reference);

struct PlotArgs {
  std::string config;
  std::string manifest;
  std::string dataset;
  std::string regressor;
  std::string calibrator;
  int fold = 0;
  std::uint64_t seed = 42;
  std::string output;
};
int plot_data(const PlotArgs& args);

}  // namespace riskcal::cli

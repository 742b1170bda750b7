#pragma once

#include "riskcal/calib/loss.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace riskcal::verify {

struct TheoryCheckResult {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// A deliberately broken identity; the suite expects it to fail.
  bool negative_control = false;

  [[nodiscard]] bool as_expected() const { return passed != negative_control; }
};

enum class BrierVariant {
  miscalibrated,     // p_theta uniform against a strong logistic truth
  truth,             // p_theta = p
  negative_control,  // excess risk measured with the absolute norm instead
};

/// E||p_theta(X) - p(X)||^2 against the excess Brier risk of p_theta, both
/// estimated on n draws. Tolerance 4 / sqrt(n). Requires n >= 1000.
TheoryCheckResult brier_identity_check(std::size_t n, std::uint64_t seed,
                                       BrierVariant variant = BrierVariant::miscalibrated);

/// Plug-in risk with the true p against a direct per-row evaluation of
/// sum_k l(f(x), k) p_k(x) for a fixed 3-class predictor. `perturb` adds 0.01
/// to one probability entry of the plug-in input. Tolerance 1e-9.
TheoryCheckResult realizability_exactness(std::size_t n, std::uint64_t seed,
                                          calib::LossKind loss = calib::LossKind::zero_one, bool perturb = false);

struct SeparableOptions {
  std::size_t n = 600;  // split evenly into predictor / calibration / test rows
  std::uint64_t seed = 0;
  int d = 2;
  double margin = 0.3;
  calib::MetaLoss meta = calib::MetaLoss::l1;
  /// Use the generator's labeling function h as the predictor.
  bool perfect_predictor = false;
};

struct SeparableResult {
  double calibration_risk = 0.0;  // plug-in with a SoftmaxMLP2 probability model
  double regression_risk = 0.0;   // MLP2 regression on realized zero-one losses
  double predictor_error = 0.0;   // test zero-one error of the predictor
  std::size_t n_test = 0;
};

/// Radial separable data, SoftmaxLinear predictor (it cannot express the
/// boundary, so its errors are deterministic in x), zero-one loss.
SeparableResult separable_comparison(const SeparableOptions& options);

struct SuiteOptions {
  std::size_t brier_n = 100000;
  std::size_t realizability_n = 5000;
  std::size_t separable_seeds = 10;
  std::uint64_t seed = 20240601;
};

/// Every check the `verify` command prints, including negative controls.
std::vector<TheoryCheckResult> run_theory_suite(const SuiteOptions& options);

}  // namespace riskcal::verify

#pragma once

#include "riskcal/calib/calibrator.hpp"

#include <Eigen/Core>

#include <vector>

namespace riskcal::defer {

/// r(x) = 1{g(x) <= c}: keep the prediction when the estimated risk is at
/// most the deferral cost. Equality accepts.
struct Rejector {
  calib::RiskCalibrator calibrator;
  double cost = 1.0;

  [[nodiscard]] static bool accepts(double estimate, double cost) { return estimate <= cost; }
};

struct DeferReport {
  double cost = 0.0;
  double rwr_loss = 0.0;
  double reject_rate = 0.0;
  /// Zero when every row is deferred; see all_deferred.
  double accepted_mean_loss = 0.0;
  bool all_deferred = false;
  /// mean min(l_i, c), the loss of the rejector that sees realized losses.
  double oracle_rwr_loss = 0.0;
  std::size_t n = 0;
};

/// Eq. (11) on precomputed risk estimates and realized losses.
DeferReport evaluate_from_estimates(const Eigen::VectorXd& estimates, const Eigen::VectorXd& losses, double cost);

DeferReport evaluate_rwr(const Rejector& rejector, const models::Predictor& f, const calib::LossFn& loss,
                         const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test);

/// Same arithmetic as evaluate_rwr for a classifier under clamped cross-entropy.
DeferReport evaluate_l2d_classification(const Rejector& rejector, const models::Predictor& f,
                                        const calib::LossFn& loss, const Eigen::MatrixXd& x_test,
                                        const Eigen::VectorXd& y_test);

/// One report per cost; `costs` must be strictly positive and ascending.
std::vector<DeferReport> sweep_from_estimates(const Eigen::VectorXd& estimates, const Eigen::VectorXd& losses,
                                              const std::vector<double>& costs);

/// Estimates and realized losses are computed once and reused for every cost.
std::vector<DeferReport> sweep_costs(const calib::RiskCalibrator& calibrator, const models::Predictor& f,
                                     const calib::LossFn& loss, const Eigen::MatrixXd& x_test,
                                     const Eigen::VectorXd& y_test, const std::vector<double>& costs);

}  // namespace riskcal::defer

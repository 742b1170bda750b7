#include "riskcal/defer/rejector.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace riskcal::defer {

DeferReport evaluate_from_estimates(const Eigen::VectorXd& estimates, const Eigen::VectorXd& losses, double cost) {
  if (losses.size() == 0) throw ModelError("deferral evaluation: empty test set");
  if (estimates.size() != losses.size()) throw ModelError("deferral evaluation: estimate/loss length mismatch");
  if (!(cost > 0.0) || !std::isfinite(cost)) throw ModelError(fmt::format("deferral cost must be positive, got {}", cost));

  DeferReport report;
  report.cost = cost;
  report.n = static_cast<std::size_t>(losses.size());
  double total = 0.0;
  double oracle = 0.0;
  double accepted_loss = 0.0;
  std::size_t accepted = 0;
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    if (Rejector::accepts(estimates[i], cost)) {
      total += losses[i];
      accepted_loss += losses[i];
      ++accepted;
    } else {
      total += cost;
    }
    oracle += std::min(losses[i], cost);
  }
  const auto n = static_cast<double>(report.n);
  report.rwr_loss = total / n;
  report.oracle_rwr_loss = oracle / n;
  report.reject_rate = static_cast<double>(report.n - accepted) / n;
  report.all_deferred = accepted == 0;
  report.accepted_mean_loss = accepted == 0 ? 0.0 : accepted_loss / static_cast<double>(accepted);
  return report;
}

DeferReport evaluate_rwr(const Rejector& rejector, const models::Predictor& f, const calib::LossFn& loss,
                         const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test) {
  return evaluate_from_estimates(rejector.calibrator.estimate(f, x_test), calib::sample_losses(f, loss, x_test, y_test),
                                 rejector.cost);
}

DeferReport evaluate_l2d_classification(const Rejector& rejector, const models::Predictor& f,
                                        const calib::LossFn& loss, const Eigen::MatrixXd& x_test,
                                        const Eigen::VectorXd& y_test) {
  if (f.head() != models::Head::classification) throw ModelError("L2D evaluation needs a classifier");
  if (loss.kind != calib::LossKind::cross_entropy) throw ModelError("L2D evaluation uses the cross-entropy loss");
  return evaluate_rwr(rejector, f, loss, x_test, y_test);
}

std::vector<DeferReport> sweep_from_estimates(const Eigen::VectorXd& estimates, const Eigen::VectorXd& losses,
                                              const std::vector<double>& costs) {
  if (costs.empty()) throw ModelError("cost sweep: empty cost list");
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!(costs[i] > 0.0)) throw ModelError("cost sweep: costs must be positive");
    if (i > 0 && !(costs[i] > costs[i - 1])) throw ModelError("cost sweep: costs must be strictly ascending");
  }
  std::vector<DeferReport> out;
  out.reserve(costs.size());
  for (const double c : costs) out.push_back(evaluate_from_estimates(estimates, losses, c));
  return out;
}

std::vector<DeferReport> sweep_costs(const calib::RiskCalibrator& calibrator, const models::Predictor& f,
                                     const calib::LossFn& loss, const Eigen::MatrixXd& x_test,
                                     const Eigen::VectorXd& y_test, const std::vector<double>& costs) {
  return sweep_from_estimates(calibrator.estimate(f, x_test), calib::sample_losses(f, loss, x_test, y_test), costs);
}

}  // namespace riskcal::defer

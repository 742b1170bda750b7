#include "riskcal/calib/temperature.hpp"

#include "riskcal/data/synthetic.hpp"
#include "riskcal/errors.hpp"

#include <cmath>

namespace riskcal::calib {

double temperature_nll(const Eigen::MatrixXd& logits, const Eigen::VectorXd& y, double temperature) {
  const Eigen::MatrixXd scaled = logits / temperature;
  const Eigen::VectorXd lse = models::log_sum_exp_rows(scaled);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += lse[i] - scaled(i, static_cast<Eigen::Index>(y[i]));
  return total / static_cast<double>(y.size());
}

TemperatureFit fit_temperature_to_logits(const Eigen::MatrixXd& logits, const Eigen::VectorXd& y, double tolerance) {
  if (y.size() == 0) throw ModelError("temperature scaling: empty calibration set");
  if (logits.rows() != y.size()) throw ModelError("temperature scaling: row count mismatch");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= static_cast<double>(logits.cols()) || y[i] != std::floor(y[i])) {
      throw ModelError("temperature scaling: label out of range");
    }
  }
  auto objective = [&](double log_t) { return temperature_nll(logits, y, std::pow(10.0, log_t)); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -2.0;
  double hi = 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  while (hi - lo > tolerance) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }
  const double log_t = (lo + hi) / 2.0;
  TemperatureFit fit;
  fit.temperature = std::pow(10.0, log_t);
  fit.nll = objective(log_t);
  fit.degenerate = (y.array() == y[0]).all();
  return fit;
}

TemperatureFit fit_temperature(const models::Predictor& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return fit_temperature_to_logits(p.predict_logits(x), y);
}

Eigen::MatrixXd scaled_probabilities(const Eigen::MatrixXd& logits, double temperature) {
  if (!(temperature > 0.0)) throw ModelError("temperature must be positive");
  return data::softmax_rows(logits / temperature);
}

}  // namespace riskcal::calib

#pragma once

#include "riskcal/models/predictor.hpp"

#include <Eigen/Core>

namespace riskcal::calib {

struct TemperatureFit {
  double temperature = 1.0;
  double nll = 0.0;
  /// Set when the calibration labels contain a single class; the returned
  /// temperature is then driven to the bracket edge and should not be trusted.
  bool degenerate = false;
};

/// Mean negative log-likelihood of softmax(logits / T).
double temperature_nll(const Eigen::MatrixXd& logits, const Eigen::VectorXd& y, double temperature);

/// Golden-section search for the NLL minimizer over log10 T in [-2, 2].
TemperatureFit fit_temperature_to_logits(const Eigen::MatrixXd& logits, const Eigen::VectorXd& y,
                                         double tolerance = 1e-4);
TemperatureFit fit_temperature(const models::Predictor& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

Eigen::MatrixXd scaled_probabilities(const Eigen::MatrixXd& logits, double temperature);

}  // namespace riskcal::calib

#pragma once

#include <Eigen/Core>

namespace riskcal::models {

/// Ordinary least squares with an unpenalized intercept.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(Eigen::VectorXd coefficients, double intercept)
      : coefficients_(std::move(coefficients)), intercept_(intercept) {}

  /// Solves the normal equations on centered data. When the Gram matrix is
  /// ill-conditioned a ridge term 1e-8 * trace / d is added to its diagonal.
  static LinearModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coefficients_; }
  [[nodiscard]] double intercept() const { return intercept_; }
  [[nodiscard]] bool jittered() const { return jittered_; }

 private:
  Eigen::VectorXd coefficients_;
  double intercept_ = 0.0;
  bool jittered_ = false;
};

}  // namespace riskcal::models

#pragma once

#include <Eigen/Core>

namespace riskcal::data {

/// Column-wise (x - mean) / sd with the population standard deviation.
/// Constant columns keep scale 1, so they map to zero.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(Eigen::VectorXd means, Eigen::VectorXd scales);

  static Standardizer fit(const Eigen::MatrixXd& features);

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;

  [[nodiscard]] const Eigen::VectorXd& means() const { return means_; }
  [[nodiscard]] const Eigen::VectorXd& scales() const { return scales_; }
  [[nodiscard]] Eigen::Index dim() const { return means_.size(); }

 private:
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
};

}  // namespace riskcal::data

#include "riskcal/data/standardizer.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace riskcal::data {

Standardizer::Standardizer(Eigen::VectorXd means, Eigen::VectorXd scales)
    : means_(std::move(means)), scales_(std::move(scales)) {
  if (means_.size() != scales_.size()) throw DataError("standardizer means/scales length mismatch");
  if ((scales_.array() <= 0.0).any()) throw DataError("standardizer scales must be strictly positive");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& features) {
  if (features.rows() < 2) {
    throw DataError(fmt::format("standardizer needs at least 2 rows, got {}", features.rows()));
  }
  const auto n = static_cast<double>(features.rows());
  Eigen::VectorXd means = features.colwise().sum().transpose() / n;
  Eigen::VectorXd scales(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (features.col(j).array() - means[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    scales[j] = sd > 1e-12 * std::max(1.0, std::abs(means[j])) ? sd : 1.0;
  }
  return {std::move(means), std::move(scales)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != means_.size()) {
    throw DataError(fmt::format("standardizer fitted on {} columns, got {}", means_.size(), features.cols()));
  }
  Eigen::MatrixXd out = features;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = (out.col(j).array() - means_[j]) / scales_[j];
    // Near-constant columns (scale clamped to 1) collapse to exactly zero.
    if (scales_[j] == 1.0 && (features.col(j).array() == means_[j]).all()) out.col(j).setZero();
  }
  return out;
}

}  // namespace riskcal::data

#include "riskcal/models/linear.hpp"

#include "riskcal/errors.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

namespace riskcal::models {

LinearModel LinearModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0) throw ModelError("linear regression: empty design matrix");
  if (x.rows() != y.size()) {
    throw ModelError(fmt::format("linear regression: {} rows but {} targets", x.rows(), y.size()));
  }
  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd x_mean = x.colwise().sum() / n;
  const double y_mean = y.sum() / n;
  if (x.cols() == 0) return {Eigen::VectorXd(0), y_mean};

  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  LinearModel model;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const bool ill = ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12;
  if (ill) {
    const double trace = gram.trace();
    const double lambda = 1e-8 * (trace > 0 ? trace : 1.0) / static_cast<double>(gram.rows());
    gram.diagonal().array() += lambda;
    ldlt.compute(gram);
    model.jittered_ = true;
  }
  model.coefficients_ = ldlt.solve(rhs);
  model.intercept_ = y_mean - x_mean.dot(model.coefficients_);
  return model;
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& x) const {
  return (x * coefficients_).array() + intercept_;
}

}  // namespace riskcal::models

#include "riskcal/calib/loss.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace riskcal::calib {

double LossFn::regression(double prediction, double target) const {
  switch (kind) {
    case LossKind::squared: return (prediction - target) * (prediction - target);
    case LossKind::absolute: return std::abs(prediction - target);
    default: throw ModelError(fmt::format("{} loss needs class probabilities", to_string(kind)));
  }
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::squared: return "squared";
    case LossKind::absolute: return "absolute";
    case LossKind::zero_one: return "zero-one";
    case LossKind::cross_entropy: return "cross-entropy";
    case LossKind::brier: return "brier";
  }
  return "?";
}

LossKind parse_loss(const std::string& text) {
  std::string key;
  for (const char c : text) key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const LossKind k : {LossKind::squared, LossKind::absolute, LossKind::zero_one, LossKind::cross_entropy,
                           LossKind::brier}) {
    if (to_string(k) == key) return k;
  }
  throw ConfigError(fmt::format("unknown loss '{}'", text));
}

double meta_loss(MetaLoss kind, double a, double b) {
  return kind == MetaLoss::l1 ? std::abs(a - b) : (a - b) * (a - b);
}

std::string to_string(MetaLoss kind) { return kind == MetaLoss::l1 ? "L1" : "L2"; }

Eigen::MatrixXd zero_one_per_class(const Eigen::VectorXi& predicted, int num_classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(predicted.size(), num_classes);
  for (Eigen::Index i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= num_classes) throw ModelError("predicted class out of range");
    out(i, predicted[i]) = 0.0;
  }
  return out;
}

Eigen::MatrixXd per_class_losses(const LossFn& loss, const Eigen::MatrixXd& q) {
  const Eigen::Index k = q.cols();
  switch (loss.kind) {
    case LossKind::zero_one:
      return zero_one_per_class(models::argmax_rows(q), static_cast<int>(k));
    case LossKind::cross_entropy:
      return -q.cwiseMax(loss.clamp_eps).array().log().matrix();
    case LossKind::brier: {
      // ||q - e_k||^2 = ||q||^2 - 2 q_k + 1
      const Eigen::VectorXd sq = q.rowwise().squaredNorm();
      Eigen::MatrixXd out = (-2.0 * q).colwise() + sq;
      out.array() += 1.0;
      return out.cwiseMax(0.0);
    }
    default:
      throw ModelError(fmt::format("{} loss has no per-class form", to_string(loss.kind)));
  }
}

Eigen::VectorXd realized_losses(const Eigen::MatrixXd& per_class, const Eigen::VectorXd& y) {
  if (per_class.rows() != y.size()) throw ModelError("realized_losses: row count mismatch");
  Eigen::VectorXd z(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(y[i]);
    if (static_cast<double>(c) != y[i] || c < 0 || c >= per_class.cols()) {
      throw ModelError(fmt::format("label {} outside [0, {})", y[i], per_class.cols()));
    }
    z[i] = per_class(i, c);
  }
  return z;
}

Eigen::VectorXd sample_losses(const models::Predictor& f, const LossFn& loss, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ModelError("sample_losses: row/target count mismatch");
  const bool classifier = f.head() == models::Head::classification;
  if (loss.needs_classifier() != classifier) {
    throw ModelError(fmt::format("{} loss does not match a {} predictor", to_string(loss.kind),
                                 classifier ? "classification" : "regression"));
  }
  if (classifier) return realized_losses(per_class_losses(loss, f.predict_proba(x)), y);
  const Eigen::VectorXd pred = f.predict(x);
  Eigen::VectorXd z(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) z[i] = loss.regression(pred[i], y[i]);
  return z;
}

Eigen::VectorXd plugin_risk(const Eigen::MatrixXd& per_class, const Eigen::MatrixXd& probabilities) {
  if (per_class.rows() != probabilities.rows() || per_class.cols() != probabilities.cols()) {
    throw ModelError(fmt::format("plugin_risk: loss matrix {}x{} vs probabilities {}x{}", per_class.rows(),
                                 per_class.cols(), probabilities.rows(), probabilities.cols()));
  }
  return per_class.cwiseProduct(probabilities).rowwise().sum();
}

Eigen::VectorXd plugin_risk(const models::Predictor& f, const models::Predictor& p, const LossFn& loss,
                            const Eigen::MatrixXd& x) {
  if (f.num_classes() != p.num_classes()) {
    throw ModelError(fmt::format("plugin_risk: predictor has {} classes, probability model {}", f.num_classes(),
                                 p.num_classes()));
  }
  return plugin_risk(per_class_losses(loss, f.predict_proba(x)), p.predict_proba(x));
}

}  // namespace riskcal::calib

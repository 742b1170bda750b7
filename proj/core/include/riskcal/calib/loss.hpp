#pragma once

#include "riskcal/models/predictor.hpp"

#include <Eigen/Core>

#include <string>

namespace riskcal::calib {

enum class LossKind { squared, absolute, zero_one, cross_entropy, brier };

/// The loss l(f(x), y). Classification losses read f's probability row q:
/// zero-one compares argmax q with y, cross-entropy is -log max(q_y, eps),
/// Brier is ||q - onehot(y)||^2.
struct LossFn {
  LossKind kind = LossKind::squared;
  double clamp_eps = 1e-12;

  [[nodiscard]] bool needs_classifier() const { return kind != LossKind::squared && kind != LossKind::absolute; }
  [[nodiscard]] double regression(double prediction, double target) const;
};

std::string to_string(LossKind kind);
LossKind parse_loss(const std::string& text);

enum class MetaLoss { l1, l2 };

double meta_loss(MetaLoss kind, double a, double b);
std::string to_string(MetaLoss kind);

/// n x K matrix whose (i, k) entry is l(f(x_i), k), given f's probabilities q.
Eigen::MatrixXd per_class_losses(const LossFn& loss, const Eigen::MatrixXd& q);
/// Zero-one per-class losses for hard predictions (any labeler, not only softmax models).
Eigen::MatrixXd zero_one_per_class(const Eigen::VectorXi& predicted, int num_classes);

/// z_i = l(f(x_i), y_i).
Eigen::VectorXd sample_losses(const models::Predictor& f, const LossFn& loss, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y);
/// Picks column y_i of each row.
Eigen::VectorXd realized_losses(const Eigen::MatrixXd& per_class, const Eigen::VectorXd& y);

/// Eq. (8): row-wise dot product of per-class losses with probabilities.
Eigen::VectorXd plugin_risk(const Eigen::MatrixXd& per_class, const Eigen::MatrixXd& probabilities);
Eigen::VectorXd plugin_risk(const models::Predictor& f, const models::Predictor& p, const LossFn& loss,
                            const Eigen::MatrixXd& x);

}  // namespace riskcal::calib

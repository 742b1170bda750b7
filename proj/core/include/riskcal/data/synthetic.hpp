#pragma once

#include "riskcal/data/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace riskcal::data {

enum class Generator { known_density_classification, separable_classification, regression_with_noise };

enum class Boundary { linear, radial };

struct SyntheticSpec {
  Generator generator = Generator::known_density_classification;
  std::size_t n = 1000;
  int d = 2;
  int num_classes = 2;
  std::uint64_t seed = 0;

  /// Known density: K x d logit weights, row-major. With K = 2 a length-d
  /// vector is also accepted and gives the logistic link (class-0 logit 0).
  /// Regression: length-d coefficient vector. Empty means draw N(0, scale^2).
  std::vector<double> coefficients;
  double coefficient_scale = 1.0;
  /// Adds x_j^2 terms with their own random weights to the known-density logits.
  bool quadratic = false;

  /// Separable generator: minimum distance from the decision boundary.
  double margin = 0.5;
  Boundary boundary = Boundary::linear;

  /// Regression generator: standard deviation of the additive Gaussian noise.
  double noise_scale = 0.5;
};

/// The deterministic labeling function of a separable distribution.
struct SeparableLabeler {
  Boundary boundary = Boundary::linear;
  Eigen::MatrixXd weights;  // K x d (linear)
  double radius = 1.0;      // radial: class 1 inside the ball

  [[nodiscard]] int label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  [[nodiscard]] std::vector<int> label_all(const Eigen::MatrixXd& features) const;
};

struct SyntheticData {
  Dataset dataset;
  /// n x K true p(y|x) (known-density only).
  std::optional<Eigen::MatrixXd> true_probabilities;
  std::optional<SeparableLabeler> labeler;
  /// True regression function values f(x_i) (regression only).
  std::optional<Eigen::VectorXd> true_regression;
  double noise_scale = 0.0;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Row-wise softmax with max-subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace riskcal::data

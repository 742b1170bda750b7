#pragma once

#include "riskcal/models/spec.hpp"
#include "riskcal/random.hpp"

#include <Eigen/Core>

#include <vector>

namespace riskcal::models {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct TrainReport {
  double final_loss = 0.0;
  int epochs = 0;
  bool converged = false;
};

/// Fully connected ReLU network. The output layer is linear: one unit for a
/// regression head (objective 0.5 * mean squared error), K units for a
/// classification head (softmax cross-entropy).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, Head head);

  /// Glorot-uniform weights, zero biases.
  static Mlp initialize(int input_dim, const std::vector<int>& hidden, int outputs, Head head, Rng& rng);

  TrainReport train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const AdamOptions& options, Rng& rng);

  /// Raw network outputs: n x 1 (regression) or n x K logits.
  [[nodiscard]] Eigen::MatrixXd outputs(const Eigen::MatrixXd& x) const;
  /// Post-activation values of the last hidden layer.
  [[nodiscard]] Eigen::MatrixXd representation(const Eigen::MatrixXd& x) const;

  /// Mean objective and its gradient, flattened layer by layer (weights
  /// column-major, then bias).
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd* gradient) const;
  [[nodiscard]] double loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
    return loss_and_gradient(x, y, nullptr);
  }

  [[nodiscard]] Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  [[nodiscard]] Eigen::Index parameter_count() const;

  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] Head head() const { return head_; }
  [[nodiscard]] int input_dim() const;
  [[nodiscard]] int output_dim() const;
  [[nodiscard]] int hidden_layer_count() const { return static_cast<int>(layers_.size()) - 1; }

 private:
  std::vector<DenseLayer> layers_;
  Head head_ = Head::regression;
};

/// Numerically stable log(sum(exp(row))) per row.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& logits);

}  // namespace riskcal::models

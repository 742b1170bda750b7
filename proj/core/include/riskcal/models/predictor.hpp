#pragma once

#include "riskcal/data/standardizer.hpp"
#include "riskcal/models/forest.hpp"
#include "riskcal/models/linear.hpp"
#include "riskcal/models/mlp.hpp"
#include "riskcal/models/spec.hpp"

#include <Eigen/Core>

#include <optional>
#include <variant>

namespace riskcal::models {

/// A fitted model f. Network families standardize their inputs internally,
/// so callers always pass raw features.
class Predictor {
 public:
  using Model = std::variant<LinearModel, RandomForest, Mlp>;

  Predictor() = default;
  Predictor(ModelSpec spec, Model model, std::optional<data::Standardizer> scaler, int input_dim, int num_classes);

  [[nodiscard]] bool fitted() const { return fitted_; }
  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] Head head() const { return spec_.head(); }
  [[nodiscard]] int input_dim() const { return input_dim_; }
  [[nodiscard]] int num_classes() const { return num_classes_; }
  [[nodiscard]] const Model& model() const { return model_; }
  [[nodiscard]] const std::optional<data::Standardizer>& scaler() const { return scaler_; }

  /// Regression value, or the argmax class (lowest index on ties) as a double.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd predict_logits(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd extract_representation(const Eigen::MatrixXd& x) const;
  [[nodiscard]] const DenseLayer& final_layer() const;
  [[nodiscard]] Eigen::MatrixXd tree_predictions(const Eigen::MatrixXd& x) const;

 private:
  void check_input(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd scaled(const Eigen::MatrixXd& x) const;
  [[nodiscard]] const Mlp& network(const char* op) const;

  ModelSpec spec_;
  Model model_;
  std::optional<data::Standardizer> scaler_;
  int input_dim_ = 0;
  int num_classes_ = 0;
  bool fitted_ = false;
};

struct FitResult {
  Predictor predictor;
  TrainReport report;
};

/// Fits `spec` on (x, y). Classification targets are class indices in
/// [0, num_classes); num_classes defaults to max(y) + 1.
FitResult fit(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int num_classes = 0);

/// Max over parameters of |analytic - central| / max(|analytic| + |central|, 1e-6)
/// for a freshly initialized network of `spec` on the raw batch (x, y).
/// Parameters whose perturbation moves any ReLU across its kink are skipped.
double gradient_check(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double step = 1e-5,
                      int num_classes = 0);

/// Argmax per row; ties resolve to the lowest index.
Eigen::VectorXi argmax_rows(const Eigen::MatrixXd& m);

}  // namespace riskcal::models

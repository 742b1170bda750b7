#pragma once

#include "riskcal/models/spec.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace riskcal::models {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

/// CART regression tree grown to purity on variance reduction.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// Grows on the given rows of (x, y). Rows may repeat (bootstrap).
  static RegressionTree grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::size_t> rows,
                             int min_samples_split);

  [[nodiscard]] double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  [[nodiscard]] const std::vector<TreeNode>& nodes() const { return nodes_; }
  [[nodiscard]] int depth() const;
  [[nodiscard]] std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

class RandomForest {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

  /// Tree t trains on a size-n bootstrap drawn from stream "rf/tree-t" of `seed`.
  static RandomForest fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestOptions& options,
                          std::uint64_t seed);

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  /// n x T matrix of individual tree outputs.
  [[nodiscard]] Eigen::MatrixXd tree_predictions(const Eigen::MatrixXd& x) const;
  [[nodiscard]] const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

}  // namespace riskcal::models

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace riskcal::data {

enum class TaskKind { regression, classification };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& text);

/// Feature matrix plus targets. Classification targets are class indices
/// stored as exact integer-valued doubles in [0, num_classes).
struct Dataset {
  std::string name;
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  TaskKind kind = TaskKind::regression;
  int num_classes = 0;
  std::vector<std::string> feature_names;
  std::string target_name;

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws DataError if any invariant is violated.
  void validate() const;

  [[nodiscard]] std::vector<int> labels() const;

  /// Row subset, order preserved as given.
  [[nodiscard]] Dataset subset(const std::vector<std::size_t>& rows) const;
};

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows);
Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows);

}  // namespace riskcal::data

#include "riskcal/data/dataset.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace riskcal::data {

std::string to_string(TaskKind kind) {
  return kind == TaskKind::regression ? "regression" : "classification";
}

TaskKind parse_task_kind(const std::string& text) {
  if (text == "regression") return TaskKind::regression;
  if (text == "classification") return TaskKind::classification;
  throw DataError(fmt::format("unknown task kind '{}'", text));
}

void Dataset::validate() const {
  if (features.rows() != targets.size()) {
    throw DataError(fmt::format("dataset '{}': {} feature rows but {} targets", name, features.rows(),
                                targets.size()));
  }
  if (!features.allFinite() || !targets.allFinite()) {
    throw DataError(fmt::format("dataset '{}' contains non-finite values", name));
  }
  if (kind == TaskKind::classification) {
    if (num_classes < 2) throw DataError(fmt::format("dataset '{}': need at least 2 classes", name));
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
      const double t = targets[i];
      if (t != std::floor(t) || t < 0 || t >= num_classes) {
        throw DataError(fmt::format("dataset '{}': row {} label {} outside [0, {})", name, i, t, num_classes));
      }
    }
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out(static_cast<std::size_t>(targets.size()));
  for (Eigen::Index i = 0; i < targets.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(targets[i]);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.name = name;
  out.kind = kind;
  out.num_classes = num_classes;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.features = take_rows(features, rows);
  out.targets = take_rows(targets, rows);
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
  return out;
}

}  // namespace riskcal::data

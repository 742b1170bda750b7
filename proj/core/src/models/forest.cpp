#include "riskcal/models/forest.hpp"

#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <string>

namespace riskcal::models {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;
};

class Grower {
 public:
  Grower(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int min_samples_split)
      : x_(x), y_(y), min_split_(static_cast<std::size_t>(std::max(2, min_samples_split))) {}

  std::vector<TreeNode> run(std::vector<std::size_t> rows) {
    rows_ = std::move(rows);
    nodes_.clear();
    build(0, rows_.size());
    return std::move(nodes_);
  }

 private:
  // Builds the subtree over rows_[begin, end) and returns its node index.
  int build(std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[static_cast<Eigen::Index>(rows_[i])];
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[static_cast<std::size_t>(index)].value = sum / static_cast<double>(count);
    if (count < min_split_) return index;
    const double first = y_[static_cast<Eigen::Index>(rows_[begin])];
    bool pure = true;
    for (std::size_t i = begin + 1; i < end && pure; ++i) pure = y_[static_cast<Eigen::Index>(rows_[i])] == first;
    if (pure) return index;

    const Split split = best_split(begin, end, sum);
    if (split.feature < 0) return index;

    const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
                                      return x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold;
                                    });
    const auto middle = static_cast<std::size_t>(mid - rows_.begin());
    const int left = build(begin, middle);
    const int right = build(middle, end);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  Split best_split(std::size_t begin, std::size_t end, double total) {
    const std::size_t count = end - begin;
    const double parent_term = total * total / static_cast<double>(count);
    Split best;
    order_.assign(rows_.begin() + static_cast<std::ptrdiff_t>(begin), rows_.begin() + static_cast<std::ptrdiff_t>(end));
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      // Stable order keeps the scan deterministic when values repeat.
      std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        left_sum += y_[static_cast<Eigen::Index>(order_[i])];
        const double here = x_(static_cast<Eigen::Index>(order_[i]), f);
        const double next = x_(static_cast<Eigen::Index>(order_[i + 1]), f);
        if (!(here < next)) continue;
        const auto nl = static_cast<double>(i + 1);
        const auto nr = static_cast<double>(count - i - 1);
        const double right_sum = total - left_sum;
        // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n.
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent_term;
        if (gain > best.gain) {
          double threshold = here + (next - here) / 2.0;
          // Guard against the midpoint rounding onto the upper value.
          if (!(threshold < next)) threshold = here;
          best = Split{static_cast<int>(f), threshold, gain, i + 1};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  std::size_t min_split_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> order_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree RegressionTree::grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::size_t> rows,
                                    int min_samples_split) {
  if (rows.empty()) throw ModelError("regression tree: no training rows");
  Grower grower(x, y, min_samples_split);
  return RegressionTree(grower.run(std::move(rows)));
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& node = nodes_[at];
    at = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes_[at].value;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes_[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

RandomForest RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestOptions& options,
                               std::uint64_t seed) {
  if (x.rows() == 0) throw ModelError("random forest: empty training set");
  if (x.rows() != y.size()) throw ModelError(fmt::format("random forest: {} rows but {} targets", x.rows(), y.size()));
  if (options.num_trees <= 0) throw ModelError("random forest: num_trees must be positive");
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(options.num_trees));
  std::vector<std::size_t> rows(n);
  for (int t = 0; t < options.num_trees; ++t) {
    Rng rng = Rng::stream(seed, "rf/tree-" + std::to_string(t));
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    trees.push_back(RegressionTree::grow(x, y, rows, options.min_samples_split));
  }
  return RandomForest(std::move(trees));
}

Eigen::MatrixXd RandomForest::tree_predictions(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(trees_.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < trees_.size(); ++t) out(i, static_cast<Eigen::Index>(t)) = trees_[t].predict_row(x.row(i));
  }
  return out;
}

Eigen::VectorXd RandomForest::predict(const Eigen::MatrixXd& x) const {
  if (trees_.empty()) throw ModelError("random forest: no trees");
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict_row(x.row(i));
    out[i] = sum / static_cast<double>(trees_.size());
  }
  return out;
}

}  // namespace riskcal::models

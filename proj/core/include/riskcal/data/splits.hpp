#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace riskcal::data {

inline constexpr int kNumFolds = 10;

/// One cross-validation fold: a test block plus a 5:4 split of the remaining
/// rows into predictor-training and calibrator-training rows.
struct SplitPlan {
  int fold_index = 0;
  std::vector<std::size_t> test_rows;
  std::vector<std::size_t> regressor_rows;
  std::vector<std::size_t> calibrator_rows;
};

/// Ten plans whose test blocks partition {0..n-1}. Deterministic in (n, seed).
/// Each index list is sorted ascending. Requires n >= 20.
std::vector<SplitPlan> make_split_plans(std::size_t n, std::uint64_t seed);

}  // namespace riskcal::data

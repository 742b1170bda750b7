#include "riskcal/data/splits.hpp"

#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <string>

namespace riskcal::data {

std::vector<SplitPlan> make_split_plans(std::size_t n, std::uint64_t seed) {
  if (n < 20) throw DataError(fmt::format("need at least 20 rows for 10-fold splitting, got {}", n));

  Rng fold_rng = Rng::stream(seed, "split/folds");
  const std::vector<std::size_t> order = fold_rng.permutation(n);

  std::vector<SplitPlan> plans(kNumFolds);
  const std::size_t base = n / kNumFolds;
  const std::size_t extra = n % kNumFolds;
  std::size_t start = 0;
  for (int k = 0; k < kNumFolds; ++k) {
    const std::size_t size = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    SplitPlan& plan = plans[static_cast<std::size_t>(k)];
    plan.fold_index = k;
    plan.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                          order.begin() + static_cast<std::ptrdiff_t>(start + size));

    std::vector<std::size_t> rest;
    rest.reserve(n - size);
    rest.insert(rest.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(start));
    rest.insert(rest.end(), order.begin() + static_cast<std::ptrdiff_t>(start + size), order.end());
    std::sort(rest.begin(), rest.end());
    Rng fold_shuffle = Rng::stream(seed, "split/fold-" + std::to_string(k));
    fold_shuffle.shuffle(std::span<std::size_t>(rest));

    // 5:4 split of the remainder; the integer remainder goes to the regressor.
    const std::size_t n_cal = (rest.size() * 4) / 9;
    const std::size_t n_reg = rest.size() - n_cal;
    plan.regressor_rows.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_reg));
    plan.calibrator_rows.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_reg), rest.end());

    std::sort(plan.test_rows.begin(), plan.test_rows.end());
    std::sort(plan.regressor_rows.begin(), plan.regressor_rows.end());
    std::sort(plan.calibrator_rows.begin(), plan.calibrator_rows.end());
    start += size;
  }
  return plans;
}

}  // namespace riskcal::data

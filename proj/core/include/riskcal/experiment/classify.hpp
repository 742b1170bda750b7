#pragma once

#include "riskcal/experiment/config.hpp"
#include "riskcal/experiment/results.hpp"

#include <vector>

namespace riskcal::experiment {

/// Rows for one synthetic draw. The draw is split 40/40/20 into predictor,
/// calibration and test rows. Calibrator labels are "plugin:<family>",
/// "plugin-ts:<family>", "regression:<family>" and "representation:<family>";
/// the fold column carries the seed index and losses are clamped cross-entropy.
std::vector<ResultRow> evaluate_classify_seed(const ClassifyConfig& config, int seed_index);

/// Runs every seed (in parallel when workers > 1) and writes config.output if set.
std::vector<ResultRow> run_classify(const ClassifyConfig& config);

}  // namespace riskcal::experiment

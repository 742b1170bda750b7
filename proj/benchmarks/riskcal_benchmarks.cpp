#include "riskcal/calib/loss.hpp"
#include "riskcal/data/synthetic.hpp"
#include "riskcal/defer/rejector.hpp"
#include "riskcal/models/forest.hpp"
#include "riskcal/models/mlp.hpp"
#include "riskcal/random.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace riskcal;

namespace {

data::Dataset regression_data(std::size_t n, int d) {
  data::SyntheticSpec spec;
  spec.generator = data::Generator::regression_with_noise;
  spec.n = n;
  spec.d = d;
  spec.seed = 1;
  return data::generate_synthetic(spec).dataset;
}

void BM_TreeFit(benchmark::State& state) {
  const auto ds = regression_data(static_cast<std::size_t>(state.range(0)), 8);
  std::vector<std::size_t> rows(ds.rows());
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(models::RegressionTree::grow(ds.features, ds.targets, rows, 2));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeFit)->RangeMultiplier(2)->Range(256, 4096)->Complexity();

void BM_ForestFit(benchmark::State& state) {
  const auto ds = regression_data(1000, 8);
  models::ForestOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(models::RandomForest::fit(ds.features, ds.targets, options, 3));
}
BENCHMARK(BM_ForestFit)->Unit(benchmark::kMillisecond);

void BM_MlpEpoch(benchmark::State& state) {
  const auto ds = regression_data(1000, 8);
  Rng init(4);
  const auto hidden = state.range(0) == 1 ? std::vector<int>{64} : std::vector<int>{64, 64};
  models::AdamOptions options;
  options.max_epochs = 1;
  options.patience = 1 << 20;
  for (auto _ : state) {
    state.PauseTiming();
    auto net = models::Mlp::initialize(8, hidden, 1, models::Head::regression, init);
    Rng shuffle(5);
    state.ResumeTiming();
    benchmark::DoNotOptimize(net.train(ds.features, ds.targets, options, shuffle));
  }
  state.SetItemsProcessed(state.iterations() * ds.rows());
}
BENCHMARK(BM_MlpEpoch)->Arg(1)->Arg(2);

void BM_PluginRisk(benchmark::State& state) {
  data::SyntheticSpec spec;
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.d = 5;
  spec.num_classes = 10;
  spec.seed = 2;
  const auto sample = data::generate_synthetic(spec);
  const Eigen::MatrixXd& p = *sample.true_probabilities;
  const calib::LossFn loss{calib::LossKind::cross_entropy};
  for (auto _ : state) {
    benchmark::DoNotOptimize(calib::plugin_risk(calib::per_class_losses(loss, p), p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PluginRisk)->Arg(1000)->Arg(100000);

void BM_CostSweep(benchmark::State& state) {
  Rng rng(6);
  Eigen::VectorXd losses(state.range(0)), estimates(state.range(0));
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    losses[i] = std::exp(rng.normal());
    estimates[i] = losses[i] * std::exp(0.3 * rng.normal());
  }
  std::vector<double> costs;
  for (int k = 1; k <= 50; ++k) costs.push_back(0.1 * k);
  for (auto _ : state) benchmark::DoNotOptimize(defer::sweep_from_estimates(estimates, losses, costs));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(costs.size()));
}
BENCHMARK(BM_CostSweep)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();

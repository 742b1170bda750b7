#include "riskcal/experiment/classify.hpp"

#include "riskcal/calib/calibrator.hpp"
#include "riskcal/data/synthetic.hpp"
#include "riskcal/defer/rejector.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <thread>

namespace riskcal::experiment {
namespace {

using Clock = std::chrono::steady_clock;

struct Candidate {
  std::string label;
  std::optional<calib::RiskCalibrator> calibrator;  // empty when the fit failed
  double fit_ms = 0.0;
};

template <typename Fn>
Candidate make_candidate(std::string label, Fn&& fit) {
  const auto start = Clock::now();
  Candidate c{std::move(label), std::nullopt, 0.0};
  try {
    c.calibrator = fit();
  } catch (const Error&) {
  }
  c.fit_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return c;
}

}  // namespace

std::vector<ResultRow> evaluate_classify_seed(const ClassifyConfig& config, int seed_index) {
  const std::string idx = std::to_string(seed_index);
  data::SyntheticSpec task = config.task;
  task.seed = derive_seed(config.seed, {"classify", idx, "task"});
  const data::SyntheticData synth = data::generate_synthetic(task);
  const data::Dataset& ds = synth.dataset;
  const int k = ds.num_classes;

  Rng split_rng = Rng::stream(derive_seed(config.seed, {"classify", idx, "split"}), "classify/split");
  const std::vector<std::size_t> perm = split_rng.permutation(ds.rows());
  const std::size_t n_train = ds.rows() * 2 / 5;
  const std::size_t n_cal = ds.rows() * 2 / 5;
  auto slice = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> rows(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                  perm.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto train_rows = slice(0, n_train);
  const auto cal_rows = slice(n_train, n_train + n_cal);
  const auto test_rows = slice(n_train + n_cal, ds.rows());
  const Eigen::MatrixXd x_train = data::take_rows(ds.features, train_rows);
  const Eigen::VectorXd y_train = data::take_rows(ds.targets, train_rows);
  const Eigen::MatrixXd x_cal = data::take_rows(ds.features, cal_rows);
  const Eigen::VectorXd y_cal = data::take_rows(ds.targets, cal_rows);
  const Eigen::MatrixXd x_test = data::take_rows(ds.features, test_rows);
  const Eigen::VectorXd y_test = data::take_rows(ds.targets, test_rows);

  const calib::LossFn loss{calib::LossKind::cross_entropy};
  const auto spec_for = [&](models::Family fam, const std::string& role) {
    return models::make_spec(fam, derive_seed(config.seed, {"classify", idx, role, models::to_string(fam)}));
  };

  // Plug-in calibrators do not depend on f, so they are fit once per seed.
  std::vector<Candidate> plugins;
  for (const auto fam : config.plugin_backends) {
    plugins.push_back(make_candidate("plugin:" + models::to_string(fam), [&] {
      return calib::fit_plugin_calibrator(spec_for(fam, "backend"), loss, x_cal, y_cal, k, false);
    }));
  }
  for (const auto fam : config.temperature_scaled) {
    plugins.push_back(make_candidate("plugin-ts:" + models::to_string(fam), [&] {
      return calib::fit_plugin_calibrator(spec_for(fam, "backend"), loss, x_cal, y_cal, k, true);
    }));
  }
  std::optional<models::Predictor> source;
  if (config.representation_source) {
    try {
      source = models::fit(spec_for(*config.representation_source, "backend"), x_cal, y_cal, k).predictor;
    } catch (const Error&) {
    }
  }

  std::vector<ResultRow> rows;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto pfam : config.predictors) {
    const std::string pname = models::to_string(pfam);
    const auto pstart = Clock::now();
    std::optional<models::Predictor> f;
    Eigen::VectorXd test_losses;
    try {
      f = models::fit(spec_for(pfam, "predictor"), x_train, y_train, k).predictor;
      test_losses = calib::sample_losses(*f, loss, x_test, y_test);
    } catch (const Error&) {
      f.reset();
    }
    const double p_ms = std::chrono::duration<double, std::milli>(Clock::now() - pstart).count();

    std::vector<Candidate> candidates = plugins;
    if (f) {
      for (const auto fam : config.regression_calibrators) {
        candidates.push_back(make_candidate("regression:" + models::to_string(fam), [&] {
          return calib::fit_regression_calibrator(spec_for(fam, "regression:" + pname), loss, *f, x_cal, y_cal);
        }));
      }
      for (const auto fam : config.representation_calibrators) {
        candidates.push_back(make_candidate("representation:" + models::to_string(fam), [&]() -> calib::RiskCalibrator {
          if (!source) throw ModelError("representation source failed to fit");
          return calib::fit_regression_calibrator(spec_for(fam, "representation:" + pname), loss, *f, x_cal, y_cal,
                                                  calib::InputMode::representation, &*source);
        }));
      }
    }

    for (const auto& cand : candidates) {
      const auto estart = Clock::now();
      bool ok = false;
      if (f && cand.calibrator) {
        try {
          const Eigen::VectorXd est = cand.calibrator->estimate(*f, x_test);
          const double mae = calib::calib_error(est, test_losses).mae;
          const auto reports = defer::sweep_from_estimates(est, test_losses, config.costs);
          const double ms =
              p_ms + cand.fit_ms + std::chrono::duration<double, std::milli>(Clock::now() - estart).count();
          for (const auto& r : reports) {
            rows.push_back({"synthetic", seed_index, pname, cand.label, r.cost, r.rwr_loss, r.reject_rate, mae,
                            test_losses.mean(), ms});
          }
          ok = true;
        } catch (const Error&) {
        }
      }
      if (!ok) {
        for (const double c : config.costs) {
          rows.push_back({"synthetic", seed_index, pname, cand.label, c, nan, nan, nan, nan, 0.0});
        }
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_classify(const ClassifyConfig& config) {
  std::vector<std::vector<ResultRow>> per_seed(static_cast<std::size_t>(config.seeds));
  std::atomic<int> next{0};
  const auto work = [&] {
    while (true) {
      const int s = next.fetch_add(1);
      if (s >= config.seeds) return;
      per_seed[static_cast<std::size_t>(s)] = evaluate_classify_seed(config, s);
    }
  };
  const int workers = std::max(1, std::min(resolve_workers(config.workers), config.seeds));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::vector<ResultRow> rows;
  for (auto& block : per_seed) rows.insert(rows.end(), block.begin(), block.end());
  if (!config.output.empty()) write_results(config.output, rows);
  return rows;
}

}  // namespace riskcal::experiment

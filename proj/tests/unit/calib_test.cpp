#include "riskcal/calib/calibrator.hpp"
#include "riskcal/calib/serialize.hpp"
#include "riskcal/calib/temperature.hpp"
#include "riskcal/data/synthetic.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace riskcal;
using calib::LossFn;
using calib::LossKind;
using models::Family;

namespace {

models::Predictor constant_regressor(double value, int d) {
  return {models::make_spec(Family::lr), models::LinearModel(Eigen::VectorXd::Zero(d), value), std::nullopt, d, 0};
}

// A softmax-linear predictor with fixed weights, no training involved.
models::Predictor fixed_classifier(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  models::DenseLayer layer{w, b};
  return {models::make_spec(Family::softmax_linear), models::Mlp({layer}, models::Head::classification), std::nullopt,
          static_cast<int>(w.cols()), static_cast<int>(w.rows())};
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d, double scale = 1.0) {
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

double grid_scan_temperature(const Eigen::MatrixXd& logits, const Eigen::VectorXd& y, int points = 400) {
  double best_t = 1.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double t = std::pow(10.0, -2.0 + 4.0 * i / (points - 1));
    const double v = calib::temperature_nll(logits, y, t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

TEST(Losses, HandValues) {
  const auto f = constant_regressor(7.0, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_EQ(calib::sample_losses(f, LossFn{LossKind::squared}, x, Eigen::VectorXd::Constant(1, 4.0))[0], 9.0);
  EXPECT_EQ(calib::sample_losses(f, LossFn{LossKind::absolute}, x, Eigen::VectorXd::Constant(1, 4.0))[0], 3.0);

  const auto uniform = fixed_classifier(Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2));
  const double ce = calib::sample_losses(uniform, LossFn{LossKind::cross_entropy}, x, Eigen::VectorXd::Zero(1))[0];
  EXPECT_NEAR(ce, std::log(2.0), 1e-15);
  const double brier = calib::sample_losses(uniform, LossFn{LossKind::brier}, x, Eigen::VectorXd::Zero(1))[0];
  EXPECT_NEAR(brier, 0.5, 1e-15);
}

TEST(Losses, ZeroOneMatchesEnumeration) {
  Rng rng(3);
  Eigen::MatrixXd w = random_matrix(rng, 4, 2);
  const auto f = fixed_classifier(w, Eigen::VectorXd::Zero(4));
  const Eigen::MatrixXd x = random_matrix(rng, 200, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = static_cast<double>(rng.below(4));
  const Eigen::VectorXd z = calib::sample_losses(f, LossFn{LossKind::zero_one}, x, y);
  const Eigen::MatrixXd q = f.predict_proba(x);
  for (int i = 0; i < 200; ++i) {
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (q(i, k) > q(i, best)) best = k;
    }
    EXPECT_EQ(z[i], best == static_cast<int>(y[i]) ? 0.0 : 1.0);
  }
}

TEST(Losses, ClassifierLossOnRegressorIsAnError) {
  const auto f = constant_regressor(1.0, 1);
  EXPECT_THROW(calib::sample_losses(f, LossFn{LossKind::cross_entropy}, Eigen::MatrixXd::Zero(1, 1),
                                    Eigen::VectorXd::Zero(1)),
               ModelError);
  EXPECT_THROW(calib::parse_loss("hinge"), ConfigError);
  EXPECT_EQ(calib::parse_loss("zero_one"), LossKind::zero_one);
}

TEST(Plugin, TwoClassHandCase) {
  Eigen::MatrixXd per_class = calib::zero_one_per_class(Eigen::VectorXi::Zero(1), 2);
  Eigen::MatrixXd p(1, 2);
  p << 0.3, 0.7;
  EXPECT_DOUBLE_EQ(calib::plugin_risk(per_class, p)[0], 0.7);
}

TEST(Plugin, ZeroOneIsOneMinusMassOnPrediction) {
  Rng rng(5);
  const auto f = fixed_classifier(random_matrix(rng, 3, 2), Eigen::VectorXd::Zero(3));
  const auto p = fixed_classifier(random_matrix(rng, 3, 2), random_matrix(rng, 3, 1));
  const Eigen::MatrixXd x = random_matrix(rng, 100, 2);
  const Eigen::VectorXd g = calib::plugin_risk(f, p, LossFn{LossKind::zero_one}, x);
  const Eigen::VectorXi pred = models::argmax_rows(f.predict_proba(x));
  const Eigen::MatrixXd q = p.predict_proba(x);
  for (Eigen::Index i = 0; i < 100; ++i) EXPECT_NEAR(g[i], 1.0 - q(i, pred[i]), 1e-15);
}

TEST(Plugin, TrueProbabilitiesGiveAnalyticRisk) {
  data::SyntheticSpec spec;
  spec.n = 2000;
  spec.d = 3;
  spec.num_classes = 3;
  spec.quadratic = true;
  spec.seed = 77;
  const auto s = data::generate_synthetic(spec);
  Rng rng(1);
  const auto f = fixed_classifier(random_matrix(rng, 3, 3), Eigen::VectorXd::Zero(3));
  const Eigen::MatrixXd q = f.predict_proba(s.dataset.features);
  const auto& p = *s.true_probabilities;
  for (auto kind : {LossKind::zero_one, LossKind::cross_entropy, LossKind::brier}) {
    const Eigen::VectorXd g = calib::plugin_risk(calib::per_class_losses(LossFn{kind}, q), p);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      // Independent per-row evaluation of sum_k l(f(x), k) p_k(x).
      double direct = 0.0;
      Eigen::Index pred = 0;
      q.row(i).maxCoeff(&pred);
      for (Eigen::Index k = 0; k < 3; ++k) {
        double lk = 0.0;
        if (kind == LossKind::zero_one) lk = k == pred ? 0.0 : 1.0;
        if (kind == LossKind::cross_entropy) lk = -std::log(std::max(q(i, k), 1e-12));
        if (kind == LossKind::brier) {
          for (Eigen::Index j = 0; j < 3; ++j) lk += std::pow(q(i, j) - (j == k ? 1.0 : 0.0), 2);
        }
        direct += lk * p(i, k);
      }
      ASSERT_NEAR(g[i], direct, 1e-9);
    }
  }
}

TEST(Plugin, EstimatesStayWithinPerClassRange) {
  Rng rng(8);
  const auto f = fixed_classifier(random_matrix(rng, 4, 3, 3.0), Eigen::VectorXd::Zero(4));
  const auto p = fixed_classifier(random_matrix(rng, 4, 3, 3.0), Eigen::VectorXd::Zero(4));
  const Eigen::MatrixXd x = random_matrix(rng, 300, 3);
  for (auto kind : {LossKind::zero_one, LossKind::cross_entropy, LossKind::brier}) {
    const Eigen::MatrixXd per_class = calib::per_class_losses(LossFn{kind}, f.predict_proba(x));
    const Eigen::VectorXd g = calib::plugin_risk(per_class, p.predict_proba(x));
    for (Eigen::Index i = 0; i < 300; ++i) {
      EXPECT_GE(g[i], per_class.row(i).minCoeff() - 1e-12);
      EXPECT_LE(g[i], per_class.row(i).maxCoeff() + 1e-12);
    }
  }
}

TEST(Plugin, ClassCountMismatchIsAnError) {
  const auto f = fixed_classifier(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3));
  const auto p = fixed_classifier(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2));
  EXPECT_THROW(calib::plugin_risk(f, p, LossFn{LossKind::zero_one}, Eigen::MatrixXd::Zero(1, 2)), ModelError);
}

TEST(Temperature, ArgmaxInvariantForAnyTemperature) {
  Rng rng(2);
  const Eigen::MatrixXd logits = random_matrix(rng, 500, 5, 4.0);
  const Eigen::VectorXi base = models::argmax_rows(logits);
  for (double t : {0.01, 0.3, 1.0, 2.5, 100.0}) {
    EXPECT_EQ(models::argmax_rows(calib::scaled_probabilities(logits, t)), base) << t;
  }
}

TEST(Temperature, WellSpecifiedLogitsNeedNoScaling) {
  data::SyntheticSpec spec;
  spec.n = 20000;
  spec.d = 4;
  spec.num_classes = 3;
  spec.seed = 3;
  spec.coefficient_scale = 1.5;
  const auto s = data::generate_synthetic(spec);
  const Eigen::MatrixXd logits = s.true_probabilities->array().log().matrix();
  const auto fit = calib::fit_temperature_to_logits(logits, s.dataset.targets);
  EXPECT_GE(fit.temperature, 0.8);
  EXPECT_LE(fit.temperature, 1.25);
  const double oracle = grid_scan_temperature(logits, s.dataset.targets);
  EXPECT_NEAR(std::log10(fit.temperature), std::log10(oracle), 4.0 / 399.0 + 1e-3);
}

TEST(Temperature, ScaleCovariance) {
  Rng rng(4);
  const Eigen::MatrixXd logits = random_matrix(rng, 3000, 3, 2.0);
  Eigen::VectorXd y(3000);
  const Eigen::MatrixXd p = data::softmax_rows(0.5 * logits);  // overconfident logits
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double u = rng.uniform();
    y[i] = u < p(i, 0) ? 0 : u < p(i, 0) + p(i, 1) ? 1 : 2;
  }
  const double t1 = calib::fit_temperature_to_logits(logits, y).temperature;
  const double t10 = calib::fit_temperature_to_logits(10.0 * logits, y).temperature;
  EXPECT_NEAR(t10 / t1, 10.0, 0.05);
  EXPECT_NEAR(std::log10(t1), std::log10(grid_scan_temperature(logits, y)), 0.011);
  EXPECT_NEAR(t1, 2.0, 0.3);
}

TEST(Temperature, SingleClassLabelsAreFlagged) {
  Rng rng(5);
  const auto fit = calib::fit_temperature_to_logits(random_matrix(rng, 50, 3), Eigen::VectorXd::Zero(50));
  EXPECT_TRUE(fit.degenerate);
}

TEST(CalibError, HandValuesAndZeroIffEqual) {
  const auto r = calib::calib_error(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2));
  EXPECT_DOUBLE_EQ(r.mae, 1.5);
  EXPECT_DOUBLE_EQ(r.mse, 2.5);
  const Eigen::Vector3d z(0.3, 1.0, 7.0);
  EXPECT_EQ(calib::calib_error(z, z).mae, 0.0);
  EXPECT_EQ(calib::calib_error(z, z).mse, 0.0);
  Eigen::Vector3d off = z;
  off[2] = std::nextafter(7.0, 8.0);
  EXPECT_GT(calib::calib_error(off, z).mae, 0.0);
  EXPECT_THROW(calib::calib_error(Eigen::VectorXd(0), Eigen::VectorXd(0)), ModelError);
}

TEST(RegressionCalibrator, PerfectPredictorGivesZeroEstimates) {
  Rng rng(6);
  const Eigen::MatrixXd x = random_matrix(rng, 200, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(200, 3.0);
  const auto f = constant_regressor(3.0, 2);
  for (auto fam : {Family::lr, Family::rf, Family::mlp, Family::mlp2}) {
    const auto g = calib::fit_regression_calibrator(models::make_spec(fam, 1), LossFn{LossKind::squared}, f, x, y);
    const Eigen::VectorXd est = g.estimate(f, x);
    if (fam == Family::rf) {
      EXPECT_EQ(est.cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_LT(est.cwiseAbs().maxCoeff(), 1e-6) << models::to_string(fam);
    }
  }
}

TEST(RegressionCalibrator, LinearLossSurfaceIsRecovered) {
  Rng rng(7);
  const Eigen::MatrixXd x = random_matrix(rng, 300, 3);
  // f = 0 and |y| chosen so that z = y^2 is affine in x: y = sqrt(5 + x0 - 0.5 x2) on a positive support.
  Eigen::VectorXd y(300);
  Eigen::VectorXd truth(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    truth[i] = 10.0 + x(i, 0) - 0.5 * x(i, 2);
    y[i] = std::sqrt(truth[i]);
  }
  const auto f = constant_regressor(0.0, 3);
  const auto g = calib::fit_regression_calibrator(models::make_spec(Family::lr), LossFn{LossKind::squared}, f, x, y);
  EXPECT_LT((g.estimate(f, x) - truth).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(RegressionCalibrator, EstimatesAreClippedAtZero) {
  Rng rng(9);
  const Eigen::MatrixXd x = random_matrix(rng, 100, 1);
  Eigen::VectorXd y(100);
  for (Eigen::Index i = 0; i < 100; ++i) y[i] = std::sqrt(std::max(0.0, x(i, 0)));
  const auto f = constant_regressor(0.0, 1);
  const auto g = calib::fit_regression_calibrator(models::make_spec(Family::lr), LossFn{LossKind::squared}, f, x, y);
  const Eigen::VectorXd est = g.estimate(f, (Eigen::MatrixXd(1, 1) << -50.0).finished());
  EXPECT_EQ(est[0], 0.0);
}

TEST(RegressionCalibrator, ClassificationFamilyRejected) {
  const auto f = constant_regressor(0.0, 1);
  EXPECT_THROW(calib::fit_regression_calibrator(models::make_spec(Family::softmax_linear), LossFn{}, f,
                                                Eigen::MatrixXd::Zero(4, 1), Eigen::VectorXd::Zero(4)),
               ModelError);
}

TEST(PluginCalibrator, StrategiesAndPersistence) {
  data::SyntheticSpec spec;
  spec.n = 600;
  spec.d = 3;
  spec.num_classes = 3;
  spec.seed = 12;
  const auto s = data::generate_synthetic(spec);
  const auto& x = s.dataset.features;
  const auto& y = s.dataset.targets;
  const auto f = models::fit(models::make_spec(Family::softmax_linear, 1), x, y).predictor;
  const LossFn ce{LossKind::cross_entropy};

  const auto plain = calib::fit_plugin_calibrator(models::make_spec(Family::softmax_mlp, 2), ce, x, y, 3, false);
  EXPECT_EQ(plain.strategy(), calib::Strategy::plugin);
  EXPECT_EQ(plain.temperature(), 1.0);
  const auto ts = calib::fit_plugin_calibrator(models::make_spec(Family::softmax_mlp, 2), ce, x, y, 3, true);
  EXPECT_EQ(ts.strategy(), calib::Strategy::plugin_temperature);
  EXPECT_GT(ts.temperature(), 0.0);

  const auto rep = calib::fit_regression_calibrator(models::make_spec(Family::rf, 3), ce, f, x, y,
                                                    calib::InputMode::representation, &plain.backend());
  EXPECT_EQ(rep.input_mode(), calib::InputMode::representation);

  for (const auto* g : {&plain, &ts, &rep}) {
    const auto back = calib::deserialize_calibrator(calib::serialize_calibrator(*g));
    EXPECT_EQ(back.estimate(f, x), g->estimate(f, x));
    EXPECT_EQ(back.strategy(), g->strategy());
  }
  EXPECT_THROW(calib::fit_plugin_calibrator(models::make_spec(Family::rf), ce, x, y, 3), ModelError);
  EXPECT_THROW(calib::fit_regression_calibrator(models::make_spec(Family::rf), ce, f, x, y,
                                                calib::InputMode::representation),
               ModelError);
}

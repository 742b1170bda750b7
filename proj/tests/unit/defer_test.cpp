#include "riskcal/defer/rejector.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace riskcal;
using defer::evaluate_from_estimates;
using defer::sweep_from_estimates;

namespace {

Eigen::VectorXd random_losses(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::exp(rng.normal() - 1.0);
  return v;
}

double mean_min(const Eigen::VectorXd& z, double c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += std::min(z[i], c);
  return s / static_cast<double>(z.size());
}

}  // namespace

TEST(Rwr, ThreePointHandCase) {
  const auto r = evaluate_from_estimates(Eigen::Vector3d(0.05, 0.8, 0.3), Eigen::Vector3d(0.1, 0.9, 0.4), 0.5);
  EXPECT_NEAR(r.rwr_loss, (0.1 + 0.5 + 0.4) / 3.0, 1e-15);
  EXPECT_NEAR(r.reject_rate, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.accepted_mean_loss, 0.25, 1e-15);
  EXPECT_FALSE(r.all_deferred);
}

TEST(Rwr, EqualityAccepts) {
  const auto r = evaluate_from_estimates(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.7, 0.1), 0.5);
  EXPECT_EQ(r.reject_rate, 0.0);
  EXPECT_DOUBLE_EQ(r.rwr_loss, 0.4);
}

TEST(Rwr, AllDeferAndAllAcceptLimits) {
  Rng rng(1);
  const Eigen::VectorXd z = random_losses(rng, 100);
  const Eigen::VectorXd est = random_losses(rng, 100);
  const double below = est.minCoeff() / 2.0;
  const auto all_defer = evaluate_from_estimates(est, z, below);
  EXPECT_EQ(all_defer.reject_rate, 1.0);
  EXPECT_TRUE(all_defer.all_deferred);
  EXPECT_EQ(all_defer.accepted_mean_loss, 0.0);
  EXPECT_NEAR(all_defer.rwr_loss, below, 1e-15);
  const auto all_accept = evaluate_from_estimates(est, z, est.maxCoeff() + 1.0);
  EXPECT_EQ(all_accept.reject_rate, 0.0);
  EXPECT_NEAR(all_accept.rwr_loss, z.mean(), 1e-12);
}

TEST(Rwr, OracleLowerBoundOnRandomCells) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(200));
    const Eigen::VectorXd z = random_losses(rng, n);
    Eigen::VectorXd est = z;
    // Noisy calibrator, sometimes wildly wrong.
    for (Eigen::Index i = 0; i < n; ++i) est[i] = std::max(0.0, z[i] + rng.normal() * (trial % 5));
    const double c = std::exp(rng.normal());
    const auto r = evaluate_from_estimates(est, z, c);
    ASSERT_GE(r.rwr_loss, r.oracle_rwr_loss);
    ASSERT_NEAR(r.oracle_rwr_loss, mean_min(z, c), 1e-12);
  }
}

TEST(Rwr, OracleCalibratorAchievesBound) {
  Rng rng(3);
  const Eigen::VectorXd z = random_losses(rng, 400);
  for (double c : {0.05, 0.2, 0.5, 1.0, 2.0}) {
    const auto r = evaluate_from_estimates(z, z, c);
    EXPECT_EQ(r.rwr_loss, r.oracle_rwr_loss);
    EXPECT_NEAR(r.rwr_loss, mean_min(z, c), 1e-12);
  }
}

TEST(Sweep, OracleMonotoneAndRejectRateNonIncreasing) {
  Rng rng(4);
  const std::vector<double> costs{0.2, 0.5, 1.0, 2.0};
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd z = random_losses(rng, 300);
    const auto oracle = sweep_from_estimates(z, z, costs);
    for (std::size_t k = 1; k < costs.size(); ++k) EXPECT_GE(oracle[k].rwr_loss, oracle[k - 1].rwr_loss);
    const Eigen::VectorXd noisy = random_losses(rng, 300);
    const auto any = sweep_from_estimates(noisy, z, costs);
    for (std::size_t k = 1; k < costs.size(); ++k) EXPECT_LE(any[k].reject_rate, any[k - 1].reject_rate);
  }
}

TEST(Sweep, HandCase) {
  const auto r = sweep_from_estimates(Eigen::Vector2d(0.25, 0.25), Eigen::Vector2d(0.3, 0.3), {0.2, 0.5});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0].rwr_loss, 0.2);
  EXPECT_DOUBLE_EQ(r[1].rwr_loss, 0.3);
}

TEST(Sweep, DecisionsInvariantUnderPositiveAffineMaps) {
  Rng rng(5);
  const Eigen::VectorXd z = random_losses(rng, 200);
  // Dyadic values keep the affine map exact, so ties survive it.
  const Eigen::VectorXd est = (random_losses(rng, 200).array() * 1024.0).round().matrix() / 1024.0;
  for (double c : {0.125, 0.40625, 1.3125}) {
    const auto base = evaluate_from_estimates(est, z, c);
    // The accept set is unchanged when estimates and cost move together; rwr
    // is compared via the reject rate since the cost paid on deferral changes.
    const double a = 2.0, b = 0.25;
    const Eigen::VectorXd mapped = (a * est.array() + b).matrix();
    const auto moved = evaluate_from_estimates(mapped, z, a * c + b);
    EXPECT_EQ(moved.reject_rate, base.reject_rate);
    EXPECT_EQ(moved.accepted_mean_loss, base.accepted_mean_loss);
  }
}

TEST(Sweep, RejectsBadCosts) {
  const Eigen::VectorXd z = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(sweep_from_estimates(z, z, {0.5, 0.2}), ModelError);
  EXPECT_THROW(sweep_from_estimates(z, z, {0.0, 0.2}), ModelError);
  EXPECT_THROW(sweep_from_estimates(z, z, {0.2, 0.2}), ModelError);
  EXPECT_THROW(evaluate_from_estimates(z, z, -1.0), ModelError);
  EXPECT_THROW(evaluate_from_estimates(Eigen::VectorXd::Ones(2), z, 1.0), ModelError);
}

TEST(L2d, PerfectClassifierHasNoLoss) {
  // Logits of 40 on the true class: q_y = 1 - eps with eps ~ 2 exp(-40).
  models::DenseLayer layer{40.0 * Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)};
  models::Predictor f(models::make_spec(models::Family::softmax_linear),
                      models::Mlp({layer}, models::Head::classification), std::nullopt, 3, 3);
  const calib::LossFn ce{calib::LossKind::cross_entropy};
  const auto g = calib::make_plugin_calibrator(f, ce);
  const defer::Rejector rej{g, 0.2};
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
  const auto r = defer::evaluate_l2d_classification(rej, f, ce, x, Eigen::Vector3d(0, 1, 2));
  EXPECT_LT(r.rwr_loss, 1e-15);
  EXPECT_EQ(r.reject_rate, 0.0);
  EXPECT_THROW(defer::evaluate_l2d_classification(rej, f, calib::LossFn{calib::LossKind::zero_one}, x,
                                                  Eigen::Vector3d(0, 1, 2)),
               ModelError);
}

#include "riskcal/data/synthetic.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/models/predictor.hpp"
#include "riskcal/models/serialize.hpp"
#include "riskcal/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace riskcal;
using models::Family;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  }
  return m;
}

data::SyntheticData small_classification(std::uint64_t seed, std::size_t n = 300) {
  data::SyntheticSpec spec;
  spec.n = n;
  spec.d = 3;
  spec.num_classes = 3;
  spec.seed = seed;
  spec.coefficient_scale = 2.0;
  return data::generate_synthetic(spec);
}

// Walks the stored node array; independent of RegressionTree::predict_row.
double traverse(const std::vector<models::TreeNode>& nodes, const Eigen::RowVectorXd& row) {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(at)];
    at = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

}  // namespace

TEST(Families, NamesRoundTrip) {
  for (auto f : {Family::lr, Family::rf, Family::mlp, Family::mlp2, Family::softmax_linear, Family::softmax_mlp,
                 Family::softmax_mlp2}) {
    EXPECT_EQ(models::parse_family(models::to_string(f)), f);
  }
  EXPECT_EQ(models::parse_family("mlp2"), Family::mlp2);
  EXPECT_THROW(models::parse_family("xgboost"), ConfigError);
  EXPECT_EQ(models::make_spec(Family::mlp).hidden_widths(), std::vector<int>{64});
  EXPECT_EQ(models::make_spec(Family::mlp2).hidden_widths(), (std::vector<int>{64, 64}));
  EXPECT_TRUE(models::make_spec(Family::softmax_linear).hidden_widths().empty());
}

TEST(LinearRegression, RecoversExactLine) {
  Eigen::MatrixXd x(50, 1);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) {
    x(i, 0) = -2.0 + 0.1 * i;
    y[i] = 2.0 * x(i, 0) + 1.0;
  }
  const auto fit = models::fit(models::make_spec(Family::lr), x, y);
  const auto& lin = std::get<models::LinearModel>(fit.predictor.model());
  EXPECT_NEAR(lin.coefficients()[0], 2.0, 1e-6);
  EXPECT_NEAR(lin.intercept(), 1.0, 1e-6);
  EXPECT_LT((fit.predictor.predict(x) - y).squaredNorm() / 50.0, 1e-10);
}

TEST(LinearRegression, AffineEvaluation) {
  models::Predictor p(models::make_spec(Family::lr), models::LinearModel(Eigen::VectorXd::Constant(1, 2.0), 1.0),
                      std::nullopt, 1, 0);
  EXPECT_EQ(p.predict(Eigen::MatrixXd::Constant(1, 1, 3.0))[0], 7.0);
}

TEST(LinearRegression, ResidualsOrthogonalToDesign) {
  Rng rng(12);
  const Eigen::MatrixXd x = random_matrix(rng, 200, 5);
  Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(5, -1, 3);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.3 * rng.normal() + 4.0;
  const auto p = models::fit(models::make_spec(Family::lr), x, y).predictor;
  const Eigen::VectorXd r = y - p.predict(x);
  EXPECT_LT(std::abs(r.sum()), 1e-6);
  EXPECT_LT((x.transpose() * r).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LinearRegression, CollinearDesignGetsJitter) {
  Rng rng(1);
  Eigen::MatrixXd x(60, 3);
  x.col(0) = random_matrix(rng, 60, 1);
  x.col(1) = 2.0 * x.col(0);
  x.col(2) = random_matrix(rng, 60, 1);
  const Eigen::VectorXd y = x.col(0) + x.col(2);
  const auto p = models::fit(models::make_spec(Family::lr), x, y).predictor;
  EXPECT_TRUE(std::get<models::LinearModel>(p.model()).jittered());
  EXPECT_TRUE(p.predict(x).allFinite());
  EXPECT_LT((p.predict(x) - y).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Forest, InterpolatesNoiselessStep) {
  Rng rng(9);
  Eigen::MatrixXd x(200, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    x(i, 1) = rng.uniform(-1, 1);
    y[i] = x(i, 0) > 0.1 ? 3.0 : -1.0;
  }
  const auto p = models::fit(models::make_spec(Family::rf, 5), x, y).predictor;
  const Eigen::VectorXd pred = p.predict(x);
  EXPECT_LT((pred - y).squaredNorm() / 200.0, 0.01);

  // Oracle: average of explicit traversals of every stored tree.
  const auto& forest = std::get<models::RandomForest>(p.model());
  ASSERT_EQ(forest.trees().size(), 100u);
  for (Eigen::Index i = 0; i < 200; ++i) {
    double sum = 0.0;
    for (const auto& tree : forest.trees()) sum += traverse(tree.nodes(), x.row(i));
    EXPECT_DOUBLE_EQ(pred[i], sum / 100.0);
  }
}

TEST(Forest, PredictionIsExactMeanOfTrees) {
  Rng rng(2);
  const Eigen::MatrixXd x = random_matrix(rng, 150, 4);
  const Eigen::VectorXd y = x.col(0).array().sin() + x.col(1).array().square();
  const auto p = models::fit(models::make_spec(Family::rf, 1), x, y).predictor;
  const Eigen::MatrixXd xt = random_matrix(rng, 50, 4);
  const Eigen::MatrixXd per_tree = p.tree_predictions(xt);
  ASSERT_EQ(per_tree.cols(), 100);
  // Accumulate in tree order; Eigen's rowwise reduction may reassociate.
  Eigen::VectorXd mean(xt.rows());
  for (Eigen::Index i = 0; i < xt.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index t = 0; t < per_tree.cols(); ++t) sum += per_tree(i, t);
    mean[i] = sum / 100.0;
  }
  EXPECT_EQ(p.predict(xt), mean);
}

TEST(Forest, LeavesArePureOrUnsplittable) {
  Eigen::MatrixXd x(8, 1);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  Eigen::VectorXd y(8);
  y << 0, 0, 0, 1, 1, 1, 1, 5;
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6, 7};
  const auto tree = models::RegressionTree::grow(x, y, rows, 2);
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_EQ(tree.predict_row(x.row(i)), y[i]);
  EXPECT_EQ(tree.leaf_count(), 3u);
  // First split at the midpoint between 7 and 8 isolates the outlier (largest variance reduction).
  EXPECT_EQ(tree.nodes()[0].threshold, 7.5);
}

TEST(AllFamilies, ConstantTargetIsReproduced) {
  Rng rng(3);
  const Eigen::MatrixXd x = random_matrix(rng, 120, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(120, 4.0);
  for (auto f : {Family::lr, Family::rf, Family::mlp, Family::mlp2}) {
    const auto p = models::fit(models::make_spec(f, 11), x, y).predictor;
    EXPECT_LT((p.predict(x).array() - 4.0).abs().maxCoeff(), 1e-6) << models::to_string(f);
  }
}

TEST(AllFamilies, FitsAreBitDeterministic) {
  Rng rng(6);
  const Eigen::MatrixXd x = random_matrix(rng, 300, 3);
  const Eigen::VectorXd y = x.col(0).array().cos() + 0.1 * x.col(2).array();
  for (auto f : {Family::lr, Family::rf, Family::mlp, Family::mlp2}) {
    const auto a = models::fit(models::make_spec(f, 21), x, y).predictor;
    const auto b = models::fit(models::make_spec(f, 21), x, y).predictor;
    EXPECT_EQ(a.predict(x), b.predict(x)) << models::to_string(f);
  }
  const auto task = small_classification(4);
  for (auto f : {Family::softmax_linear, Family::softmax_mlp, Family::softmax_mlp2}) {
    const auto a = models::fit(models::make_spec(f, 21), task.dataset.features, task.dataset.targets).predictor;
    const auto b = models::fit(models::make_spec(f, 21), task.dataset.features, task.dataset.targets).predictor;
    EXPECT_EQ(a.predict_proba(task.dataset.features), b.predict_proba(task.dataset.features));
  }
}

TEST(Mlp, RegressionLearnsSmoothFunction) {
  Rng rng(8);
  const Eigen::MatrixXd x = random_matrix(rng, 600, 2);
  const Eigen::VectorXd y = x.col(0).array().sin() * 2.0 + x.col(1).array();
  const auto fit = models::fit(models::make_spec(Family::mlp2, 1), x, y);
  EXPECT_GT(fit.report.epochs, 10);
  const double mse = (fit.predictor.predict(x) - y).squaredNorm() / 600.0;
  const double var = (y.array() - y.mean()).square().mean();
  EXPECT_LT(mse, 0.1 * var);
}

TEST(Softmax, ZeroWeightsGiveUniformRows) {
  models::DenseLayer layer{Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::Zero(3)};
  models::Predictor p(models::make_spec(Family::softmax_linear), models::Mlp({layer}, models::Head::classification),
                      std::nullopt, 4, 3);
  Rng rng(0);
  const Eigen::MatrixXd q = p.predict_proba(random_matrix(rng, 10, 4));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(q(i, k), 1.0 / 3.0, 1e-15);
  }
}

TEST(Softmax, ProbabilitiesAreDistributionsAndMatchLabels) {
  const auto task = small_classification(13);
  const auto& x = task.dataset.features;
  for (auto f : {Family::softmax_linear, Family::softmax_mlp, Family::softmax_mlp2}) {
    const auto p = models::fit(models::make_spec(f, 2), x, task.dataset.targets).predictor;
    const Eigen::MatrixXd qin = p.predict_proba(x);
    EXPECT_GT(qin.minCoeff(), 0.0);
    EXPECT_LT(qin.maxCoeff(), 1.0);
    // Far from the data the top probability can round to exactly 1.0 in double.
    Rng rng(1);
    const Eigen::MatrixXd xt = 3.0 * random_matrix(rng, 200, 3);
    const Eigen::MatrixXd q = p.predict_proba(xt);
    EXPECT_GT(q.minCoeff(), 0.0);
    EXPECT_LE(q.maxCoeff(), 1.0);
    EXPECT_LT((q.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    const Eigen::VectorXd labels = p.predict(xt);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      Eigen::Index best = 0;
      q.row(i).maxCoeff(&best);
      EXPECT_EQ(labels[i], static_cast<double>(best));
    }
  }
}

TEST(Softmax, ShiftInvariance) {
  Rng rng(17);
  const Eigen::MatrixXd logits = 5.0 * random_matrix(rng, 40, 4);
  const Eigen::MatrixXd shifted = (logits.array() + 123.456).matrix();
  EXPECT_LT((data::softmax_rows(logits) - data::softmax_rows(shifted)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::VectorXd lse = models::log_sum_exp_rows(logits);
  const Eigen::VectorXd lse_shift = models::log_sum_exp_rows(shifted);
  EXPECT_LT(((lse_shift.array() - 123.456) - lse.array()).abs().maxCoeff(), 1e-9);
}

TEST(Representation, ShapeRangeAndRecomposition) {
  const auto task = small_classification(21);
  const auto& x = task.dataset.features;
  for (auto f : {Family::softmax_mlp, Family::softmax_mlp2}) {
    const auto p = models::fit(models::make_spec(f, 3), x, task.dataset.targets).predictor;
    const Eigen::MatrixXd rep = p.extract_representation(x);
    EXPECT_EQ(rep.cols(), 64);
    EXPECT_GE(rep.minCoeff(), 0.0);
    const auto& last = p.final_layer();
    const Eigen::MatrixXd logits = (rep * last.weights.transpose()).rowwise() + last.bias.transpose();
    EXPECT_LT((logits - p.predict_logits(x)).cwiseAbs().maxCoeff(), 1e-9);
  }
  const auto lin = models::fit(models::make_spec(Family::softmax_linear), x, task.dataset.targets).predictor;
  EXPECT_THROW((void)lin.extract_representation(x), ModelError);
}

TEST(Gradient, RegressionHeadSmallBatch) {
  Rng rng(5);
  const Eigen::MatrixXd x = random_matrix(rng, 8, 3);
  const Eigen::VectorXd y = random_matrix(rng, 8, 1);
  EXPECT_LT(models::gradient_check(models::make_spec(Family::mlp, 1), x, y), 1e-4);
}

TEST(Gradient, PropertyOverTwentySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 100);
    const auto n = static_cast<Eigen::Index>(4 + rng.below(29));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
    const Eigen::MatrixXd x = random_matrix(rng, n, d);
    Eigen::VectorXd yr = random_matrix(rng, n, 1);
    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) yc[i] = static_cast<double>(rng.below(3));
    yc[0] = 2;  // ensure K = 3
    const auto fam_r = seed % 2 ? Family::mlp : Family::mlp2;
    const auto fam_c = seed % 3 == 0 ? Family::softmax_linear : seed % 3 == 1 ? Family::softmax_mlp : Family::softmax_mlp2;
    EXPECT_LT(models::gradient_check(models::make_spec(fam_r, seed), x, yr), 1e-4) << "seed " << seed;
    EXPECT_LT(models::gradient_check(models::make_spec(fam_c, seed), x, yc, 1e-5, 3), 1e-4) << "seed " << seed;
  }
}

TEST(Gradient, ZeroBatchIsStationaryForBias) {
  Rng rng(1);
  const auto net = models::Mlp::initialize(3, {64}, 1, models::Head::regression, rng);
  Eigen::VectorXd grad;
  (void)net.loss_and_gradient(Eigen::MatrixXd::Zero(5, 3), Eigen::VectorXd::Zero(5), &grad);
  // Output bias is the final parameter.
  EXPECT_EQ(grad[grad.size() - 1], 0.0);
}

TEST(Gradient, HugeLogitsStayFinite) {
  models::DenseLayer layer{1000.0 * Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)};
  const models::Mlp net({layer}, models::Head::classification);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd grad;
  const double perfect = net.loss_and_gradient(x, Eigen::Vector3d(0, 1, 2), &grad);
  EXPECT_TRUE(std::isfinite(perfect));
  EXPECT_TRUE(grad.allFinite());
  const double wrong = net.loss_and_gradient(x, Eigen::Vector3d(1, 2, 0), &grad);
  EXPECT_NEAR(wrong, 1000.0, 1e-9);
  EXPECT_TRUE(grad.allFinite());
}

TEST(Serialization, RoundTripIsBitExact) {
  Rng rng(31);
  const Eigen::MatrixXd x = random_matrix(rng, 80, 3);
  const Eigen::VectorXd y = x.col(0) + x.col(1).array().abs().matrix();
  for (auto f : {Family::lr, Family::rf, Family::mlp, Family::mlp2}) {
    const auto p = models::fit(models::make_spec(f, 4), x, y).predictor;
    const auto back = models::deserialize_predictor(models::serialize_predictor(p));
    EXPECT_EQ(back.predict(x), p.predict(x)) << models::to_string(f);
    EXPECT_EQ(back.spec().seed, 4u);
  }
  const auto task = small_classification(2, 120);
  for (auto f : {Family::softmax_linear, Family::softmax_mlp2}) {
    const auto p = models::fit(models::make_spec(f, 4), task.dataset.features, task.dataset.targets).predictor;
    const auto back = models::deserialize_predictor(models::serialize_predictor(p));
    EXPECT_EQ(back.predict_proba(task.dataset.features), p.predict_proba(task.dataset.features));
    EXPECT_EQ(back.num_classes(), 3);
  }
  EXPECT_THROW(models::deserialize_predictor("{\"format\": \"nope\"}"), ModelError);
  EXPECT_THROW(models::deserialize_predictor("not json"), ModelError);
}

TEST(Serialization, Base64Doubles) {
  const std::vector<double> v{0.1, -0.0, 1e308, 5e-324, std::nan("")};
  const auto back = models::decode_doubles(models::encode_doubles(v.data(), v.size()));
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(std::memcmp(&back[i], &v[i], sizeof(double)), 0);
  }
}

TEST(Predictor, MisuseIsReported) {
  Rng rng(1);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 2);
  const Eigen::VectorXd y = x.col(0);
  const auto p = models::fit(models::make_spec(Family::lr), x, y).predictor;
  EXPECT_THROW((void)p.predict(random_matrix(rng, 3, 5)), ModelError);
  EXPECT_THROW((void)p.predict_proba(x), ModelError);
  models::Predictor empty;
  EXPECT_THROW((void)empty.predict(x), ModelError);
  EXPECT_THROW(models::fit(models::make_spec(Family::lr), Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), ModelError);
}

TEST(Predictor, ArgmaxTiesPickLowestIndex) {
  Eigen::MatrixXd m(2, 3);
  m << 0.2, 0.4, 0.4, 0.5, 0.5, 0.0;
  const Eigen::VectorXi a = models::argmax_rows(m);
  EXPECT_EQ(a[0], 1);
  EXPECT_EQ(a[1], 0);
}

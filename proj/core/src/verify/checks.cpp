#include "riskcal/verify/checks.hpp"

#include "riskcal/calib/calibrator.hpp"
#include "riskcal/data/synthetic.hpp"
#include "riskcal/errors.hpp"
#include "riskcal/models/predictor.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace riskcal::verify {
namespace {

std::vector<std::size_t> iota_rows(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return rows;
}

// l(f(x), k) written out per entry, independent of calib::per_class_losses.
double direct_loss(calib::LossKind kind, const Eigen::RowVectorXd& q, int k) {
  switch (kind) {
    case calib::LossKind::zero_one: {
      Eigen::Index top = 0;
      for (Eigen::Index j = 1; j < q.size(); ++j) {
        if (q[j] > q[top]) top = j;
      }
      return top == k ? 0.0 : 1.0;
    }
    case calib::LossKind::cross_entropy:
      return -std::log(std::max(q[k], 1e-12));
    case calib::LossKind::brier: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double e = q[j] - (j == k ? 1.0 : 0.0);
        s += e * e;
      }
      return s;
    }
    default:
      throw ModelError("realizability check needs a classification loss");
  }
}

}  // namespace

TheoryCheckResult brier_identity_check(std::size_t n, std::uint64_t seed, BrierVariant variant) {
  if (n < 1000) throw DataError(fmt::format("brier identity check needs n >= 1000, got {}", n));
  data::SyntheticSpec spec;
  spec.generator = data::Generator::known_density_classification;
  spec.n = n;
  spec.d = 2;
  spec.num_classes = 2;
  spec.seed = seed;
  spec.coefficients = {3.0, -2.0};
  const data::SyntheticData sample = data::generate_synthetic(spec);
  const Eigen::MatrixXd& p = *sample.true_probabilities;
  const Eigen::VectorXd& y = sample.dataset.targets;

  Eigen::MatrixXd p_theta = Eigen::MatrixXd::Constant(p.rows(), p.cols(), 0.5);
  if (variant == BrierVariant::truth) p_theta = p;

  double a = 0.0;
  double risk_theta = 0.0;
  double risk_true = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::RowVectorXd onehot = Eigen::RowVectorXd::Zero(p.cols());
    onehot[static_cast<Eigen::Index>(y[i])] = 1.0;
    a += (p_theta.row(i) - p.row(i)).squaredNorm();
    if (variant == BrierVariant::negative_control) {
      risk_theta += (p_theta.row(i) - onehot).lpNorm<1>();
      risk_true += (p.row(i) - onehot).lpNorm<1>();
    } else {
      risk_theta += (p_theta.row(i) - onehot).squaredNorm();
      risk_true += (p.row(i) - onehot).squaredNorm();
    }
  }
  const auto count = static_cast<double>(n);
  const double b = (risk_theta - risk_true) / count;
  a /= count;

  TheoryCheckResult r;
  r.name = variant == BrierVariant::negative_control ? "brier-identity-negative-control"
           : variant == BrierVariant::truth        ? "brier-identity-truth"
                                                   : "brier-identity";
  r.statistic = std::abs(a - b);
  r.tolerance = 4.0 / std::sqrt(count);
  r.passed = r.statistic <= r.tolerance;
  r.n = n;
  r.seed = seed;
  r.negative_control = variant == BrierVariant::negative_control;
  return r;
}

TheoryCheckResult realizability_exactness(std::size_t n, std::uint64_t seed, calib::LossKind loss, bool perturb) {
  constexpr int kClasses = 3;
  constexpr int kDim = 3;
  data::SyntheticSpec spec;
  spec.generator = data::Generator::known_density_classification;
  spec.n = n;
  spec.d = kDim;
  spec.num_classes = kClasses;
  spec.seed = seed;
  spec.quadratic = true;
  const data::SyntheticData sample = data::generate_synthetic(spec);
  const Eigen::MatrixXd& x = sample.dataset.features;
  const Eigen::MatrixXd& p = *sample.true_probabilities;

  // A fixed softmax-linear predictor with its own random weights.
  Rng rng = Rng::stream(seed, "verify/realizability-predictor");
  models::DenseLayer layer{Eigen::MatrixXd(kClasses, kDim), Eigen::VectorXd(kClasses)};
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.5 * rng.normal();
  const models::Predictor f(models::make_spec(models::Family::softmax_linear),
                            models::Mlp({layer}, models::Head::classification), std::nullopt, kDim, kClasses);
  const Eigen::MatrixXd q = f.predict_proba(x);

  const calib::LossFn fn{loss};
  const Eigen::MatrixXd per_class = calib::per_class_losses(fn, q);
  Eigen::MatrixXd p_hat = p;
  if (perturb) {
    // Corrupt the entry with the largest loss; a zero-loss entry would hide the change.
    Eigen::Index k = 0;
    per_class.row(0).maxCoeff(&k);
    p_hat(0, k) += 0.01;
  }
  const Eigen::VectorXd plugin = calib::plugin_risk(per_class, p_hat);

  double gap = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double g = 0.0;
    for (int k = 0; k < kClasses; ++k) g += direct_loss(loss, q.row(i), k) * p(i, k);
    gap = std::max(gap, std::abs(plugin[i] - g));
  }
  TheoryCheckResult r;
  r.name = fmt::format("realizability-{}{}", calib::to_string(loss), perturb ? "-perturbed" : "");
  r.statistic = gap;
  r.tolerance = 1e-9;
  r.passed = gap <= r.tolerance;
  r.n = n;
  r.seed = seed;
  r.negative_control = perturb;
  return r;
}

SeparableResult separable_comparison(const SeparableOptions& options) {
  if (options.n < 60) throw DataError("separable comparison needs at least 60 rows");
  data::SyntheticSpec spec;
  spec.generator = data::Generator::separable_classification;
  spec.n = options.n;
  spec.d = options.d;
  spec.num_classes = 2;
  spec.seed = options.seed;
  spec.boundary = data::Boundary::radial;
  spec.margin = options.margin;
  const data::SyntheticData sample = data::generate_synthetic(spec);
  if (!sample.labeler) throw DataError("separable comparison needs a separable spec");
  const data::Dataset& ds = sample.dataset;

  const std::size_t third = options.n / 3;
  const data::Dataset train = ds.subset(iota_rows(0, third));
  const data::Dataset cal = ds.subset(iota_rows(third, 2 * third));
  const data::Dataset test = ds.subset(iota_rows(2 * third, options.n));

  // Hard predictions of f on an arbitrary matrix.
  std::optional<models::Predictor> f;
  if (!options.perfect_predictor) {
    f = models::fit(models::make_spec(models::Family::softmax_linear, derive_seed(options.seed, {"separable", "f"})),
                    train.features, train.targets, 2)
            .predictor;
  }
  auto predicted = [&](const Eigen::MatrixXd& x) -> Eigen::VectorXi {
    if (f) return f->predict(x).cast<int>();
    const std::vector<int> labels = sample.labeler->label_all(x);
    return Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  };

  const Eigen::MatrixXd cal_losses = calib::zero_one_per_class(predicted(cal.features), 2);
  const Eigen::MatrixXd test_losses = calib::zero_one_per_class(predicted(test.features), 2);
  const Eigen::VectorXd z_cal = calib::realized_losses(cal_losses, cal.targets);
  const Eigen::VectorXd z_test = calib::realized_losses(test_losses, test.targets);

  const models::Predictor p =
      models::fit(models::make_spec(models::Family::softmax_mlp2, derive_seed(options.seed, {"separable", "p"})),
                  cal.features, cal.targets, 2)
          .predictor;
  const Eigen::VectorXd g_ca = calib::plugin_risk(test_losses, p.predict_proba(test.features));

  const models::Predictor reg =
      models::fit(models::make_spec(models::Family::mlp2, derive_seed(options.seed, {"separable", "g"})), cal.features,
                  z_cal)
          .predictor;
  const Eigen::VectorXd g_reg = reg.predict(test.features).cwiseMax(0.0);

  SeparableResult out;
  out.n_test = static_cast<std::size_t>(z_test.size());
  for (Eigen::Index i = 0; i < z_test.size(); ++i) {
    out.calibration_risk += calib::meta_loss(options.meta, g_ca[i], z_test[i]);
    out.regression_risk += calib::meta_loss(options.meta, g_reg[i], z_test[i]);
  }
  out.calibration_risk /= static_cast<double>(out.n_test);
  out.regression_risk /= static_cast<double>(out.n_test);
  out.predictor_error = z_test.mean();
  return out;
}

std::vector<TheoryCheckResult> run_theory_suite(const SuiteOptions& options) {
  std::vector<TheoryCheckResult> out;
  out.push_back(brier_identity_check(options.brier_n, options.seed, BrierVariant::miscalibrated));
  out.push_back(brier_identity_check(options.brier_n, options.seed, BrierVariant::truth));
  out.push_back(brier_identity_check(options.brier_n, options.seed, BrierVariant::negative_control));
  for (const auto kind : {calib::LossKind::zero_one, calib::LossKind::cross_entropy, calib::LossKind::brier}) {
    out.push_back(realizability_exactness(options.realizability_n, options.seed, kind, false));
  }
  out.push_back(realizability_exactness(options.realizability_n, options.seed, calib::LossKind::zero_one, true));

  if (options.separable_seeds > 0) {
    std::size_t losses = 0;
    for (std::size_t s = 0; s < options.separable_seeds; ++s) {
      SeparableOptions so;
      so.seed = options.seed + s;
      const SeparableResult r = separable_comparison(so);
      if (r.calibration_risk > r.regression_risk) ++losses;
    }
    TheoryCheckResult r;
    r.name = "separable-calibration-wins";
    // Seeds on which the plug-in estimate lost; at most 20% may.
    r.statistic = static_cast<double>(losses);
    r.tolerance = std::floor(0.2 * static_cast<double>(options.separable_seeds));
    r.passed = r.statistic <= r.tolerance;
    r.n = options.separable_seeds;
    r.seed = options.seed;
    out.push_back(r);
  }
  return out;
}

}  // namespace riskcal::verify

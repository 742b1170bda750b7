#include "riskcal/data/synthetic.hpp"

#include "riskcal/errors.hpp"
#include "riskcal/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace riskcal::data {
namespace {

Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

Eigen::MatrixXd logit_weights(const SyntheticSpec& spec, Rng& rng) {
  const int K = spec.num_classes;
  const int d = spec.d;
  if (spec.coefficients.empty()) return gaussian_matrix(rng, K, d, spec.coefficient_scale);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(K, d);
  const auto given = static_cast<int>(spec.coefficients.size());
  if (given == K * d) {
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < d; ++j) w(k, j) = spec.coefficients[static_cast<std::size_t>(k * d + j)];
    }
  } else if (K == 2 && given == d) {
    for (int j = 0; j < d; ++j) w(1, j) = spec.coefficients[static_cast<std::size_t>(j)];
  } else {
    throw DataError(fmt::format("expected {} (or {} for K=2) coefficients, got {}", K * d, d, given));
  }
  return w;
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.n == 0) throw DataError("synthetic spec: n must be positive");
  if (spec.d <= 0) throw DataError("synthetic spec: d must be positive");
  if (spec.generator != Generator::regression_with_noise && spec.num_classes < 2) {
    throw DataError("synthetic spec: classification needs K >= 2");
  }
  if (spec.generator == Generator::separable_classification) {
    if (spec.margin < 0) throw DataError("synthetic spec: margin must be nonnegative");
    if (spec.boundary == Boundary::radial && spec.num_classes != 2) {
      throw DataError("synthetic spec: radial boundary supports K = 2 only");
    }
  }
  if (spec.noise_scale < 0) throw DataError("synthetic spec: noise_scale must be nonnegative");
}

Dataset empty_dataset(const SyntheticSpec& spec, const char* name, TaskKind kind) {
  Dataset ds;
  ds.name = name;
  ds.kind = kind;
  ds.num_classes = kind == TaskKind::classification ? spec.num_classes : 0;
  ds.features.resize(static_cast<Eigen::Index>(spec.n), spec.d);
  ds.targets.resize(static_cast<Eigen::Index>(spec.n));
  for (int j = 0; j < spec.d; ++j) ds.feature_names.push_back(fmt::format("x{}", j));
  ds.target_name = "y";
  return ds;
}

int draw_category(Rng& rng, const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size() - 1);
}

SyntheticData known_density(const SyntheticSpec& spec) {
  Rng weights_rng = Rng::stream(spec.seed, "synthetic/weights");
  Rng x_rng = Rng::stream(spec.seed, "synthetic/features");
  Rng y_rng = Rng::stream(spec.seed, "synthetic/labels");

  const Eigen::MatrixXd w = logit_weights(spec, weights_rng);
  Eigen::MatrixXd v;
  if (spec.quadratic) v = gaussian_matrix(weights_rng, spec.num_classes, spec.d, spec.coefficient_scale);

  SyntheticData out;
  out.dataset = empty_dataset(spec, "known-density", TaskKind::classification);
  auto& x = out.dataset.features;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = x_rng.normal();
  }
  Eigen::MatrixXd logits = x * w.transpose();
  if (spec.quadratic) logits += x.array().square().matrix() * v.transpose();
  Eigen::MatrixXd probs = softmax_rows(logits);
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.dataset.targets[i] = draw_category(y_rng, probs.row(i));
  out.true_probabilities = std::move(probs);
  return out;
}

double wilson_hilferty_chi_median(int d) {
  const double k = d;
  const double t = 1.0 - 2.0 / (9.0 * k);
  return std::sqrt(k * t * t * t);
}

SyntheticData separable(const SyntheticSpec& spec) {
  Rng weights_rng = Rng::stream(spec.seed, "synthetic/weights");
  Rng x_rng = Rng::stream(spec.seed, "synthetic/features");

  SeparableLabeler h;
  h.boundary = spec.boundary;
  if (spec.boundary == Boundary::linear) {
    h.weights = logit_weights(spec, weights_rng);
  } else {
    h.radius = wilson_hilferty_chi_median(spec.d);
  }

  // Distance of x from the boundary that separates its label from the runner-up.
  auto boundary_distance = [&](const Eigen::RowVectorXd& row) {
    if (h.boundary == Boundary::radial) return std::abs(row.norm() - h.radius);
    const Eigen::VectorXd scores = h.weights * row.transpose();
    Eigen::Index best = 0;
    scores.maxCoeff(&best);
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < scores.size(); ++k) {
      if (k == best) continue;
      const double gap = scores[best] - scores[k];
      const double norm = (h.weights.row(best) - h.weights.row(k)).norm();
      dist = std::min(dist, norm > 0 ? gap / norm : std::numeric_limits<double>::infinity());
    }
    return dist;
  };

  SyntheticData out;
  out.dataset = empty_dataset(spec, "separable", TaskKind::classification);
  auto& x = out.dataset.features;
  Eigen::RowVectorXd row(spec.d);
  std::size_t attempts = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    do {
      if (++attempts > 1000 * spec.n + 100000) {
        throw DataError("separable generator: margin too large, rejection sampling does not terminate");
      }
      for (int j = 0; j < spec.d; ++j) row[j] = x_rng.normal();
    } while (boundary_distance(row) < spec.margin);
    x.row(i) = row;
    out.dataset.targets[i] = h.label(row);
  }
  out.labeler = std::move(h);
  return out;
}

SyntheticData regression(const SyntheticSpec& spec) {
  Rng weights_rng = Rng::stream(spec.seed, "synthetic/weights");
  Rng x_rng = Rng::stream(spec.seed, "synthetic/features");
  Rng noise_rng = Rng::stream(spec.seed, "synthetic/noise");

  Eigen::VectorXd beta(spec.d);
  if (spec.coefficients.empty()) {
    for (int j = 0; j < spec.d; ++j) beta[j] = spec.coefficient_scale * weights_rng.normal();
  } else if (static_cast<int>(spec.coefficients.size()) == spec.d) {
    for (int j = 0; j < spec.d; ++j) beta[j] = spec.coefficients[static_cast<std::size_t>(j)];
  } else {
    throw DataError(fmt::format("expected {} coefficients, got {}", spec.d, spec.coefficients.size()));
  }

  SyntheticData out;
  out.dataset = empty_dataset(spec, "regression", TaskKind::regression);
  auto& x = out.dataset.features;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = x_rng.normal();
  }
  Eigen::VectorXd f = x * beta;
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.dataset.targets[i] = f[i] + spec.noise_scale * noise_rng.normal();
  out.true_regression = std::move(f);
  out.noise_scale = spec.noise_scale;
  return out;
}

}  // namespace

int SeparableLabeler::label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (boundary == Boundary::radial) return x.norm() < radius ? 1 : 0;
  const Eigen::VectorXd scores = weights * x.transpose();
  Eigen::Index best = 0;
  scores.maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<int> SeparableLabeler::label_all(const Eigen::MatrixXd& features) const {
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[static_cast<std::size_t>(i)] = label(features.row(i));
  return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  switch (spec.generator) {
    case Generator::known_density_classification:
      return known_density(spec);
    case Generator::separable_classification:
      return separable(spec);
    case Generator::regression_with_noise:
      return regression(spec);
  }
  throw DataError("unknown generator");
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    out.row(i) = e / e.sum();
  }
  return out;
}

}  // namespace riskcal::data

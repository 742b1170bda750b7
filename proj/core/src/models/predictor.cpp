#include "riskcal/models/predictor.hpp"

#include "riskcal/data/synthetic.hpp"
#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace riskcal::models {

std::string to_string(Family family) {
  switch (family) {
    case Family::lr: return "LR";
    case Family::rf: return "RF";
    case Family::mlp: return "MLP";
    case Family::mlp2: return "MLP2";
    case Family::softmax_linear: return "SoftmaxLinear";
    case Family::softmax_mlp: return "SoftmaxMLP";
    case Family::softmax_mlp2: return "SoftmaxMLP2";
  }
  return "?";
}

Family parse_family(const std::string& text) {
  std::string key;
  for (const char c : text) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const Family f : {Family::lr, Family::rf, Family::mlp, Family::mlp2, Family::softmax_linear, Family::softmax_mlp,
                         Family::softmax_mlp2}) {
    std::string name = to_string(f);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == key) return f;
  }
  throw ConfigError(fmt::format("unknown model family '{}'", text));
}

Head head_of(Family family) {
  switch (family) {
    case Family::softmax_linear:
    case Family::softmax_mlp:
    case Family::softmax_mlp2:
      return Head::classification;
    default:
      return Head::regression;
  }
}

std::vector<int> ModelSpec::hidden_widths() const {
  switch (family) {
    case Family::mlp:
    case Family::softmax_mlp:
      return {64};
    case Family::mlp2:
    case Family::softmax_mlp2:
      return {64, 64};
    default:
      return {};
  }
}

namespace {

bool is_network(Family f) { return f != Family::lr && f != Family::rf; }

int resolve_classes(const Eigen::VectorXd& y, int num_classes) {
  int k = num_classes;
  if (k <= 0) k = y.size() > 0 ? static_cast<int>(y.maxCoeff()) + 1 : 0;
  if (k < 2) k = 2;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != std::floor(y[i]) || y[i] < 0 || y[i] >= k) {
      throw ModelError(fmt::format("classification target {} at row {} outside [0, {})", y[i], i, k));
    }
  }
  return k;
}

}  // namespace

Predictor::Predictor(ModelSpec spec, Model model, std::optional<data::Standardizer> scaler, int input_dim,
                     int num_classes)
    : spec_(std::move(spec)),
      model_(std::move(model)),
      scaler_(std::move(scaler)),
      input_dim_(input_dim),
      num_classes_(num_classes),
      fitted_(true) {}

void Predictor::check_input(const Eigen::MatrixXd& x) const {
  if (!fitted_) throw ModelError("predictor is not fitted");
  if (x.cols() != input_dim_) {
    throw ModelError(fmt::format("{} expects {} input columns, got {}", to_string(spec_.family), input_dim_, x.cols()));
  }
}

Eigen::MatrixXd Predictor::scaled(const Eigen::MatrixXd& x) const { return scaler_ ? scaler_->apply(x) : x; }

const Mlp& Predictor::network(const char* op) const {
  const auto* net = std::get_if<Mlp>(&model_);
  if (!net) throw ModelError(fmt::format("{} is not available for {}", op, to_string(spec_.family)));
  return *net;
}

Eigen::VectorXd Predictor::predict(const Eigen::MatrixXd& x) const {
  check_input(x);
  if (head() == Head::classification) return argmax_rows(predict_logits(x)).cast<double>();
  if (const auto* lin = std::get_if<LinearModel>(&model_)) return lin->predict(x);
  if (const auto* rf = std::get_if<RandomForest>(&model_)) return rf->predict(x);
  return std::get<Mlp>(model_).outputs(scaled(x)).col(0);
}

Eigen::MatrixXd Predictor::predict_logits(const Eigen::MatrixXd& x) const {
  check_input(x);
  if (head() != Head::classification) throw ModelError("predict_logits needs a classification head");
  return network("predict_logits").outputs(scaled(x));
}

Eigen::MatrixXd Predictor::predict_proba(const Eigen::MatrixXd& x) const {
  return data::softmax_rows(predict_logits(x));
}

Eigen::MatrixXd Predictor::extract_representation(const Eigen::MatrixXd& x) const {
  check_input(x);
  return network("extract_representation").representation(scaled(x));
}

const DenseLayer& Predictor::final_layer() const {
  if (!fitted_) throw ModelError("predictor is not fitted");
  return network("final_layer").layers().back();
}

Eigen::MatrixXd Predictor::tree_predictions(const Eigen::MatrixXd& x) const {
  check_input(x);
  const auto* rf = std::get_if<RandomForest>(&model_);
  if (!rf) throw ModelError("tree_predictions needs a random forest");
  return rf->tree_predictions(x);
}

FitResult fit(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int num_classes) {
  if (x.rows() == 0) throw ModelError("fit: empty training set");
  if (x.rows() != y.size()) throw ModelError(fmt::format("fit: {} rows but {} targets", x.rows(), y.size()));
  if (!x.allFinite() || !y.allFinite()) throw ModelError("fit: non-finite training data");
  const int d = static_cast<int>(x.cols());

  if (spec.family == Family::lr) {
    return {Predictor(spec, LinearModel::fit(x, y), std::nullopt, d, 0), TrainReport{}};
  }
  if (spec.family == Family::rf) {
    RandomForest forest = RandomForest::fit(x, y, spec.forest, spec.seed);
    return {Predictor(spec, std::move(forest), std::nullopt, d, 0), TrainReport{}};
  }

  const bool classify = spec.head() == Head::classification;
  const int k = classify ? resolve_classes(y, num_classes) : 0;
  data::Standardizer scaler = data::Standardizer::fit(x);
  Rng init_rng = Rng::stream(spec.seed, "mlp/init");
  Rng shuffle_rng = Rng::stream(spec.seed, "mlp/shuffle");
  Mlp net = Mlp::initialize(d, spec.hidden_widths(), classify ? k : 1, spec.head(), init_rng);
  if (!classify && (y.array() == y[0]).all()) {
    // A constant target is fit exactly by the output bias alone.
    auto layers = net.layers();
    layers.back().weights.setZero();
    layers.back().bias.setConstant(y[0]);
    return {Predictor(spec, Mlp(std::move(layers), spec.head()), std::move(scaler), d, k), TrainReport{0.0, 0, true}};
  }
  const TrainReport report = net.train(scaler.apply(x), y, spec.adam, shuffle_rng);
  return {Predictor(spec, std::move(net), std::move(scaler), d, k), report};
}

namespace {

constexpr double kGradientFloor = 1e-6;

// Which hidden units are active, row by row.
std::vector<bool> relu_pattern(const Mlp& net, const Eigen::MatrixXd& x) {
  std::vector<bool> active;
  Eigen::MatrixXd h = x;
  for (int l = 0; l < net.hidden_layer_count(); ++l) {
    const auto& layer = net.layers()[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd z = (h * layer.weights.transpose()).rowwise() + layer.bias.transpose();
    for (Eigen::Index i = 0; i < z.size(); ++i) active.push_back(z.data()[i] > 0.0);
    h = z.cwiseMax(0.0);
  }
  return active;
}

}  // namespace

double gradient_check(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double step,
                      int num_classes) {
  if (!is_network(spec.family)) throw ModelError("gradient_check needs a network family");
  const bool classify = spec.head() == Head::classification;
  const int k = classify ? resolve_classes(y, num_classes) : 1;
  Rng init_rng = Rng::stream(spec.seed, "mlp/init");
  Mlp net = Mlp::initialize(static_cast<int>(x.cols()), spec.hidden_widths(), k, spec.head(), init_rng);

  Eigen::VectorXd analytic;
  net.loss_and_gradient(x, y, &analytic);
  const Eigen::VectorXd theta = net.parameters();
  const auto pattern = relu_pattern(net, x);
  double worst = 0.0;
  Eigen::VectorXd probe = theta;
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    probe[p] = theta[p] + step;
    net.set_parameters(probe);
    const double up = net.loss(x, y);
    const bool kink_up = relu_pattern(net, x) != pattern;
    probe[p] = theta[p] - step;
    net.set_parameters(probe);
    const double down = net.loss(x, y);
    const bool kink_down = relu_pattern(net, x) != pattern;
    probe[p] = theta[p];
    // The central difference is meaningless across a ReLU kink.
    if (kink_up || kink_down) continue;
    const double central = (up - down) / (2.0 * step);
    const double scale = std::max(std::abs(analytic[p]) + std::abs(central), kGradientFloor);
    worst = std::max(worst, std::abs(analytic[p] - central) / scale);
  }
  return worst;
}

Eigen::VectorXi argmax_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXi out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < m.cols(); ++k) {
      if (m(i, k) > m(i, best)) best = k;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace riskcal::models

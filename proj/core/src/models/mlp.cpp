#include "riskcal/models/mlp.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace riskcal::models {
namespace {

struct Workspace {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> post;  // post[0] is the input batch
};

struct LayerGrad {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

void forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, Workspace& ws) {
  ws.pre.resize(layers.size());
  ws.post.resize(layers.size() + 1);
  ws.post[0] = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    ws.pre[l] = (ws.post[l] * layers[l].weights.transpose()).rowwise() + layers[l].bias.transpose();
    if (l + 1 < layers.size()) {
      ws.post[l + 1] = ws.pre[l].cwiseMax(0.0);
    } else {
      ws.post[l + 1] = ws.pre[l];
    }
  }
}

int class_index(double label, Eigen::Index k) {
  const auto c = static_cast<Eigen::Index>(label);
  if (static_cast<double>(c) != label || c < 0 || c >= k) {
    throw ModelError(fmt::format("class label {} outside [0, {})", label, k));
  }
  return static_cast<int>(c);
}

// Loss of the output block plus d(loss)/d(output), both averaged over rows.
double output_loss(Head head, const Eigen::MatrixXd& out, const Eigen::VectorXd& y, Eigen::MatrixXd* delta) {
  const auto n = static_cast<double>(out.rows());
  if (head == Head::regression) {
    const Eigen::VectorXd r = out.col(0) - y;
    if (delta) *delta = r / n;
    return 0.5 * r.squaredNorm() / n;
  }
  const Eigen::VectorXd lse = log_sum_exp_rows(out);
  double total = 0.0;
  if (delta) {
    *delta = (out.colwise() - lse).array().exp().matrix();
  }
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const int c = class_index(y[i], out.cols());
    total += lse[i] - out(i, c);
    if (delta) (*delta)(i, c) -= 1.0;
  }
  if (delta) *delta /= n;
  return total / n;
}

double backward(const std::vector<DenseLayer>& layers, Head head, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                Workspace& ws, std::vector<LayerGrad>& grads) {
  forward(layers, x, ws);
  Eigen::MatrixXd delta;
  const double loss = output_loss(head, ws.post.back(), y, &delta);
  grads.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads[l].weights = delta.transpose() * ws.post[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * layers[l].weights;
      delta = upstream.cwiseProduct((ws.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

}  // namespace

Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out[i] = m + std::log((logits.row(i).array() - m).exp().sum());
  }
  return out;
}

Mlp::Mlp(std::vector<DenseLayer> layers, Head head) : layers_(std::move(layers)), head_(head) {
  if (layers_.empty()) throw ModelError("network needs at least an output layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weights.rows()) throw ModelError("layer bias/weight shape mismatch");
    if (l > 0 && layers_[l].weights.cols() != layers_[l - 1].weights.rows()) {
      throw ModelError("consecutive layer shapes do not chain");
    }
  }
  if (head_ == Head::regression && output_dim() != 1) throw ModelError("regression head must have one output");
}

Mlp Mlp::initialize(int input_dim, const std::vector<int>& hidden, int outputs, Head head, Rng& rng) {
  std::vector<DenseLayer> layers;
  int fan_in = input_dim;
  std::vector<int> widths = hidden;
  widths.push_back(outputs);
  for (const int fan_out : widths) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return Mlp(std::move(layers), head);
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols()); }
int Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows()); }

Eigen::MatrixXd Mlp::outputs(const Eigen::MatrixXd& x) const {
  Workspace ws;
  forward(layers_, x, ws);
  return ws.post.back();
}

Eigen::MatrixXd Mlp::representation(const Eigen::MatrixXd& x) const {
  if (hidden_layer_count() == 0) throw ModelError("network has no hidden layer to extract");
  Workspace ws;
  forward(layers_, x, ws);
  return ws.post[layers_.size() - 1];
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd* gradient) const {
  if (x.rows() != y.size()) throw ModelError("loss: row/target count mismatch");
  Workspace ws;
  if (!gradient) {
    forward(layers_, x, ws);
    return output_loss(head_, ws.post.back(), y, nullptr);
  }
  std::vector<LayerGrad> grads;
  const double loss = backward(layers_, head_, x, y, ws, grads);
  gradient->resize(parameter_count());
  Eigen::Index at = 0;
  for (const auto& g : grads) {
    gradient->segment(at, g.weights.size()) = g.weights.reshaped();
    at += g.weights.size();
    gradient->segment(at, g.bias.size()) = g.bias;
    at += g.bias.size();
  }
  return loss;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index total = 0;
  for (const auto& layer : layers_) total += layer.weights.size() + layer.bias.size();
  return total;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (const auto& layer : layers_) {
    flat.segment(at, layer.weights.size()) = layer.weights.reshaped();
    at += layer.weights.size();
    flat.segment(at, layer.bias.size()) = layer.bias;
    at += layer.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw ModelError("parameter vector has the wrong length");
  Eigen::Index at = 0;
  for (auto& layer : layers_) {
    layer.weights.reshaped() = flat.segment(at, layer.weights.size());
    at += layer.weights.size();
    layer.bias = flat.segment(at, layer.bias.size());
    at += layer.bias.size();
  }
}

TrainReport Mlp::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const AdamOptions& options, Rng& rng) {
  if (x.rows() == 0) throw ModelError("network training: empty data");
  if (x.cols() != input_dim()) {
    throw ModelError(fmt::format("network expects {} inputs, data has {}", input_dim(), x.cols()));
  }
  if (options.batch_size <= 0 || options.max_epochs < 0) throw ModelError("invalid Adam options");

  const auto n = static_cast<std::size_t>(x.rows());
  const auto batch = std::min(n, static_cast<std::size_t>(options.batch_size));
  std::vector<LayerGrad> m(layers_.size());
  std::vector<LayerGrad> v(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    m[l].weights = Eigen::MatrixXd::Zero(layers_[l].weights.rows(), layers_[l].weights.cols());
    m[l].bias = Eigen::VectorXd::Zero(layers_[l].bias.size());
    v[l] = m[l];
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Workspace ws;
  std::vector<LayerGrad> grads;
  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  double beta1_t = 1.0;
  double beta2_t = 1.0;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;

  TrainReport report;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto rows = static_cast<Eigen::Index>(stop - start);
      xb.resize(rows, x.cols());
      yb.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const auto src = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]);
        xb.row(i) = x.row(src);
        yb[i] = y[src];
      }
      const double loss = backward(layers_, head_, xb, yb, ws, grads);
      epoch_loss += loss * static_cast<double>(rows);

      beta1_t *= options.beta1;
      beta2_t *= options.beta2;
      const double step = options.learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        m[l].weights = options.beta1 * m[l].weights + (1.0 - options.beta1) * grads[l].weights;
        v[l].weights = options.beta2 * v[l].weights + (1.0 - options.beta2) * grads[l].weights.cwiseAbs2();
        layers_[l].weights.array() -= step * m[l].weights.array() / (v[l].weights.array().sqrt() + options.epsilon);
        m[l].bias = options.beta1 * m[l].bias + (1.0 - options.beta1) * grads[l].bias;
        v[l].bias = options.beta2 * v[l].bias + (1.0 - options.beta2) * grads[l].bias.cwiseAbs2();
        layers_[l].bias.array() -= step * m[l].bias.array() / (v[l].bias.array().sqrt() + options.epsilon);
      }
    }
    epoch_loss /= static_cast<double>(n);
    report.final_loss = epoch_loss;
    report.epochs = epoch + 1;
    if (!std::isfinite(epoch_loss)) throw ModelError("network training diverged (non-finite loss)");

    if (epoch_loss > best - options.tolerance) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::min(best, epoch_loss);
    if (stale >= options.patience) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace riskcal::models

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace riskcal::models {

enum class Family { lr, rf, mlp, mlp2, softmax_linear, softmax_mlp, softmax_mlp2 };
enum class Head { regression, classification };

std::string to_string(Family family);
/// Accepts the display names used in configs: LR, RF, MLP, MLP2,
/// SoftmaxLinear, SoftmaxMLP, SoftmaxMLP2 (case-insensitive).
Family parse_family(const std::string& text);

Head head_of(Family family);

/// Minibatch Adam settings. "max_epochs" counts full passes over the data.
struct AdamOptions {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 256;
  int max_epochs = 800;
  double tolerance = 1e-6;
  int patience = 10;
};

struct ForestOptions {
  int num_trees = 100;
  int min_samples_split = 2;
};

struct ModelSpec {
  Family family = Family::lr;
  std::uint64_t seed = 0;
  AdamOptions adam;
  ForestOptions forest;

  [[nodiscard]] Head head() const { return head_of(family); }
  /// Hidden layer widths; empty for LR, RF and SoftmaxLinear.
  [[nodiscard]] std::vector<int> hidden_widths() const;
  [[nodiscard]] bool has_hidden_layers() const { return !hidden_widths().empty(); }
};

inline ModelSpec make_spec(Family family, std::uint64_t seed = 0) {
  ModelSpec spec;
  spec.family = family;
  spec.seed = seed;
  return spec;
}

}  // namespace riskcal::models

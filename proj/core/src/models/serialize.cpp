#include "riskcal/models/serialize.hpp"

#include "riskcal/errors.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <sodium.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace riskcal::models {
namespace {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "array encoding assumes a little-endian host");

json encode_matrix(const Eigen::MatrixXd& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", encode_doubles(m.data(), static_cast<std::size_t>(m.size()))}};
}

Eigen::MatrixXd decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const std::vector<double> values = decode_doubles(j.at("data").get<std::string>());
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw ModelError("serialized matrix has the wrong size");
  Eigen::MatrixXd m(rows, cols);
  if (!values.empty()) std::memcpy(m.data(), values.data(), values.size() * sizeof(double));
  return m;
}

json encode_vector(const Eigen::VectorXd& v) { return encode_doubles(v.data(), static_cast<std::size_t>(v.size())); }

Eigen::VectorXd decode_vector(const json& j) {
  const std::vector<double> values = decode_doubles(j.get<std::string>());
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json encode_model(const Predictor::Model& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    return json{{"type", "linear"}, {"coefficients", encode_vector(lin->coefficients())}, {"intercept", lin->intercept()}};
  }
  if (const auto* rf = std::get_if<RandomForest>(&model)) {
    json trees = json::array();
    for (const auto& tree : rf->trees()) {
      std::vector<int> feature;
      std::vector<int> left;
      std::vector<int> right;
      std::vector<double> threshold;
      std::vector<double> value;
      for (const auto& node : tree.nodes()) {
        feature.push_back(node.feature);
        left.push_back(node.left);
        right.push_back(node.right);
        threshold.push_back(node.threshold);
        value.push_back(node.value);
      }
      trees.push_back(json{{"feature", feature},
                           {"left", left},
                           {"right", right},
                           {"threshold", encode_doubles(threshold.data(), threshold.size())},
                           {"value", encode_doubles(value.data(), value.size())}});
    }
    return json{{"type", "forest"}, {"trees", trees}};
  }
  const auto& net = std::get<Mlp>(model);
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back(json{{"weights", encode_matrix(layer.weights)}, {"bias", encode_vector(layer.bias)}});
  }
  return json{{"type", "network"}, {"layers", layers}};
}

Predictor::Model decode_model(const json& j, Head head) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") return LinearModel(decode_vector(j.at("coefficients")), j.at("intercept").get<double>());
  if (type == "forest") {
    std::vector<RegressionTree> trees;
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto threshold = decode_doubles(t.at("threshold").get<std::string>());
      const auto value = decode_doubles(t.at("value").get<std::string>());
      const std::size_t count = feature.size();
      if (left.size() != count || right.size() != count || threshold.size() != count || value.size() != count) {
        throw ModelError("serialized tree arrays differ in length");
      }
      std::vector<TreeNode> nodes(count);
      for (std::size_t i = 0; i < count; ++i) nodes[i] = TreeNode{feature[i], threshold[i], left[i], right[i], value[i]};
      trees.emplace_back(std::move(nodes));
    }
    return RandomForest(std::move(trees));
  }
  if (type == "network") {
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) layers.push_back(DenseLayer{decode_matrix(l.at("weights")), decode_vector(l.at("bias"))});
    return Mlp(std::move(layers), head);
  }
  throw ModelError(fmt::format("unknown serialized model type '{}'", type));
}

}  // namespace

std::string encode_doubles(const double* values, std::size_t count) {
  if (sodium_init() < 0) throw ModelError("libsodium initialization failed");
  const std::size_t bytes = count * sizeof(double);
  std::string out(sodium_base64_encoded_len(bytes, sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), reinterpret_cast<const unsigned char*>(values), bytes,
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::vector<double> decode_doubles(const std::string& text) {
  if (sodium_init() < 0) throw ModelError("libsodium initialization failed");
  std::vector<unsigned char> raw(text.size() / 4 * 3 + 3);
  std::size_t written = 0;
  if (sodium_base642bin(raw.data(), raw.size(), text.data(), text.size(), nullptr, &written, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw ModelError("malformed base64 array");
  }
  if (written % sizeof(double) != 0) throw ModelError("base64 array is not a whole number of float64 values");
  std::vector<double> out(written / sizeof(double));
  if (written > 0) std::memcpy(out.data(), raw.data(), written);
  return out;
}

std::string serialize_predictor(const Predictor& predictor) {
  if (!predictor.fitted()) throw ModelError("cannot serialize an unfitted predictor");
  const ModelSpec& spec = predictor.spec();
  json doc;
  doc["format"] = "riskcal-predictor";
  doc["format_version"] = kFormatVersion;
  doc["byte_order"] = "little-endian";
  doc["family"] = to_string(spec.family);
  doc["seed"] = spec.seed;
  doc["input_dim"] = predictor.input_dim();
  doc["num_classes"] = predictor.num_classes();
  doc["adam"] = json{{"learning_rate", spec.adam.learning_rate}, {"beta1", spec.adam.beta1},
                     {"beta2", spec.adam.beta2},                 {"epsilon", spec.adam.epsilon},
                     {"batch_size", spec.adam.batch_size},       {"max_epochs", spec.adam.max_epochs},
                     {"tolerance", spec.adam.tolerance},         {"patience", spec.adam.patience}};
  doc["forest"] = json{{"num_trees", spec.forest.num_trees}, {"min_samples_split", spec.forest.min_samples_split}};
  if (const auto& s = predictor.scaler()) {
    doc["standardizer"] = json{{"means", encode_vector(s->means())}, {"scales", encode_vector(s->scales())}};
  }
  doc["model"] = encode_model(predictor.model());
  return doc.dump(1);
}

Predictor deserialize_predictor(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "riskcal-predictor") throw ModelError("not a predictor document");
    const int version = doc.at("format_version").get<int>();
    if (version != kFormatVersion) throw ModelError(fmt::format("unsupported predictor format version {}", version));
    if (doc.at("byte_order").get<std::string>() != "little-endian") throw ModelError("unsupported byte order");
    ModelSpec spec;
    spec.family = parse_family(doc.at("family").get<std::string>());
    spec.seed = doc.at("seed").get<std::uint64_t>();
    const json& adam = doc.at("adam");
    spec.adam.learning_rate = adam.at("learning_rate").get<double>();
    spec.adam.beta1 = adam.at("beta1").get<double>();
    spec.adam.beta2 = adam.at("beta2").get<double>();
    spec.adam.epsilon = adam.at("epsilon").get<double>();
    spec.adam.batch_size = adam.at("batch_size").get<int>();
    spec.adam.max_epochs = adam.at("max_epochs").get<int>();
    spec.adam.tolerance = adam.at("tolerance").get<double>();
    spec.adam.patience = adam.at("patience").get<int>();
    spec.forest.num_trees = doc.at("forest").at("num_trees").get<int>();
    spec.forest.min_samples_split = doc.at("forest").at("min_samples_split").get<int>();
    std::optional<data::Standardizer> scaler;
    if (doc.contains("standardizer")) {
      scaler = data::Standardizer(decode_vector(doc["standardizer"].at("means")),
                                  decode_vector(doc["standardizer"].at("scales")));
    }
    Predictor::Model model = decode_model(doc.at("model"), spec.head());
    return Predictor(spec, std::move(model), std::move(scaler), doc.at("input_dim").get<int>(),
                     doc.at("num_classes").get<int>());
  } catch (const json::exception& e) {
    throw ModelError(fmt::format("malformed predictor document: {}", e.what()));
  }
}

void save_predictor(const std::filesystem::path& path, const Predictor& predictor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError(fmt::format("cannot write '{}'", path.string()));
  out << serialize_predictor(predictor);
}

Predictor load_predictor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_predictor(buffer.str());
}

}  // namespace riskcal::models

#include "riskcal/calib/serialize.hpp"

#include "riskcal/errors.hpp"
#include "riskcal/models/serialize.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace riskcal::calib {
namespace {

using json = nlohmann::json;

json encode_vector(const Eigen::VectorXd& v) {
  return models::encode_doubles(v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd decode_vector(const json& j) {
  const auto values = models::decode_doubles(j.get<std::string>());
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Strategy parse_strategy(const std::string& text) {
  for (const auto s : {Strategy::regression, Strategy::plugin, Strategy::plugin_temperature}) {
    if (to_string(s) == text) return s;
  }
  throw ModelError(fmt::format("unknown calibrator strategy '{}'", text));
}

}  // namespace

std::string serialize_calibrator(const RiskCalibrator& calibrator) {
  json doc;
  doc["format"] = "riskcal-calibrator";
  doc["format_version"] = models::kFormatVersion;
  doc["strategy"] = to_string(calibrator.strategy());
  doc["loss"] = to_string(calibrator.loss().kind);
  doc["clamp_eps"] = calibrator.loss().clamp_eps;
  doc["temperature"] = calibrator.temperature();
  doc["input_mode"] = calibrator.input_mode() == InputMode::raw ? "raw" : "representation";
  doc["backend"] = json::parse(models::serialize_predictor(calibrator.backend()));
  if (const auto& s = calibrator.representation_scaler()) {
    doc["representation_scaler"] = json{{"means", encode_vector(s->means())}, {"scales", encode_vector(s->scales())}};
  }
  if (const auto& src = calibrator.representation_source()) {
    doc["representation_source"] = json::parse(models::serialize_predictor(*src));
  }
  return doc.dump(1);
}

RiskCalibrator deserialize_calibrator(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "riskcal-calibrator") throw ModelError("not a calibrator document");
    if (doc.at("format_version").get<int>() != models::kFormatVersion) {
      throw ModelError("unsupported calibrator format version");
    }
    LossFn loss;
    loss.kind = parse_loss(doc.at("loss").get<std::string>());
    loss.clamp_eps = doc.at("clamp_eps").get<double>();
    const std::string mode = doc.at("input_mode").get<std::string>();
    if (mode != "raw" && mode != "representation") throw ModelError("unknown calibrator input mode");
    std::optional<data::Standardizer> scaler;
    if (doc.contains("representation_scaler")) {
      const json& s = doc.at("representation_scaler");
      scaler = data::Standardizer(decode_vector(s.at("means")), decode_vector(s.at("scales")));
    }
    std::optional<models::Predictor> source;
    if (doc.contains("representation_source")) {
      source = models::deserialize_predictor(doc.at("representation_source").dump());
    }
    return {parse_strategy(doc.at("strategy").get<std::string>()),
            loss,
            models::deserialize_predictor(doc.at("backend").dump()),
            doc.at("temperature").get<double>(),
            mode == "raw" ? InputMode::raw : InputMode::representation,
            std::move(scaler),
            std::move(source)};
  } catch (const json::exception& e) {
    throw ModelError(fmt::format("malformed calibrator document: {}", e.what()));
  } catch (const ConfigError& e) {
    throw ModelError(fmt::format("malformed calibrator document: {}", e.what()));
  }
}

void save_calibrator(const std::filesystem::path& path, const RiskCalibrator& calibrator) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError(fmt::format("cannot write '{}'", path.string()));
  out << serialize_calibrator(calibrator);
}

RiskCalibrator load_calibrator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize_calibrator(text.str());
}

}  // namespace riskcal::calib

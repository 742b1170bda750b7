#include "riskcal/experiment/config.hpp"

#include "riskcal/data/manifest.hpp"
#include "riskcal/data/splits.hpp"
#include "riskcal/errors.hpp"

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace riskcal::experiment {
namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

toml::table parse_toml(const std::string& text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("config parse error at line {}: {}", e.source().begin.line, e.description()));
  }
}

void reject_unknown(const toml::table& table, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : table) {
    if (!allowed.contains(std::string(key.str()))) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key.str()));
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<std::string> string_list(const toml::table& t, const std::string& key, bool required) {
  const auto* node = t.get(key);
  if (!node) {
    if (required) throw ConfigError(fmt::format("config needs '{}'", key));
    return {};
  }
  const auto* arr = node->as_array();
  if (!arr) throw ConfigError(fmt::format("'{}' must be an array of strings", key));
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    const auto s = item.value<std::string>();
    if (!s) throw ConfigError(fmt::format("'{}' must be an array of strings", key));
    out.push_back(*s);
  }
  return out;
}

std::vector<models::Family> family_list(const toml::table& t, const std::string& key, bool required) {
  std::vector<models::Family> out;
  for (const auto& name : string_list(t, key, required)) out.push_back(models::parse_family(name));
  return out;
}

std::vector<double> number_list(const toml::table& t, const std::string& key) {
  const auto* arr = t.get_as<toml::array>(key);
  if (!arr) throw ConfigError(fmt::format("config needs '{}' as an array of numbers", key));
  std::vector<double> out;
  for (const auto& item : *arr) {
    const auto v = item.value<double>();
    if (!v) throw ConfigError(fmt::format("'{}' must contain numbers", key));
    out.push_back(*v);
  }
  return out;
}

template <typename T>
T integer(const toml::table& t, const std::string& key, T fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  const auto v = node->value<std::int64_t>();
  if (!v) throw ConfigError(fmt::format("'{}' must be an integer", key));
  return static_cast<T>(*v);
}

void require_family_head(const std::vector<models::Family>& families, models::Head head, const std::string& key) {
  for (const auto f : families) {
    if (models::head_of(f) != head) {
      throw ConfigError(fmt::format("'{}': {} is not a {} family", key, models::to_string(f),
                                    head == models::Head::regression ? "regression" : "classification"));
    }
  }
}

}  // namespace

void check_costs(const std::vector<double>& costs) {
  if (costs.empty()) throw ConfigError("costs must not be empty");
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!(costs[i] > 0.0)) throw ConfigError(fmt::format("cost {} is not strictly positive", costs[i]));
    if (i > 0 && !(costs[i] > costs[i - 1])) throw ConfigError("costs must be strictly ascending");
  }
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text(path), path.parent_path());
}

ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  const toml::table root = parse_toml(toml_text);
  reject_unknown(root,
                 {"manifest", "datasets", "regressors", "calibrators", "costs", "folds", "seed", "loss", "output",
                  "workers", "model_dir"},
                 "rwr config");
  ExperimentConfig config;
  const auto manifest = root["manifest"].value<std::string>();
  if (!manifest) throw ConfigError("config needs 'manifest'");
  config.manifest = resolve(base_dir, *manifest);
  config.datasets = string_list(root, "datasets", true);
  config.regressors = family_list(root, "regressors", true);
  config.calibrators = family_list(root, "calibrators", true);
  require_family_head(config.regressors, models::Head::regression, "regressors");
  require_family_head(config.calibrators, models::Head::regression, "calibrators");
  config.costs = number_list(root, "costs");
  check_costs(config.costs);
  config.folds = integer(root, "folds", 10);
  if (config.folds < 1 || config.folds > data::kNumFolds) throw ConfigError("folds must lie in [1, 10]");
  config.seed = integer<std::uint64_t>(root, "seed", 42);
  config.loss = calib::parse_loss(root["loss"].value_or(std::string("squared")));
  if (config.loss != calib::LossKind::squared && config.loss != calib::LossKind::absolute) {
    throw ConfigError("rwr runs need a regression loss (squared or absolute)");
  }
  const auto output = root["output"].value<std::string>();
  if (!output) throw ConfigError("config needs 'output'");
  config.output = resolve(base_dir, *output);
  config.workers = integer(root, "workers", 0);
  if (const auto dir = root["model_dir"].value<std::string>()) config.model_dir = resolve(base_dir, *dir);

  if (config.datasets.empty() || config.regressors.empty() || config.calibrators.empty()) {
    throw ConfigError("datasets, regressors and calibrators must be non-empty");
  }
  const data::Manifest m = data::Manifest::load(config.manifest);
  for (const auto& name : config.datasets) {
    if (!m.contains(name)) throw ConfigError(fmt::format("dataset '{}' is not in the manifest", name));
  }
  return config;
}

ClassifyConfig load_classify_config(const std::filesystem::path& path) {
  return parse_classify_config(read_text(path), path.parent_path());
}

ClassifyConfig parse_classify_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  const toml::table root = parse_toml(toml_text);
  reject_unknown(root,
                 {"task", "predictors", "plugin_backends", "temperature_scaled", "regression_calibrators",
                  "representation_calibrators", "representation_source", "costs", "seeds", "seed", "output",
                  "workers"},
                 "classify config");
  ClassifyConfig config;
  const auto* task = root["task"].as_table();
  if (!task) throw ConfigError("classify config needs a [task] table");
  reject_unknown(*task, {"n", "d", "classes", "quadratic", "coefficient_scale"}, "[task]");
  config.task.generator = data::Generator::known_density_classification;
  config.task.n = integer<std::size_t>(*task, "n", 2000);
  config.task.d = integer(*task, "d", 5);
  config.task.num_classes = integer(*task, "classes", 3);
  config.task.quadratic = (*task)["quadratic"].value_or(true);
  config.task.coefficient_scale = (*task)["coefficient_scale"].value_or(1.0);
  if (config.task.n < 50 || config.task.d < 1 || config.task.num_classes < 2) {
    throw ConfigError("[task] needs n >= 50, d >= 1 and classes >= 2");
  }

  config.predictors = family_list(root, "predictors", true);
  config.plugin_backends = family_list(root, "plugin_backends", false);
  config.temperature_scaled = family_list(root, "temperature_scaled", false);
  config.regression_calibrators = family_list(root, "regression_calibrators", false);
  config.representation_calibrators = family_list(root, "representation_calibrators", false);
  require_family_head(config.predictors, models::Head::classification, "predictors");
  require_family_head(config.plugin_backends, models::Head::classification, "plugin_backends");
  require_family_head(config.temperature_scaled, models::Head::classification, "temperature_scaled");
  require_family_head(config.regression_calibrators, models::Head::regression, "regression_calibrators");
  require_family_head(config.representation_calibrators, models::Head::regression, "representation_calibrators");
  if (const auto src = root["representation_source"].value<std::string>()) {
    config.representation_source = models::parse_family(*src);
    if (!models::make_spec(*config.representation_source).has_hidden_layers() ||
        models::head_of(*config.representation_source) != models::Head::classification) {
      throw ConfigError("representation_source must be a classification network with hidden layers");
    }
  }
  if (!config.representation_calibrators.empty() && !config.representation_source) {
    throw ConfigError("representation_calibrators need a representation_source");
  }
  config.costs = number_list(root, "costs");
  check_costs(config.costs);
  config.seeds = integer(root, "seeds", 10);
  if (config.seeds < 1) throw ConfigError("seeds must be positive");
  config.seed = integer<std::uint64_t>(root, "seed", 7);
  if (const auto out = root["output"].value<std::string>()) config.output = resolve(base_dir, *out);
  config.workers = integer(root, "workers", 0);
  return config;
}

}  // namespace riskcal::experiment

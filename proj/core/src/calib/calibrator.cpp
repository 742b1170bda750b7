#include "riskcal/calib/calibrator.hpp"

#include "riskcal/calib/temperature.hpp"
#include "riskcal/errors.hpp"

#include <fmt/format.h>

namespace riskcal::calib {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::regression: return "regression";
    case Strategy::plugin: return "plugin";
    case Strategy::plugin_temperature: return "plugin-temperature";
  }
  return "?";
}

RiskCalibrator::RiskCalibrator(Strategy strategy, LossFn loss, models::Predictor backend, double temperature,
                               InputMode mode, std::optional<data::Standardizer> representation_scaler,
                               std::optional<models::Predictor> representation_source)
    : strategy_(strategy),
      loss_(loss),
      backend_(std::move(backend)),
      temperature_(temperature),
      mode_(mode),
      rep_scaler_(std::move(representation_scaler)),
      rep_source_(std::move(representation_source)) {
  if (!(temperature_ > 0.0)) throw ModelError("calibrator temperature must be positive");
  if (mode_ == InputMode::representation && !rep_scaler_) {
    throw ModelError("representation mode needs its standardizer");
  }
}

Eigen::VectorXd RiskCalibrator::estimate(const models::Predictor& f, const Eigen::MatrixXd& x) const {
  if (strategy_ == Strategy::regression) {
    const models::Predictor& source = rep_source_ ? *rep_source_ : f;
    Eigen::VectorXd g = mode_ == InputMode::raw ? backend_.predict(x)
                                                : backend_.predict(rep_scaler_->apply(source.extract_representation(x)));
    // All supported losses are nonnegative, so negative estimates are clipped.
    return g.cwiseMax(0.0);
  }
  const Eigen::MatrixXd per_class = per_class_losses(loss_, f.predict_proba(x));
  const Eigen::MatrixXd p = scaled_probabilities(backend_.predict_logits(x), temperature_);
  return plugin_risk(per_class, p);
}

RiskCalibrator fit_regression_calibrator(const models::ModelSpec& spec, const LossFn& loss, const models::Predictor& f,
                                         const Eigen::MatrixXd& x_cal, const Eigen::VectorXd& y_cal, InputMode mode,
                                         const models::Predictor* source) {
  if (x_cal.rows() == 0) throw ModelError("regression calibrator: empty calibration set");
  if (spec.head() != models::Head::regression) {
    throw ModelError(fmt::format("regression calibrator needs a regression family, got {}", models::to_string(spec.family)));
  }
  const Eigen::VectorXd z = sample_losses(f, loss, x_cal, y_cal);
  std::optional<data::Standardizer> scaler;
  Eigen::MatrixXd inputs;
  const models::Predictor& rep_from = source ? *source : f;
  if (mode == InputMode::representation) {
    if (!rep_from.spec().has_hidden_layers()) {
      throw ModelError(fmt::format("representation mode needs a network with hidden layers, got {}",
                                   models::to_string(rep_from.spec().family)));
    }
    const Eigen::MatrixXd rep = rep_from.extract_representation(x_cal);
    scaler = data::Standardizer::fit(rep);
    inputs = scaler->apply(rep);
  } else {
    inputs = x_cal;
  }
  models::FitResult fitted = models::fit(spec, inputs, z);
  std::optional<models::Predictor> kept;
  if (mode == InputMode::representation && source) kept = *source;
  return {Strategy::regression, loss, std::move(fitted.predictor), 1.0, mode, std::move(scaler), std::move(kept)};
}

RiskCalibrator fit_plugin_calibrator(const models::ModelSpec& spec, const LossFn& loss, const Eigen::MatrixXd& x_cal,
                                     const Eigen::VectorXd& y_cal, int num_classes, bool temperature_scaled) {
  if (x_cal.rows() == 0) throw ModelError("plug-in calibrator: empty calibration set");
  if (spec.head() != models::Head::classification) {
    throw ModelError(fmt::format("plug-in calibrator needs a probability model, got {}", models::to_string(spec.family)));
  }
  models::FitResult fitted = models::fit(spec, x_cal, y_cal, num_classes);
  double temperature = 1.0;
  if (temperature_scaled) temperature = fit_temperature(fitted.predictor, x_cal, y_cal).temperature;
  RiskCalibrator out = make_plugin_calibrator(std::move(fitted.predictor), loss, temperature);
  return out;
}

RiskCalibrator make_plugin_calibrator(models::Predictor p, const LossFn& loss, double temperature) {
  if (p.head() != models::Head::classification) throw ModelError("plug-in calibrator needs a classification head");
  if (!loss.needs_classifier()) throw ModelError("plug-in estimation needs a per-class loss");
  const Strategy strategy = temperature == 1.0 ? Strategy::plugin : Strategy::plugin_temperature;
  return {strategy, loss, std::move(p), temperature, InputMode::raw, std::nullopt};
}

CalibReport calib_error(const Eigen::VectorXd& estimates, const Eigen::VectorXd& realized) {
  if (estimates.size() == 0) throw ModelError("calib_error: empty evaluation set");
  if (estimates.size() != realized.size()) throw ModelError("calib_error: length mismatch");
  const Eigen::ArrayXd diff = (estimates - realized).array();
  const auto n = static_cast<double>(diff.size());
  return {diff.abs().sum() / n, diff.square().sum() / n, static_cast<std::size_t>(diff.size())};
}

CalibReport calib_error(const RiskCalibrator& g, const models::Predictor& f, const Eigen::MatrixXd& x_test,
                        const Eigen::VectorXd& y_test) {
  return calib_error(g.estimate(f, x_test), sample_losses(f, g.loss(), x_test, y_test));
}

}  // namespace riskcal::calib

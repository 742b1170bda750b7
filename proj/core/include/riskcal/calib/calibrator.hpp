#pragma once

#include "riskcal/calib/loss.hpp"
#include "riskcal/data/standardizer.hpp"
#include "riskcal/models/predictor.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace riskcal::calib {

enum class Strategy { regression, plugin, plugin_temperature };
enum class InputMode { raw, representation };

std::string to_string(Strategy strategy);

/// An estimator of the conditional risk g(x) of a fixed predictor f.
class RiskCalibrator {
 public:
  RiskCalibrator() = default;
  RiskCalibrator(Strategy strategy, LossFn loss, models::Predictor backend, double temperature, InputMode mode,
                 std::optional<data::Standardizer> representation_scaler,
                 std::optional<models::Predictor> representation_source = std::nullopt);

  /// Estimated risk of `f` at each row. `f` must be the predictor the
  /// calibrator was built for: plug-in estimates need its outputs, and
  /// representation mode reads its hidden layer unless a separate
  /// representation source was given.
  [[nodiscard]] Eigen::VectorXd estimate(const models::Predictor& f, const Eigen::MatrixXd& x) const;

  [[nodiscard]] Strategy strategy() const { return strategy_; }
  [[nodiscard]] const LossFn& loss() const { return loss_; }
  [[nodiscard]] const models::Predictor& backend() const { return backend_; }
  [[nodiscard]] double temperature() const { return temperature_; }
  [[nodiscard]] InputMode input_mode() const { return mode_; }
  [[nodiscard]] const std::optional<data::Standardizer>& representation_scaler() const { return rep_scaler_; }
  [[nodiscard]] const std::optional<models::Predictor>& representation_source() const { return rep_source_; }

 private:
  Strategy strategy_ = Strategy::regression;
  LossFn loss_;
  models::Predictor backend_;
  double temperature_ = 1.0;
  InputMode mode_ = InputMode::raw;
  std::optional<data::Standardizer> rep_scaler_;
  std::optional<models::Predictor> rep_source_;
};

/// Eq. (6): regress realized losses z on the calibration inputs. In
/// representation mode the inputs are the last hidden layer of `source`
/// (default: f itself), standardized.
RiskCalibrator fit_regression_calibrator(const models::ModelSpec& spec, const LossFn& loss, const models::Predictor& f,
                                         const Eigen::MatrixXd& x_cal, const Eigen::VectorXd& y_cal,
                                         InputMode mode = InputMode::raw,
                                         const models::Predictor* source = nullptr);

/// Eq. (8) with a probability model fit on the calibration rows, optionally
/// followed by temperature scaling on the same rows.
RiskCalibrator fit_plugin_calibrator(const models::ModelSpec& spec, const LossFn& loss, const Eigen::MatrixXd& x_cal,
                                     const Eigen::VectorXd& y_cal, int num_classes, bool temperature_scaled = false);

/// Wraps an already fitted probability model.
RiskCalibrator make_plugin_calibrator(models::Predictor p, const LossFn& loss, double temperature = 1.0);

struct CalibReport {
  double mae = 0.0;
  double mse = 0.0;
  std::size_t n = 0;
};

CalibReport calib_error(const Eigen::VectorXd& estimates, const Eigen::VectorXd& realized);
CalibReport calib_error(const RiskCalibrator& g, const models::Predictor& f, const Eigen::MatrixXd& x_test,
                        const Eigen::VectorXd& y_test);

}  // namespace riskcal::calib

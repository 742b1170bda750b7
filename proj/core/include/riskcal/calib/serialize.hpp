#pragma once

#include "riskcal/calib/calibrator.hpp"

#include <filesystem>
#include <string>

namespace riskcal::calib {

/// JSON document embedding the backend (and optional representation source)
/// in the predictor format of models/serialize.hpp.
std::string serialize_calibrator(const RiskCalibrator& calibrator);
RiskCalibrator deserialize_calibrator(const std::string& text);

void save_calibrator(const std::filesystem::path& path, const RiskCalibrator& calibrator);
RiskCalibrator load_calibrator(const std::filesystem::path& path);

}  // namespace riskcal::calib

#pragma once

#include "riskcal/models/predictor.hpp"

#include <filesystem>
#include <string>

namespace riskcal::models {

inline constexpr int kFormatVersion = 1;

/// JSON document with stable field names. Real arrays are stored as base64 of
/// IEEE-754 float64 values in little-endian byte order ("byte_order" field).
std::string serialize_predictor(const Predictor& predictor);
Predictor deserialize_predictor(const std::string& text);

void save_predictor(const std::filesystem::path& path, const Predictor& predictor);
Predictor load_predictor(const std::filesystem::path& path);

/// Helpers shared with calibrator persistence.
std::string encode_doubles(const double* values, std::size_t count);
std::vector<double> decode_doubles(const std::string& text);

}  // namespace riskcal::models

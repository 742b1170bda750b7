#pragma once

#include "riskcal/data/manifest.hpp"

#include <string>

namespace riskcal::data {

/// Inflates a gzip stream; returns the input unchanged when it lacks the gzip magic.
std::string maybe_gunzip(const std::string& bytes);

/// Downloads `entry.url`, checks the parsed shape against the manifest and
/// writes a normalized headered CSV to `entry.path`. Throws DataError on
/// network, parse or shape failures. Existing files are kept unless `overwrite`.
Dataset fetch_dataset(const ManifestEntry& entry, bool overwrite = false);

}  // namespace riskcal::data

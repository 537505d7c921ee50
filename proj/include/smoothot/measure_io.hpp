#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "smoothot/measures.hpp"

namespace smoothot {

struct ParseOptions {
  // Rescale weights whose sum deviates from 1 by more than 1e-9 instead of
  // rejecting the file.
  bool renormalize = false;
};

/// {"dim": d, "atoms": [{"x": [...], "w": w}, ...]}. Errors carry the JSON
/// pointer of the offending node.
DiscreteMeasure measure_from_json(const nlohmann::json& j, const ParseOptions& opts = {});
nlohmann::json measure_to_json(const DiscreteMeasure& m);

DiscreteMeasure read_measure(const std::filesystem::path& path, const ParseOptions& opts = {});
void write_measure(const DiscreteMeasure& m, const std::filesystem::path& path);

/// Canonical text form: atoms sorted by location, shortest round-trip doubles.
std::string dump_measure(const DiscreteMeasure& m);

}  // namespace smoothot

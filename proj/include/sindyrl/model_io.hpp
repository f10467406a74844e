#pragma once

#include "sindyrl/ensemble.hpp"

#include <json.hpp>

#include <filesystem>

namespace sindyrl {

using json = nlohmann::json;

json library_to_json(const FeatureLibrary& lib);
FeatureLibrary library_from_json(const json& j);

json coefficients_to_json(const CoefficientMatrix& c);
CoefficientMatrix coefficients_from_json(const json& j);

/// Checkpoint document:
///   {"format": "sindyrl.ensemble/1", "library": {...}, "aggregation": "median",
///    "fit_meta": {...}, "members": [{"rows", "cols", "values" (row-major), "mask"}]}
json ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const json& j);

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_ensemble(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace sindyrl

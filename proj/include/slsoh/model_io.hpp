#pragma once

#include <string>

#include "slsoh/regression.hpp"

namespace slsoh {

inline constexpr int kModelSchemaVersion = 1;

// Fields: schema_version, feature_names, means, stds, weights, intercept,
// lambda, alpha. Doubles are written in shortest round-trip form.
std::string save_model(const EnrModel& model);

// Throws SchemaError on an unknown schema_version, a missing or mistyped
// field, a non-finite value, or inconsistent array lengths.
EnrModel load_model(const std::string& document);

void save_model_file(const std::string& path, const EnrModel& model);
EnrModel load_model_file(const std::string& path);

}  // namespace slsoh

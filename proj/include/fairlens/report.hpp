#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "fairlens/dsl.hpp"

namespace fairlens {

inline constexpr const char* kToolName = "fairlens";
inline constexpr const char* kToolVersion = "0.1.0";

// Full JSON report over one scenario (and optionally a dataset): audit,
// criterion recommendation, effect estimates, a counterfactual example and
// group metrics, each section included when the scenario supports it and
// carrying an "error" entry otherwise.  Byte-deterministic for fixed
// (scenario, data, seed); the worker count never changes the bytes.
nlohmann::json build_report(const ScenarioSpec& scenario,
                            const std::optional<Dataset>& data, uint64_t seed,
                            int workers);

// Stable content fingerprint of a dataset (column names and value bits).
std::string dataset_digest(const Dataset& data);

}  // namespace fairlens

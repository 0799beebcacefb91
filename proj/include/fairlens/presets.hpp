#pragma once

#include <string>
#include <vector>

#include "fairlens/dsl.hpp"

namespace fairlens {

// Built-in scenarios, shipped as DSL source so every one round-trips
// through the parser.
const std::vector<std::string>& preset_names();

bool is_preset(const std::string& name);

// BadParameter for unknown names.
const std::string& preset_source(const std::string& name);

// One-line summary for listings.
const std::string& preset_summary(const std::string& name);

ScenarioSpec load_preset(const std::string& name);

}  // namespace fairlens

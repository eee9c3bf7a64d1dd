#pragma once

#include "marle/solver.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace marle {

constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const GridSpec& g);
nlohmann::json to_json(const RunConfig& c);

// Missing keys keep the values already in `base`; unknown keys are rejected.
GridSpec grid_from_json(const nlohmann::json& j, GridSpec base = {});
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

} // namespace marle

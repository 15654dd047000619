#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "saoi/engine.hpp"

namespace saoi {

/// Applies every key present in `j` on top of `cfg`. Keys mirror the
/// ScenarioConfig members; nested structs are nested objects. Unknown keys
/// and ill-typed values throw std::invalid_argument naming the key.
void apply_json(ScenarioConfig& cfg, const nlohmann::json& j);

/// Reads a JSON config file on top of the defaults.
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& cfg);

/// Writes manifest.json: the full configuration of every run plus free-form
/// extras supplied by the caller.
void write_manifest(const std::filesystem::path& path, const nlohmann::json& manifest);

}  // namespace saoi

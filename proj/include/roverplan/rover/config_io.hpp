#pragma once

#include "roverplan/rover/grid_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace roverplan::rover {

inline constexpr int kConfigSchemaVersion = 1;

/// A problem configuration file: the grid plus optional harness sections that
/// other modules interpret. Absent sections are null.
struct ConfigDocument {
    GridConfig grid;
    nlohmann::json experiment;
    nlohmann::json sweep;
};

/// Parses a configuration document. Unknown keys, wrong types, missing
/// required fields and invariant violations throw ConfigError.
ConfigDocument parse_config(const nlohmann::json& doc);
GridConfig parse_grid_config(const nlohmann::json& doc);

/// Reads and parses a file; unreadable files throw IoError, malformed JSON
/// throws ConfigError.
ConfigDocument load_config(const std::filesystem::path& path);

/// Serializes every GridConfig field explicitly, including defaults.
nlohmann::json to_json(const GridConfig& cfg);

} // namespace roverplan::rover

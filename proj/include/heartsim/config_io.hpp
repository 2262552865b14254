#pragma once

#include "heartsim/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace heartsim {

nlohmann::json to_json(const CellOverrides& overrides);
CellOverrides cell_overrides_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PathParams& params);
/// Missing keys keep the values already in `base`.
PathParams path_params_from_json(const nlohmann::json& j, PathParams base = {});

nlohmann::json to_json(const HeartConfig& config);
/// Throws std::invalid_argument on schema violations (unknown keys, bad types, wrong version).
HeartConfig heart_config_from_json(const nlohmann::json& j);

/// Applies user overrides on top of a config. Accepted keys: top-level
/// scalars, "nodes": {id: {...}}, "paths": {"FROM-TO": {...}}, "stimuli": [...] (appended).
HeartConfig apply_overrides(const HeartConfig& config, const nlohmann::json& overrides);

HeartConfig load_config(const std::filesystem::path& path);
void save_config(const HeartConfig& config, const std::filesystem::path& path);

/// Canonical serialisation: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

/// FNV-1a 64-bit hash of the canonical serialisation, as 16 hex digits.
std::string config_hash(const HeartConfig& config);

}  // namespace heartsim

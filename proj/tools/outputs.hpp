#pragma once

#include "heartsim/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace heartsim::cli {

/// Locale-independent fixed-point text.
std::string fixed(double value, int decimals);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_locations_csv(std::ostream& out, const Trace& trace);
void write_path_locations_csv(std::ostream& out, const Trace& trace);
void write_activation_csv(std::ostream& out, const std::vector<Activation>& report);
void write_restitution_csv(std::ostream& out, const std::vector<RestitutionPoint>& points);

nlohmann::json settings_to_json(const SimSettings& settings);
SimSettings settings_from_json(const nlohmann::json& j);

/// Writes `text` with LF line endings regardless of platform.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace heartsim::cli

#pragma once

#include "heartsim/cell.hpp"
#include "heartsim/path.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heartsim {

inline constexpr int kSchemaVersion = 1;

enum class Region : std::uint8_t { atrial, av, ventricular, purkinje };
enum class CouplingMode : std::uint8_t { uoa_h_k, oxford_g_k };

std::string_view to_string(Region region);
Region region_from_string(std::string_view name);
std::string_view to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(std::string_view name);

/// Partial CellParams. Unset fields fall back to the variant preset.
struct CellOverrides {
  std::optional<CellVariant> variant;
  std::array<std::optional<double>, 12> alpha{};  // index = row * 4 + location
  std::array<std::optional<double>, 3> beta{};
  std::optional<double> v_r, v_t, v_o, f_cap;
  std::optional<bool> f_cap_enabled, q3_f_theta_enabled;

  [[nodiscard]] std::optional<double>& alpha_at(int row, int location) { return alpha[row * 4 + location]; }
  [[nodiscard]] const std::optional<double>& alpha_at(int row, int location) const {
    return alpha[row * 4 + location];
  }

  /// Later fields win.
  void merge(const CellOverrides& other);
  [[nodiscard]] CellParams resolve(CellVariant default_variant = CellVariant::uoa) const;
};

struct NodeConfig {
  std::string id;
  Region region = Region::atrial;
  CellOverrides cell;
  /// Distance coefficient d_k of the delayed-voltage baseline coupling.
  double oxford_d = 0.0;
};

struct PathConfig {
  std::string from;  // cell i
  std::string to;    // cell j
  PathParams params;
};

struct Stimulus {
  std::string node_id;
  double time_ms = 10.0;
  double amplitude_mv = 50.0;
  double duration_ms = 2.0;
};

struct HeartConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  std::vector<NodeConfig> nodes;
  std::vector<PathConfig> paths;
  std::vector<Stimulus> stimuli;
  /// Auto-pacing of `sa_node`: stimuli at sa_first_ms + k * sa_cycle_ms.
  std::optional<double> sa_cycle_ms;
  std::string sa_node = "SA";
  double sa_first_ms = 10.0;
  double sa_amplitude_mv = 50.0;
  double sa_duration_ms = 2.0;
  CouplingMode coupling_mode = CouplingMode::uoa_h_k;
  double a_m = 1.0;  // mm^-1
  double c_m = 1.0;  // uF/mm^2

  [[nodiscard]] std::optional<std::size_t> node_index(std::string_view id) const;
  /// Explicit stimuli plus the expanded SA pacing schedule up to `until_ms`, sorted by time.
  [[nodiscard]] std::vector<Stimulus> stimulus_schedule(double until_ms) const;
};

enum class ScenarioName : std::uint8_t {
  normal,
  heart_block,
  bundle_branch_block_right,
  bundle_branch_block_left,
  long_qt,
  va_conduction,
  wpw,
  avnrt,
  bradycardia,
  tachycardia,
};

std::string_view to_string(ScenarioName name);
ScenarioName scenario_from_string(std::string_view name);
/// All scenarios, sorted by name.
std::vector<ScenarioName> all_scenarios();
std::string_view scenario_description(ScenarioName name);

/// Magnitudes used by the scenario transforms. The defaults reproduce the
/// qualitative outcomes of each condition on the shipped heart.
struct ScenarioOptions {
  double block_sigma_factor = 0.001;
  double block_delta_factor = 2.0;
  std::vector<std::string> av_inputs{"FP2", "SP2"};
  std::string av_node = "AV";
  std::string his_node = "BH";
  std::string right_branch = "RBB1";
  std::string left_branch = "LBB1";
  double long_qt_alpha3y_factor = 0.6;
  std::string va_node = "RV1";
  double va_time_ms = 10.0;
  std::string wpw_from = "LA3";
  std::string wpw_to = "LV3";
  double wpw_delta_ms = 20.0;
  std::vector<double> avnrt_times_ms{10.0, 220.0};
  double bradycardia_cycle_ms = 1500.0;
  double tachycardia_cycle_ms = 350.0;
};

struct Scenario {
  ScenarioName name = ScenarioName::normal;
  ScenarioOptions options;
};

/// The shipped 33-node conduction system (compiled in from data/default_heart.json).
HeartConfig default_heart();

/// Four cells in a ring: 1 (atrial entry), 2 (fast pathway), 3 (AV exit), 4 (slow pathway).
/// `stimulus_times_ms` stimulate cell 1.
HeartConfig avnrt_four_cell_demo(std::vector<double> stimulus_times_ms = {10.0, 260.0});

/// Pure transform; throws std::invalid_argument when a node it needs is missing.
HeartConfig apply_scenario(const HeartConfig& config, const Scenario& scenario);

enum class Severity : std::uint8_t { error, warning, info };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string message;
};

std::vector<Diagnostic> validate_config(const HeartConfig& config, double dt_ms = 0.0005);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace heartsim

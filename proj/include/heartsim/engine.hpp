#pragma once

#include "heartsim/cell.hpp"
#include "heartsim/integrator.hpp"
#include "heartsim/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace heartsim {

struct SimSettings {
  double dt_ms = 0.0005;
  double duration_ms = 1000.0;
  /// Keep every Nth step in the trace; dynamics always run on the full grid.
  std::size_t record_decimation = 200;
  Integrator integrator = Integrator::rk4;
  bool record_paths = false;
};

/// Throws std::invalid_argument on dt <= 0, duration <= 0 or decimation 0.
void check_settings(const SimSettings& settings);

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

using LocationMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PotentialMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Trace {
  std::vector<double> times;  // ms
  std::vector<std::string> node_ids;
  PotentialMatrix potential;  // samples x nodes, mV
  LocationMatrix location;    // samples x nodes, Location as integer
  std::vector<std::string> path_ids;
  LocationMatrix path_location;  // samples x paths, PathLocation as integer (record_paths only)

  /// Full-resolution event times per node.
  std::vector<std::vector<double>> upstrokes;   // q1 -> q2
  std::vector<std::vector<double>> recoveries;  // q3 -> q0
  std::size_t relay_starts = 0;

  std::string config_hash;
  SimSettings settings;
  std::size_t steps = 0;

  [[nodiscard]] std::optional<std::size_t> node_index(std::string_view id) const;
};

Trace simulate(const HeartConfig& config, const SimSettings& settings);

/// Largest f(theta) an explicit step of size dt can follow stably for these rates.
double stable_f_limit(const CellParams& params, double dt_ms);

struct CellStimulus {
  double time_ms = 10.0;
  double amplitude_mv = 50.0;
  double duration_ms = 2.0;
};

struct CellRun {
  std::vector<double> times;
  std::vector<double> potential;
  std::vector<double> upstrokes;
  std::vector<double> recoveries;
};

/// Isolated cell driven only by the given stimuli.
CellRun simulate_cell(const CellParams& params, const std::vector<CellStimulus>& stimuli, double duration_ms,
                      double dt_ms = 0.0005, std::size_t record_decimation = 1,
                      Integrator integrator = Integrator::rk4);

/// q2 -> q0 duration of one stimulated beat from rest, or a negative value if
/// the cell does not return to rest within `horizon_ms`.
double single_beat_apd_ms(const CellParams& params, double dt_ms = 0.01, double horizon_ms = 2000.0);

struct BeatMeasure {
  double onset_ms = 0.0;
  double peak_mv = 0.0;
  double apd_ms = 0.0;
  /// Interval from this beat's threshold fall to the next onset.
  std::optional<double> di_ms;
};

/// APD runs from each onset to the first fall to threshold_frac x the beat's
/// peak (linearly interpolated). Beats that never fall before the next onset
/// or the end of the series are incomplete and end the list.
std::vector<BeatMeasure> measure_apd_di(const std::vector<double>& times, const std::vector<double>& potential,
                                        const std::vector<double>& onsets, double threshold_frac = 0.10);

/// Same, with onsets taken as upward crossings of threshold_frac x the series maximum.
std::vector<BeatMeasure> measure_apd_di(const std::vector<double>& times, const std::vector<double>& potential,
                                        double threshold_frac = 0.10);

enum class RestitutionProtocol : std::uint8_t {
  /// DI of beat N-1 against APD of beat N after N paced beats.
  steady_state,
  /// Premature beat after a single conditioning beat: DI of beat 1 against APD of beat 2.
  first_beat,
};

struct RestitutionOptions {
  std::size_t beats_per_bcl = 10;
  RestitutionProtocol protocol = RestitutionProtocol::steady_state;
  double dt_ms = 0.0005;
  double threshold_frac = 0.10;
  double first_stimulus_ms = 10.0;
  CellStimulus stimulus{};
  std::size_t record_decimation = 10;
};

struct RestitutionPoint {
  double bcl_ms = 0.0;
  double di_ms = 0.0;
  double apd_ms = 0.0;
};

struct RestitutionResult {
  std::vector<RestitutionPoint> points;
  std::vector<std::string> diagnostics;
  /// Every complete beat measured during the sweep, including non-1:1 runs.
  std::vector<double> all_apds_ms;
};

RestitutionResult restitution_curve(const CellParams& params, const std::vector<double>& bcl_list,
                                    const RestitutionOptions& options = {});

struct Activation {
  std::string node_id;
  std::optional<double> first_q2_entry_ms;
  std::size_t q2_entry_count = 0;
};

std::vector<Activation> activation_report(const Trace& trace);

}  // namespace heartsim

#pragma once

#include "heartsim/cell.hpp"
#include "heartsim/delay_line.hpp"

#include <cstdint>
#include <span>
#include <string_view>

namespace heartsim {

/// Parameters of one bidirectional conduction path between cells i and j.
struct PathParams {
  double delta_ij = 10.0;  // conduction time i -> j, ms
  double delta_ji = 10.0;  // conduction time j -> i, ms
  /// Time spent in relay_i before returning to idle, ignoring j's upstroke (and vice versa).
  double delta_ignore_i = 5.0;
  double delta_ignore_j = 5.0;
  double gamma_ij = 1.0;  // mm^2
  double gamma_ji = 1.0;
  double sigma_ij = 1.0;  // mS/mm
  double sigma_ji = 1.0;
  bool block_ij = false;
  bool block_ji = false;
  /// How long a failed propagation keeps the opposite direction blocked,
  /// measured from the failing AP's upstroke. <= 0 uses the source cell's
  /// APD for that beat.
  double refractory_window_ms = 0.0;
  /// Gains a_ki for the delayed-voltage coupling baseline.
  double gain_ij = 1.0;
  double gain_ji = 1.0;
};

enum class PathLocation : std::uint8_t {
  idle,
  direction_i,
  direction_j,
  wait_i,
  wait_j,
  relay_i,
  relay_j,
  annihilate,
};

std::string_view to_string(PathLocation location);

/// Origin of the most recent propagation; none after an annihilation.
enum class Origin : std::uint8_t { none = 0, from_i, from_j };

struct DelayedSample {
  double v = 0.0;
  Location location = Location::resting;
};

/// Rounds a conduction time to whole grid steps.
std::size_t delay_steps(double delta_ms, double dt_ms);

struct PathState {
  PathLocation ta_location = PathLocation::idle;
  double clock_ms = 0.0;
  Origin last = Origin::none;

  bool relay_active_i_at_j = false;
  bool relay_active_j_at_i = false;
  double relay_start_i_ms = 0.0;
  double relay_start_j_ms = 0.0;

  /// Upstroke time of the AP currently being arbitrated or relayed, per origin.
  double upstroke_i_ms = 0.0;
  double upstroke_j_ms = 0.0;

  /// Memory of the latest failed (partial) propagation.
  bool partial_pending = false;
  Origin partial_origin = Origin::none;
  double partial_upstroke_ms = 0.0;

  DelayLine<DelayedSample> delay_buffer_ij;  // samples of cell i, read at j
  DelayLine<DelayedSample> delay_buffer_ji;  // samples of cell j, read at i

  PathState() = default;
  PathState(const PathParams& params, double dt_ms);
};

struct PathEvents {
  bool start_i = false;
  bool start_j = false;
};

/// Arbitration TA. Advances the clock by dt and takes the enabled edges.
/// `now_ms` is the time of the cell states passed in.
PathEvents path_ta_step(PathState& state, const CellState& cell_i, const CellState& cell_j,
                        const PathParams& params, double dt_ms, double now_ms);

/// Relay of one direction. `delayed_source` is the source sample from one
/// conduction time ago; returns v_out seen by the destination, which equals
/// the destination's own potential while the relay is inactive. The relay
/// stops once the destination has entered q2 since the relay started, or
/// when the delayed source is back in q0 (recorded as a partial propagation).
double relay_step(PathState& state, bool source_is_i, const DelayedSample& delayed_source,
                  const CellState& dest, const CellParams& dest_params);

struct CouplingTerm {
  double gamma = 1.0;  // mm^2
  double sigma = 1.0;  // mS/mm
  double v_out = 0.0;  // mV
};

/// Reaction-diffusion input to a cell: sum of gamma*sigma/(a_m*c_m) * (v_out - v_k).
double coupling_h_k(std::span<const CouplingTerm> neighbors, double v_k, double a_m, double c_m);

struct DelayedGainTerm {
  double delayed_v = 0.0;
  double gain = 1.0;
};

/// Delayed-voltage baseline coupling: sum of v_i(t - delta) * a_ki minus v_k * d_k.
double coupling_g_k_oxford(std::span<const DelayedGainTerm> neighbors, double v_k, double d_k);

}  // namespace heartsim

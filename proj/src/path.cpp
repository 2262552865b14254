#include "heartsim/path.hpp"

#include <cmath>

namespace heartsim {

namespace {

constexpr double kClockEps = 1e-9;

bool in_upstroke(const CellState& cell) { return cell.location == Location::upstroke; }

/// True while a failed propagation from `from` still leaves the path's
/// interior refractory. `source` is the cell the failed AP came from.
bool partial_blocks(const PathState& state, Origin from, const CellState& source, const PathParams& params,
                    double now_ms) {
  if (!state.partial_pending || state.partial_origin != from || state.last != from) return false;
  double window = params.refractory_window_ms;
  if (window <= 0.0) {
    // The interior recovers with the source: once the source is back in q0
    // after the failing beat, its APD for that beat is known.
    if (source.last_q0_entry_ms < state.partial_upstroke_ms) return true;
    window = source.last_q0_entry_ms - state.partial_upstroke_ms;
  }
  return now_ms - state.partial_upstroke_ms < window;
}

/// One-way conduction: the cell that last propagated through the path cannot
/// receive a propagation back until it has returned to rest.
bool refractory_source(const PathState& state, Origin from, const CellState& source) {
  return state.last == from && (source.location == Location::upstroke || source.location == Location::plateau);
}

void record_partial(PathState& state, Origin from, double upstroke_ms) {
  state.partial_pending = true;
  state.partial_origin = from;
  state.partial_upstroke_ms = upstroke_ms;
}

void enter(PathState& state, PathLocation location) {
  state.ta_location = location;
  state.clock_ms = 0.0;
}

void annihilate(PathState& state) {
  enter(state, PathLocation::annihilate);
  state.last = Origin::none;
  state.relay_active_i_at_j = false;
  state.relay_active_j_at_i = false;
}

}  // namespace

std::string_view to_string(PathLocation location) {
  switch (location) {
    case PathLocation::idle: return "idle";
    case PathLocation::direction_i: return "direction_i";
    case PathLocation::direction_j: return "direction_j";
    case PathLocation::wait_i: return "wait_i";
    case PathLocation::wait_j: return "wait_j";
    case PathLocation::relay_i: return "relay_i";
    case PathLocation::relay_j: return "relay_j";
    case PathLocation::annihilate: return "annihilate";
  }
  return "unknown";
}

std::size_t delay_steps(double delta_ms, double dt_ms) {
  return static_cast<std::size_t>(std::llround(delta_ms / dt_ms));
}

PathState::PathState(const PathParams& params, double dt_ms)
    : delay_buffer_ij(delay_steps(params.delta_ij, dt_ms)), delay_buffer_ji(delay_steps(params.delta_ji, dt_ms)) {}

PathEvents path_ta_step(PathState& state, const CellState& cell_i, const CellState& cell_j,
                        const PathParams& params, double dt_ms, double now_ms) {
  PathEvents events;
  const bool up_i = in_upstroke(cell_i);
  const bool up_j = in_upstroke(cell_j);
  state.clock_ms += dt_ms;

  // direction_* locations are urgent, so one step may take idle -> direction -> wait.
  if (state.ta_location == PathLocation::idle) {
    if (up_i && up_j) {
      annihilate(state);
    } else if (up_i) {
      enter(state, PathLocation::direction_i);
      state.upstroke_i_ms = cell_i.last_q2_entry_ms;
    } else if (up_j) {
      enter(state, PathLocation::direction_j);
      state.upstroke_j_ms = cell_j.last_q2_entry_ms;
    }
  }

  switch (state.ta_location) {
    case PathLocation::idle:
      break;
    case PathLocation::direction_i:
      if (partial_blocks(state, Origin::from_j, cell_j, params, now_ms) ||
          refractory_source(state, Origin::from_j, cell_j)) {
        annihilate(state);
      } else {
        enter(state, PathLocation::wait_i);
      }
      break;
    case PathLocation::direction_j:
      if (partial_blocks(state, Origin::from_i, cell_i, params, now_ms) ||
          refractory_source(state, Origin::from_i, cell_i)) {
        annihilate(state);
      } else {
        enter(state, PathLocation::wait_j);
      }
      break;
    case PathLocation::wait_i:
      if (up_j) {
        annihilate(state);
      } else if (state.clock_ms + kClockEps >= params.delta_ij) {
        events.start_i = true;
        state.last = Origin::from_i;
        state.partial_pending = false;
        if (params.block_ij) {
          record_partial(state, Origin::from_i, state.upstroke_i_ms);
        } else {
          state.relay_active_i_at_j = true;
          state.relay_start_i_ms = now_ms;
        }
        enter(state, PathLocation::relay_i);
      }
      break;
    case PathLocation::wait_j:
      if (up_i) {
        annihilate(state);
      } else if (state.clock_ms + kClockEps >= params.delta_ji) {
        events.start_j = true;
        state.last = Origin::from_j;
        state.partial_pending = false;
        if (params.block_ji) {
          record_partial(state, Origin::from_j, state.upstroke_j_ms);
        } else {
          state.relay_active_j_at_i = true;
          state.relay_start_j_ms = now_ms;
        }
        enter(state, PathLocation::relay_j);
      }
      break;
    case PathLocation::relay_i:
      if (state.clock_ms + kClockEps >= params.delta_ignore_j) enter(state, PathLocation::idle);
      break;
    case PathLocation::relay_j:
      if (state.clock_ms + kClockEps >= params.delta_ignore_i) enter(state, PathLocation::idle);
      break;
    case PathLocation::annihilate:
      if (!up_i && !up_j) enter(state, PathLocation::idle);
      break;
  }
  return events;
}

double relay_step(PathState& state, bool source_is_i, const DelayedSample& delayed_source, const CellState& dest,
                  const CellParams& dest_params) {
  bool& active = source_is_i ? state.relay_active_i_at_j : state.relay_active_j_at_i;
  const double v_dest = membrane_potential(dest, dest_params);
  if (!active) return v_dest;

  const double start = source_is_i ? state.relay_start_i_ms : state.relay_start_j_ms;
  if (dest.last_q2_entry_ms >= start) {
    active = false;
    return v_dest;
  }
  if (delayed_source.location == Location::resting) {
    active = false;
    const Origin from = source_is_i ? Origin::from_i : Origin::from_j;
    record_partial(state, from, source_is_i ? state.upstroke_i_ms : state.upstroke_j_ms);
    return v_dest;
  }
  return delayed_source.v;
}

double coupling_h_k(std::span<const CouplingTerm> neighbors, double v_k, double a_m, double c_m) {
  double sum = 0.0;
  for (const auto& n : neighbors) sum += n.gamma * n.sigma / (a_m * c_m) * (n.v_out - v_k);
  return sum;
}

double coupling_g_k_oxford(std::span<const DelayedGainTerm> neighbors, double v_k, double d_k) {
  double sum = 0.0;
  for (const auto& n : neighbors) sum += n.delayed_v * n.gain;
  return sum - v_k * d_k;
}

}  // namespace heartsim

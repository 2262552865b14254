#include "heartsim/engine.hpp"

#include "heartsim/config_io.hpp"
#include "heartsim/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace heartsim {

namespace {

/// RK4 stays stable for |lambda| * dt below about 2.78.
constexpr double kStableRateStep = 2.5;

std::size_t step_count(double duration_ms, double dt_ms) {
  return static_cast<std::size_t>(std::llround(duration_ms / dt_ms));
}

struct StepWindow {
  std::size_t node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double amplitude = 0.0;
};

StepWindow stimulus_window(std::size_t node, double time_ms, double duration_ms, double amplitude, double dt_ms) {
  const auto begin = static_cast<std::size_t>(std::llround(time_ms / dt_ms));
  const auto width = std::max<long long>(1, std::llround(duration_ms / dt_ms));
  return {node, begin, begin + static_cast<std::size_t>(width), amplitude};
}

/// Continuous update with inputs frozen over the step, then at most one transition.
void advance_cell(CellState& state, double v_in, const CellParams& params, double f_limit, double dt_ms,
                  Integrator method, double now_ms) {
  const Eigen::Vector3d rate = flow_rates(state.location, state.theta, params, f_limit);
  const Eigen::Vector3d drive =
      state.location == Location::stimulated ? Eigen::Vector3d(params.beta * v_in) : Eigen::Vector3d::Zero();
  state.v = integrate_step(
      state.v, [&](const Eigen::Vector3d& v) -> Eigen::Vector3d { return rate.cwiseProduct(v) + drive; }, dt_ms,
      method);
  // Keeps fast decays out of the (slow) subnormal range.
  state.v = (state.v.array().abs() < 1e-200).select(0.0, state.v);
  state = cell_discrete_step(state, v_in, params, now_ms);
}

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  PathParams params;
  PathState state;
};

}  // namespace

std::string_view to_string(Integrator method) { return method == Integrator::rk4 ? "rk4" : "euler"; }

Integrator integrator_from_string(std::string_view name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "euler") return Integrator::euler;
  throw std::invalid_argument("unknown integrator: " + std::string(name));
}

void check_settings(const SimSettings& settings) {
  if (!(settings.dt_ms > 0.0) || !std::isfinite(settings.dt_ms)) throw std::invalid_argument("dt_ms must be positive");
  if (!(settings.duration_ms > 0.0) || !std::isfinite(settings.duration_ms))
    throw std::invalid_argument("duration_ms must be positive");
  if (settings.record_decimation < 1) throw std::invalid_argument("record_decimation must be >= 1");
}

std::optional<std::size_t> Trace::node_index(std::string_view id) const {
  for (std::size_t k = 0; k < node_ids.size(); ++k) {
    if (node_ids[k] == id) return k;
  }
  return std::nullopt;
}

double stable_f_limit(const CellParams& params, double dt_ms) {
  const double rate = std::max(std::abs(params.alpha(0, 3)), std::abs(params.alpha(1, 3)));
  if (rate == 0.0) return 0.0;
  return kStableRateStep / (dt_ms * rate);
}

Trace simulate(const HeartConfig& config, const SimSettings& settings) {
  check_settings(settings);
  const auto diagnostics = validate_config(config, settings.dt_ms);
  if (has_errors(diagnostics)) {
    std::string msg = "invalid config:";
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::error) msg += "\n  " + d.message;
    }
    throw std::invalid_argument(msg);
  }

  const double dt = settings.dt_ms;
  const std::size_t n_nodes = config.nodes.size();
  std::vector<CellParams> params;
  std::vector<double> f_limits;
  std::vector<double> oxford_d;
  for (const auto& node : config.nodes) {
    params.push_back(node.cell.resolve());
    f_limits.push_back(stable_f_limit(params.back(), dt));
    oxford_d.push_back(node.oxford_d);
  }
  std::vector<CellState> cells(n_nodes);

  std::vector<Edge> edges;
  edges.reserve(config.paths.size());
  for (const auto& p : config.paths) {
    edges.push_back({*config.node_index(p.from), *config.node_index(p.to), p.params, PathState(p.params, dt)});
  }

  std::vector<StepWindow> stimuli;
  for (const auto& s : config.stimulus_schedule(settings.duration_ms)) {
    stimuli.push_back(stimulus_window(*config.node_index(s.node_id), s.time_ms, s.duration_ms, s.amplitude_mv, dt));
  }

  const std::size_t steps = step_count(settings.duration_ms, dt);
  const std::size_t samples = steps / settings.record_decimation + 1;

  Trace trace;
  trace.settings = settings;
  trace.steps = steps;
  trace.config_hash = config_hash(config);
  for (const auto& node : config.nodes) trace.node_ids.push_back(node.id);
  trace.times.reserve(samples);
  trace.potential.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(n_nodes));
  trace.location.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(n_nodes));
  if (settings.record_paths) {
    for (const auto& p : config.paths) trace.path_ids.push_back(p.from + "-" + p.to);
    trace.path_location.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(edges.size()));
  }
  trace.upstrokes.resize(n_nodes);
  trace.recoveries.resize(n_nodes);

  std::vector<double> v(n_nodes, 0.0);
  std::vector<double> v_in(n_nodes, 0.0);
  const bool uoa = config.coupling_mode == CouplingMode::uoa_h_k;

  auto record = [&](double time_ms) {
    const auto row = static_cast<Eigen::Index>(trace.times.size());
    trace.times.push_back(time_ms);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      trace.potential(row, col) = membrane_potential(cells[k], params[k]);
      trace.location(row, col) = static_cast<std::uint8_t>(cells[k].location);
    }
    if (settings.record_paths) {
      for (std::size_t e = 0; e < edges.size(); ++e)
        trace.path_location(row, static_cast<Eigen::Index>(e)) = static_cast<std::uint8_t>(edges[e].state.ta_location);
    }
  };
  record(0.0);

  for (std::size_t n = 0; n < steps; ++n) {
    const double now = static_cast<double>(n + 1) * dt;
    for (std::size_t k = 0; k < n_nodes; ++k) v[k] = membrane_potential(cells[k], params[k]);
    std::fill(v_in.begin(), v_in.end(), 0.0);

    for (auto& e : edges) {
      const DelayedSample at_j = e.state.delay_buffer_ij.push({v[e.i], cells[e.i].location});
      const DelayedSample at_i = e.state.delay_buffer_ji.push({v[e.j], cells[e.j].location});
      if (uoa) {
        const CouplingTerm into_j{e.params.gamma_ij, e.params.sigma_ij,
                                  relay_step(e.state, true, at_j, cells[e.j], params[e.j])};
        const CouplingTerm into_i{e.params.gamma_ji, e.params.sigma_ji,
                                  relay_step(e.state, false, at_i, cells[e.i], params[e.i])};
        v_in[e.j] += coupling_h_k(std::span(&into_j, 1), v[e.j], config.a_m, config.c_m);
        v_in[e.i] += coupling_h_k(std::span(&into_i, 1), v[e.i], config.a_m, config.c_m);
      } else {
        const DelayedGainTerm into_j{at_j.v, e.params.gain_ij};
        const DelayedGainTerm into_i{at_i.v, e.params.gain_ji};
        v_in[e.j] += coupling_g_k_oxford(std::span(&into_j, 1), 0.0, 0.0);
        v_in[e.i] += coupling_g_k_oxford(std::span(&into_i, 1), 0.0, 0.0);
      }
    }
    if (!uoa) {
      for (std::size_t k = 0; k < n_nodes; ++k) v_in[k] -= v[k] * oxford_d[k];
    }
    for (const auto& s : stimuli) {
      if (n >= s.begin && n < s.end) v_in[s.node] += s.amplitude;
    }

    for (std::size_t k = 0; k < n_nodes; ++k) {
      const Location before = cells[k].location;
      try {
        advance_cell(cells[k], v_in[k], params[k], f_limits[k], dt, settings.integrator, now);
      } catch (const NonFiniteState&) {
        throw SimulationError("non-finite state in node '" + config.nodes[k].id + "' at step " + std::to_string(n),
                              n);
      }
      const Location after = cells[k].location;
      if (after != before) {
        if (after == Location::upstroke) trace.upstrokes[k].push_back(now);
        if (after == Location::resting && before == Location::plateau) trace.recoveries[k].push_back(now);
      }
    }

    if (uoa) {
      for (auto& e : edges) {
        const PathEvents ev = path_ta_step(e.state, cells[e.i], cells[e.j], e.params, dt, now);
        trace.relay_starts += static_cast<std::size_t>(ev.start_i) + static_cast<std::size_t>(ev.start_j);
      }
    }

    if ((n + 1) % settings.record_decimation == 0) record(now);
  }
  return trace;
}

CellRun simulate_cell(const CellParams& params, const std::vector<CellStimulus>& stimuli, double duration_ms,
                      double dt_ms, std::size_t record_decimation, Integrator integrator) {
  check_settings({dt_ms, duration_ms, record_decimation, integrator, false});
  std::vector<StepWindow> windows;
  for (const auto& s : stimuli) windows.push_back(stimulus_window(0, s.time_ms, s.duration_ms, s.amplitude_mv, dt_ms));

  const std::size_t steps = step_count(duration_ms, dt_ms);
  const double f_limit = stable_f_limit(params, dt_ms);
  CellRun run;
  run.times.reserve(steps / record_decimation + 1);
  run.potential.reserve(steps / record_decimation + 1);
  CellState cell;
  run.times.push_back(0.0);
  run.potential.push_back(membrane_potential(cell, params));

  for (std::size_t n = 0; n < steps; ++n) {
    const double now = static_cast<double>(n + 1) * dt_ms;
    double v_in = 0.0;
    for (const auto& w : windows) {
      if (n >= w.begin && n < w.end) v_in += w.amplitude;
    }
    const Location before = cell.location;
    try {
      advance_cell(cell, v_in, params, f_limit, dt_ms, integrator, now);
    } catch (const NonFiniteState&) {
      throw SimulationError("non-finite cell state at step " + std::to_string(n), n);
    }
    if (cell.location != before) {
      if (cell.location == Location::upstroke) run.upstrokes.push_back(now);
      if (cell.location == Location::resting && before == Location::plateau) run.recoveries.push_back(now);
    }
    if ((n + 1) % record_decimation == 0) {
      run.times.push_back(now);
      run.potential.push_back(membrane_potential(cell, params));
    }
  }
  return run;
}

double single_beat_apd_ms(const CellParams& params, double dt_ms, double horizon_ms) {
  const auto run = simulate_cell(params, {{0.0, 50.0, 2.0}}, horizon_ms, dt_ms, std::numeric_limits<std::size_t>::max());
  if (run.upstrokes.empty() || run.recoveries.empty()) return -1.0;
  return run.recoveries.front() - run.upstrokes.front();
}

std::vector<BeatMeasure> measure_apd_di(const std::vector<double>& times, const std::vector<double>& potential,
                                        const std::vector<double>& onsets, double threshold_frac) {
  if (times.size() != potential.size()) throw std::invalid_argument("measure_apd_di: series lengths differ");
  std::vector<BeatMeasure> beats;
  const auto index_at = [&times](double t) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
  };

  for (std::size_t k = 0; k < onsets.size(); ++k) {
    const std::size_t begin = index_at(onsets[k]);
    const std::size_t end = k + 1 < onsets.size() ? index_at(onsets[k + 1]) : times.size();
    if (begin >= end) break;
    const auto peak_it = std::max_element(potential.begin() + static_cast<std::ptrdiff_t>(begin),
                                          potential.begin() + static_cast<std::ptrdiff_t>(end));
    const auto peak_idx = static_cast<std::size_t>(peak_it - potential.begin());
    const double peak = *peak_it;
    const double level = threshold_frac * peak;

    std::optional<double> fall;
    for (std::size_t m = peak_idx + 1; m < end; ++m) {
      if (potential[m] <= level) {
        const double v0 = potential[m - 1];
        const double v1 = potential[m];
        const double w = v0 == v1 ? 1.0 : (v0 - level) / (v0 - v1);
        fall = times[m - 1] + w * (times[m] - times[m - 1]);
        break;
      }
    }
    if (!fall) break;
    BeatMeasure beat{onsets[k], peak, *fall - onsets[k], std::nullopt};
    if (k + 1 < onsets.size()) beat.di_ms = onsets[k + 1] - *fall;
    beats.push_back(beat);
  }
  return beats;
}

std::vector<BeatMeasure> measure_apd_di(const std::vector<double>& times, const std::vector<double>& potential,
                                        double threshold_frac) {
  if (potential.empty()) return {};
  const double level = threshold_frac * *std::max_element(potential.begin(), potential.end());
  std::vector<double> onsets;
  for (std::size_t m = 0; m < potential.size(); ++m) {
    if (potential[m] <= level) continue;
    if (m == 0) {
      onsets.push_back(times[0]);
    } else if (potential[m - 1] <= level) {
      const double w = (level - potential[m - 1]) / (potential[m] - potential[m - 1]);
      onsets.push_back(times[m - 1] + w * (times[m] - times[m - 1]));
    }
  }
  return measure_apd_di(times, potential, onsets, threshold_frac);
}

RestitutionResult restitution_curve(const CellParams& params, const std::vector<double>& bcl_list,
                                    const RestitutionOptions& options) {
  const bool first_beat = options.protocol == RestitutionProtocol::first_beat;
  if (!first_beat && options.beats_per_bcl < 10) throw std::invalid_argument("beats_per_bcl must be >= 10");
  const std::size_t beats = first_beat ? 2 : options.beats_per_bcl;

  RestitutionResult result;
  auto fmt = [](double x) {
    std::string s = std::to_string(x);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };

  for (double bcl : bcl_list) {
    if (!(bcl > 0.0)) {
      result.diagnostics.push_back("BCL " + fmt(bcl) + " ms skipped: not positive");
      continue;
    }
    std::vector<CellStimulus> stimuli;
    for (std::size_t b = 0; b < beats; ++b) {
      CellStimulus s = options.stimulus;
      s.time_ms = options.first_stimulus_ms + static_cast<double>(b) * bcl;
      stimuli.push_back(s);
    }
    const double tail = std::max(bcl, 1000.0);
    const double duration = stimuli.back().time_ms + tail;
    const CellRun run =
        simulate_cell(params, stimuli, duration, options.dt_ms, options.record_decimation, Integrator::rk4);
    const auto measured = measure_apd_di(run.times, run.potential, run.upstrokes, options.threshold_frac);
    for (const auto& m : measured) result.all_apds_ms.push_back(m.apd_ms);

    // 1:1 capture: exactly one upstroke per stimulus, each before the next stimulus.
    bool one_to_one = run.upstrokes.size() == beats;
    for (std::size_t b = 0; one_to_one && b < beats; ++b) {
      const double lo = stimuli[b].time_ms;
      const double hi = b + 1 < beats ? stimuli[b + 1].time_ms : duration;
      one_to_one = run.upstrokes[b] >= lo && run.upstrokes[b] < hi;
    }
    if (!one_to_one) {
      result.diagnostics.push_back("BCL " + fmt(bcl) + " ms skipped: no 1:1 capture (" +
                                   std::to_string(run.upstrokes.size()) + " responses to " +
                                   std::to_string(beats) + " stimuli)");
      continue;
    }
    if (measured.size() < beats || !measured[beats - 2].di_ms) {
      result.diagnostics.push_back("BCL " + fmt(bcl) + " ms skipped: beat " + std::to_string(beats) +
                                   " did not repolarise to the threshold");
      continue;
    }
    result.points.push_back({bcl, *measured[beats - 2].di_ms, measured[beats - 1].apd_ms});
  }
  if (result.points.empty()) result.diagnostics.push_back("no BCL produced a restitution point");
  return result;
}

std::vector<Activation> activation_report(const Trace& trace) {
  std::vector<Activation> out;
  for (std::size_t k = 0; k < trace.node_ids.size(); ++k) {
    Activation a{trace.node_ids[k], std::nullopt, 0};
    if (k < trace.upstrokes.size() && !trace.upstrokes[k].empty()) {
      a.first_q2_entry_ms = trace.upstrokes[k].front();
      a.q2_entry_count = trace.upstrokes[k].size();
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace heartsim

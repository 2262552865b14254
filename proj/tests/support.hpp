#pragma once

#include "heartsim/config_io.hpp"
#include "heartsim/engine.hpp"
#include "heartsim/network.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace heartsim::testing {

/// Two UoA cells "i" and "j" joined by one path.
inline HeartConfig two_cells(double delta_ms, std::vector<Stimulus> stimuli, PathParams params = {}) {
  HeartConfig c;
  c.name = "two_cells";
  c.nodes = {NodeConfig{"i", Region::atrial, {}}, NodeConfig{"j", Region::atrial, {}}};
  params.delta_ij = delta_ms;
  params.delta_ji = delta_ms;
  c.paths = {PathConfig{"i", "j", params}};
  c.stimuli = std::move(stimuli);
  c.sa_node = "i";
  return c;
}

inline SimSettings settings(double duration_ms, double dt_ms = 0.0005, std::size_t decimation = 200) {
  SimSettings s;
  s.duration_ms = duration_ms;
  s.dt_ms = dt_ms;
  s.record_decimation = decimation;
  return s;
}

inline const std::vector<double>& upstrokes(const Trace& t, const std::string& id) {
  return t.upstrokes.at(*t.node_index(id));
}

inline std::vector<std::string> ids_in_region(const HeartConfig& c, Region r) {
  std::vector<std::string> out;
  for (const auto& n : c.nodes) {
    if (n.region == r) out.push_back(n.id);
  }
  return out;
}

/// 10%-of-peak APDs of every complete beat of one node in a recorded trace.
inline std::vector<double> node_apds(const Trace& t, const std::string& id) {
  const auto k = static_cast<Eigen::Index>(*t.node_index(id));
  std::vector<double> v(t.times.size());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = t.potential(static_cast<Eigen::Index>(r), k);
  std::vector<double> out;
  for (const auto& b : measure_apd_di(t.times, v, upstrokes(t, id))) out.push_back(b.apd_ms);
  return out;
}

inline bool contains_all_ones(const std::vector<std::size_t>& counts) {
  return std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 1; });
}

}  // namespace heartsim::testing

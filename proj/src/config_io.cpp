#include "heartsim/config_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace heartsim {

using nlohmann::json;

namespace {

constexpr std::array<char, 3> kVarNames{'x', 'y', 'z'};

std::string alpha_key(int row, int location) {
  return std::string("alpha_") + kVarNames[static_cast<std::size_t>(row)] + std::to_string(location);
}

std::string beta_key(int row) { return std::string("beta_") + kVarNames[static_cast<std::size_t>(row)]; }

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

template <typename T>
void read_opt(const json& j, const std::string& key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("bad value for '" + key + "': " + e.what());
    }
  }
}

const std::set<std::string>& cell_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"variant", "v_r", "v_t", "v_o", "f_cap", "f_cap_enabled", "q3_f_theta_enabled"};
    for (int r = 0; r < 3; ++r) {
      k.insert(beta_key(r));
      for (int l = 0; l < 4; ++l) k.insert(alpha_key(r, l));
    }
    return k;
  }();
  return keys;
}

const std::set<std::string> kPathKeys{"delta_ij",     "delta_ji",       "delta_ignore_i", "delta_ignore_j",
                                      "gamma_ij",     "gamma_ji",       "sigma_ij",       "sigma_ji",
                                      "block_ij",     "block_ji",       "refractory_window_ms",
                                      "gain_ij",      "gain_ji"};

const std::set<std::string> kConfigKeys{"schema_version", "name",          "nodes",           "paths",
                                        "stimuli",        "sa_cycle_ms",   "sa_node",         "sa_first_ms",
                                        "sa_amplitude_mv", "sa_duration_ms", "coupling_mode", "a_m",
                                        "c_m"};

json stimulus_to_json(const Stimulus& s) {
  return json{{"node_id", s.node_id}, {"time_ms", s.time_ms}, {"amplitude_mv", s.amplitude_mv},
              {"duration_ms", s.duration_ms}};
}

Stimulus stimulus_from_json(const json& j) {
  reject_unknown(j, {"node_id", "time_ms", "amplitude_mv", "duration_ms"}, "stimulus");
  Stimulus s;
  if (!j.contains("node_id")) throw std::invalid_argument("stimulus: missing node_id");
  read_if(j, "node_id", s.node_id);
  read_if(j, "time_ms", s.time_ms);
  read_if(j, "amplitude_mv", s.amplitude_mv);
  read_if(j, "duration_ms", s.duration_ms);
  return s;
}

NodeConfig node_from_json(const json& j) {
  reject_unknown(j, {"id", "region", "cell", "oxford_d"}, "node");
  NodeConfig n;
  if (!j.contains("id")) throw std::invalid_argument("node: missing id");
  read_if(j, "id", n.id);
  if (auto it = j.find("region"); it != j.end()) n.region = region_from_string(it->get<std::string>());
  if (auto it = j.find("cell"); it != j.end()) n.cell = cell_overrides_from_json(*it);
  read_if(j, "oxford_d", n.oxford_d);
  return n;
}

json node_to_json(const NodeConfig& n) {
  return json{{"id", n.id}, {"region", to_string(n.region)}, {"cell", to_json(n.cell)}, {"oxford_d", n.oxford_d}};
}

PathConfig path_from_json(const json& j) {
  std::set<std::string> keys = kPathKeys;
  keys.insert("from");
  keys.insert("to");
  reject_unknown(j, keys, "path");
  PathConfig p;
  if (!j.contains("from") || !j.contains("to")) throw std::invalid_argument("path: missing from/to");
  read_if(j, "from", p.from);
  read_if(j, "to", p.to);
  json params = j;
  params.erase("from");
  params.erase("to");
  p.params = path_params_from_json(params);
  return p;
}

}  // namespace

json to_json(const CellOverrides& o) {
  json j = json::object();
  if (o.variant) j["variant"] = to_string(*o.variant);
  for (int r = 0; r < 3; ++r) {
    for (int l = 0; l < 4; ++l) {
      if (const auto& a = o.alpha_at(r, l)) j[alpha_key(r, l)] = *a;
    }
    if (const auto& b = o.beta[static_cast<std::size_t>(r)]) j[beta_key(r)] = *b;
  }
  if (o.v_r) j["v_r"] = *o.v_r;
  if (o.v_t) j["v_t"] = *o.v_t;
  if (o.v_o) j["v_o"] = *o.v_o;
  if (o.f_cap) j["f_cap"] = *o.f_cap;
  if (o.f_cap_enabled) j["f_cap_enabled"] = *o.f_cap_enabled;
  if (o.q3_f_theta_enabled) j["q3_f_theta_enabled"] = *o.q3_f_theta_enabled;
  return j;
}

CellOverrides cell_overrides_from_json(const json& j) {
  reject_unknown(j, cell_keys(), "cell");
  CellOverrides o;
  if (auto it = j.find("variant"); it != j.end()) o.variant = cell_variant_from_string(it->get<std::string>());
  for (int r = 0; r < 3; ++r) {
    for (int l = 0; l < 4; ++l) read_opt(j, alpha_key(r, l), o.alpha_at(r, l));
    read_opt(j, beta_key(r), o.beta[static_cast<std::size_t>(r)]);
  }
  read_opt(j, "v_r", o.v_r);
  read_opt(j, "v_t", o.v_t);
  read_opt(j, "v_o", o.v_o);
  read_opt(j, "f_cap", o.f_cap);
  read_opt(j, "f_cap_enabled", o.f_cap_enabled);
  read_opt(j, "q3_f_theta_enabled", o.q3_f_theta_enabled);
  return o;
}

json to_json(const PathParams& p) {
  return json{{"delta_ij", p.delta_ij},
              {"delta_ji", p.delta_ji},
              {"delta_ignore_i", p.delta_ignore_i},
              {"delta_ignore_j", p.delta_ignore_j},
              {"gamma_ij", p.gamma_ij},
              {"gamma_ji", p.gamma_ji},
              {"sigma_ij", p.sigma_ij},
              {"sigma_ji", p.sigma_ji},
              {"block_ij", p.block_ij},
              {"block_ji", p.block_ji},
              {"refractory_window_ms", p.refractory_window_ms},
              {"gain_ij", p.gain_ij},
              {"gain_ji", p.gain_ji}};
}

PathParams path_params_from_json(const json& j, PathParams p) {
  reject_unknown(j, kPathKeys, "path");
  read_if(j, "delta_ij", p.delta_ij);
  read_if(j, "delta_ji", p.delta_ji);
  read_if(j, "delta_ignore_i", p.delta_ignore_i);
  read_if(j, "delta_ignore_j", p.delta_ignore_j);
  read_if(j, "gamma_ij", p.gamma_ij);
  read_if(j, "gamma_ji", p.gamma_ji);
  read_if(j, "sigma_ij", p.sigma_ij);
  read_if(j, "sigma_ji", p.sigma_ji);
  read_if(j, "block_ij", p.block_ij);
  read_if(j, "block_ji", p.block_ji);
  read_if(j, "refractory_window_ms", p.refractory_window_ms);
  read_if(j, "gain_ij", p.gain_ij);
  read_if(j, "gain_ji", p.gain_ji);
  return p;
}

json to_json(const HeartConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["coupling_mode"] = to_string(c.coupling_mode);
  j["a_m"] = c.a_m;
  j["c_m"] = c.c_m;
  j["sa_node"] = c.sa_node;
  j["sa_first_ms"] = c.sa_first_ms;
  j["sa_amplitude_mv"] = c.sa_amplitude_mv;
  j["sa_duration_ms"] = c.sa_duration_ms;
  j["sa_cycle_ms"] = c.sa_cycle_ms ? json(*c.sa_cycle_ms) : json(nullptr);
  j["nodes"] = json::array();
  for (const auto& n : c.nodes) j["nodes"].push_back(node_to_json(n));
  j["paths"] = json::array();
  for (const auto& p : c.paths) {
    json pj = to_json(p.params);
    pj["from"] = p.from;
    pj["to"] = p.to;
    j["paths"].push_back(std::move(pj));
  }
  j["stimuli"] = json::array();
  for (const auto& s : c.stimuli) j["stimuli"].push_back(stimulus_to_json(s));
  return j;
}

HeartConfig heart_config_from_json(const json& j) {
  reject_unknown(j, kConfigKeys, "config");
  HeartConfig c;
  read_if(j, "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    throw std::invalid_argument("unsupported schema_version " + std::to_string(c.schema_version));
  read_if(j, "name", c.name);
  if (auto it = j.find("coupling_mode"); it != j.end())
    c.coupling_mode = coupling_mode_from_string(it->get<std::string>());
  read_if(j, "a_m", c.a_m);
  read_if(j, "c_m", c.c_m);
  read_if(j, "sa_node", c.sa_node);
  read_if(j, "sa_first_ms", c.sa_first_ms);
  read_if(j, "sa_amplitude_mv", c.sa_amplitude_mv);
  read_if(j, "sa_duration_ms", c.sa_duration_ms);
  if (auto it = j.find("sa_cycle_ms"); it != j.end() && !it->is_null()) c.sa_cycle_ms = it->get<double>();
  if (auto it = j.find("nodes"); it != j.end()) {
    for (const auto& n : *it) c.nodes.push_back(node_from_json(n));
  }
  if (auto it = j.find("paths"); it != j.end()) {
    for (const auto& p : *it) c.paths.push_back(path_from_json(p));
  }
  if (auto it = j.find("stimuli"); it != j.end()) {
    for (const auto& s : *it) c.stimuli.push_back(stimulus_from_json(s));
  }
  return c;
}

HeartConfig apply_overrides(const HeartConfig& config, const json& overrides) {
  HeartConfig out = config;
  if (!overrides.is_object()) throw std::invalid_argument("overrides: expected an object");

  json scalars = overrides;
  scalars.erase("nodes");
  scalars.erase("paths");
  scalars.erase("stimuli");
  if (!scalars.empty()) {
    json base = to_json(out);
    base.merge_patch(scalars);
    out = heart_config_from_json(base);
  }

  if (auto it = overrides.find("nodes"); it != overrides.end()) {
    for (const auto& [id, patch] : it->items()) {
      auto idx = out.node_index(id);
      if (!idx) throw std::invalid_argument("overrides: unknown node '" + id + "'");
      auto& node = out.nodes[*idx];
      reject_unknown(patch, {"region", "cell", "oxford_d"}, "node override");
      if (auto r = patch.find("region"); r != patch.end()) node.region = region_from_string(r->get<std::string>());
      if (auto cell = patch.find("cell"); cell != patch.end()) node.cell.merge(cell_overrides_from_json(*cell));
      read_if(patch, "oxford_d", node.oxford_d);
    }
  }

  if (auto it = overrides.find("paths"); it != overrides.end()) {
    for (const auto& [key, patch] : it->items()) {
      const auto dash = key.find('-');
      if (dash == std::string::npos) throw std::invalid_argument("overrides: path key must be FROM-TO: " + key);
      const std::string from = key.substr(0, dash);
      const std::string to = key.substr(dash + 1);
      bool found = false;
      for (auto& p : out.paths) {
        if (p.from == from && p.to == to) {
          p.params = path_params_from_json(patch, p.params);
          found = true;
        }
      }
      if (!found) throw std::invalid_argument("overrides: unknown path '" + key + "'");
    }
  }

  if (auto it = overrides.find("stimuli"); it != overrides.end()) {
    for (const auto& s : *it) out.stimuli.push_back(stimulus_from_json(s));
  }
  return out;
}

HeartConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path.string() + ": " + e.what());
  }
  return heart_config_from_json(j);
}

void save_config(const HeartConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << canonical_dump(to_json(config));
}

std::string canonical_dump(const json& j) {
  // nlohmann::json objects are std::map-backed, so keys are already sorted.
  return j.dump(2) + "\n";
}

std::string config_hash(const HeartConfig& config) {
  const std::string text = canonical_dump(to_json(config));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace heartsim

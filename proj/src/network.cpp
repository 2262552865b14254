#include "heartsim/network.hpp"

#include "heartsim/config_io.hpp"
#include "heartsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace heartsim {

// Defined in the generated default_heart_data.cpp.
extern const char* const kDefaultHeartJson;

std::string_view to_string(Region region) {
  switch (region) {
    case Region::atrial: return "atrial";
    case Region::av: return "av";
    case Region::ventricular: return "ventricular";
    case Region::purkinje: return "purkinje";
  }
  return "unknown";
}

Region region_from_string(std::string_view name) {
  if (name == "atrial") return Region::atrial;
  if (name == "av") return Region::av;
  if (name == "ventricular") return Region::ventricular;
  if (name == "purkinje") return Region::purkinje;
  throw std::invalid_argument("unknown region: " + std::string(name));
}

std::string_view to_string(CouplingMode mode) {
  return mode == CouplingMode::uoa_h_k ? "uoa_h_k" : "oxford_g_k";
}

CouplingMode coupling_mode_from_string(std::string_view name) {
  if (name == "uoa_h_k" || name == "uoa") return CouplingMode::uoa_h_k;
  if (name == "oxford_g_k" || name == "oxford") return CouplingMode::oxford_g_k;
  throw std::invalid_argument("unknown coupling mode: " + std::string(name));
}

void CellOverrides::merge(const CellOverrides& other) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(variant, other.variant);
  for (std::size_t k = 0; k < alpha.size(); ++k) take(alpha[k], other.alpha[k]);
  for (std::size_t k = 0; k < beta.size(); ++k) take(beta[k], other.beta[k]);
  take(v_r, other.v_r);
  take(v_t, other.v_t);
  take(v_o, other.v_o);
  take(f_cap, other.f_cap);
  take(f_cap_enabled, other.f_cap_enabled);
  take(q3_f_theta_enabled, other.q3_f_theta_enabled);
}

CellParams CellOverrides::resolve(CellVariant default_variant) const {
  CellParams p = cell_params_preset(variant.value_or(default_variant));
  for (int r = 0; r < 3; ++r) {
    for (int l = 0; l < 4; ++l) {
      if (const auto& a = alpha_at(r, l)) p.alpha(r, l) = *a;
    }
    if (const auto& b = beta[static_cast<std::size_t>(r)]) p.beta(r) = *b;
  }
  if (v_r) p.v_r = *v_r;
  if (v_t) p.v_t = *v_t;
  if (v_o) p.v_o = *v_o;
  if (f_cap) p.f_cap = *f_cap;
  if (f_cap_enabled) p.f_cap_enabled = *f_cap_enabled;
  if (q3_f_theta_enabled) p.q3_f_theta_enabled = *q3_f_theta_enabled;
  return p;
}

std::optional<std::size_t> HeartConfig::node_index(std::string_view id) const {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].id == id) return k;
  }
  return std::nullopt;
}

std::vector<Stimulus> HeartConfig::stimulus_schedule(double until_ms) const {
  std::vector<Stimulus> out = stimuli;
  if (sa_cycle_ms && *sa_cycle_ms > 0.0) {
    for (long k = 0;; ++k) {
      const double t = sa_first_ms + static_cast<double>(k) * *sa_cycle_ms;
      if (t >= until_ms) break;
      out.push_back({sa_node, t, sa_amplitude_mv, sa_duration_ms});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Stimulus& a, const Stimulus& b) { return a.time_ms < b.time_ms; });
  return out;
}

// Scenarios ------------------------------------------------------------------

namespace {

struct ScenarioInfo {
  ScenarioName name;
  std::string_view key;
  std::string_view description;
};

constexpr std::array<ScenarioInfo, 10> kScenarios{{
    {ScenarioName::avnrt, "avnrt",
     "AV node re-entrant tachycardia: early second SA stimulus at 220 ms re-enters via the slow pathway"},
    {ScenarioName::bradycardia, "bradycardia", "Slow SA pacing (long SA cycle)"},
    {ScenarioName::bundle_branch_block_left, "bundle_branch_block_left",
     "Left bundle branch block: weaker coupling and longer conduction from the His bundle into the left branch"},
    {ScenarioName::bundle_branch_block_right, "bundle_branch_block_right",
     "Right bundle branch block: weaker coupling and longer conduction from the His bundle into the right branch"},
    {ScenarioName::heart_block, "heart_block",
     "Heart block: weaker atrial input to the AV node and longer AV conduction"},
    {ScenarioName::long_qt, "long_qt", "Long Q-T syndrome: slower ventricular repolarisation (smaller alpha_y3)"},
    {ScenarioName::normal, "normal", "Normal cardiac cycle: SA node stimulated at 10 ms"},
    {ScenarioName::tachycardia, "tachycardia", "Fast SA pacing (short SA cycle)"},
    {ScenarioName::va_conduction, "va_conduction",
     "VA conduction: a ventricular node (RV1) is stimulated at 10 ms before any SA activity"},
    {ScenarioName::wpw, "wpw",
     "Wolff-Parkinson-White syndrome: accessory pathway between the left atrium and left ventricle"},
}};

const ScenarioInfo& info(ScenarioName name) {
  for (const auto& s : kScenarios) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown scenario");
}

Stimulus sa_stimulus(const HeartConfig& c, double t) { return {c.sa_node, t, c.sa_amplitude_mv, c.sa_duration_ms}; }

std::size_t require_node(const HeartConfig& c, std::string_view id) {
  auto idx = c.node_index(id);
  if (!idx) throw std::invalid_argument("scenario needs node '" + std::string(id) + "' which is not in the config");
  return *idx;
}

/// Weakens coupling and lengthens conduction from `upstream` into `downstream`.
bool slow_into(HeartConfig& c, std::string_view upstream, std::string_view downstream, double sigma_factor,
               double delta_factor) {
  bool found = false;
  for (auto& p : c.paths) {
    if (p.from == upstream && p.to == downstream) {
      p.params.sigma_ij *= sigma_factor;
    } else if (p.from == downstream && p.to == upstream) {
      p.params.sigma_ji *= sigma_factor;
    } else {
      continue;
    }
    p.params.delta_ij *= delta_factor;
    p.params.delta_ji *= delta_factor;
    found = true;
  }
  return found;
}

}  // namespace

std::string_view to_string(ScenarioName name) { return info(name).key; }

ScenarioName scenario_from_string(std::string_view name) {
  for (const auto& s : kScenarios) {
    if (s.key == name) return s.name;
  }
  throw std::invalid_argument("unknown scenario: " + std::string(name));
}

std::vector<ScenarioName> all_scenarios() {
  std::vector<ScenarioName> out;
  for (const auto& s : kScenarios) out.push_back(s.name);
  return out;
}

std::string_view scenario_description(ScenarioName name) { return info(name).description; }

HeartConfig default_heart() {
  static const HeartConfig heart = heart_config_from_json(nlohmann::json::parse(kDefaultHeartJson));
  return heart;
}

HeartConfig avnrt_four_cell_demo(std::vector<double> stimulus_times_ms) {
  HeartConfig c;
  c.name = "avnrt_four_cell_demo";
  auto node = [](std::string id, Region region, double alpha_y3) {
    NodeConfig n{std::move(id), region, {}};
    n.cell.alpha_at(1, 3) = alpha_y3;
    return n;
  };
  // The fast pathway repolarises slowly; the slow pathway repolarises quickly.
  c.nodes = {node("AT1", Region::atrial, 0.07), node("FP1", Region::av, 0.024), node("AV1", Region::av, 0.045),
             node("SP1", Region::av, 0.06)};
  auto path = [](std::string from, std::string to, double delta) {
    PathConfig p{std::move(from), std::move(to), {}};
    p.params.delta_ij = delta;
    p.params.delta_ji = delta;
    return p;
  };
  c.paths = {path("AT1", "FP1", 10.0), path("FP1", "AV1", 10.0), path("AT1", "SP1", 60.0),
             path("SP1", "AV1", 60.0)};
  for (double t : stimulus_times_ms) c.stimuli.push_back({"AT1", t, 50.0, 2.0});
  c.sa_node = "AT1";
  return c;
}

HeartConfig apply_scenario(const HeartConfig& config, const Scenario& scenario) {
  HeartConfig c = config;
  const auto& o = scenario.options;
  const auto add_sa = [&c] {
    require_node(c, c.sa_node);
    c.stimuli.push_back(sa_stimulus(c, c.sa_first_ms));
  };

  switch (scenario.name) {
    case ScenarioName::normal:
      add_sa();
      break;
    case ScenarioName::heart_block: {
      add_sa();
      require_node(c, o.av_node);
      bool any = false;
      for (const auto& input : o.av_inputs) any |= slow_into(c, input, o.av_node, o.block_sigma_factor, o.block_delta_factor);
      if (!any) throw std::invalid_argument("heart_block: no path from the configured AV inputs into the AV node");
      break;
    }
    case ScenarioName::bundle_branch_block_right:
    case ScenarioName::bundle_branch_block_left: {
      add_sa();
      const auto& branch =
          scenario.name == ScenarioName::bundle_branch_block_right ? o.right_branch : o.left_branch;
      require_node(c, o.his_node);
      require_node(c, branch);
      // A bundle branch block slows the branch without abolishing it.
      if (!slow_into(c, o.his_node, branch, std::sqrt(o.block_sigma_factor), o.block_delta_factor * 2.0))
        throw std::invalid_argument("bundle branch block: no path between His bundle and branch");
      break;
    }
    case ScenarioName::long_qt:
      add_sa();
      for (auto& n : c.nodes) {
        if (n.region != Region::ventricular) continue;
        const double current = n.cell.resolve().alpha(1, 3);
        n.cell.alpha_at(1, 3) = current * o.long_qt_alpha3y_factor;
      }
      break;
    case ScenarioName::va_conduction:
      require_node(c, o.va_node);
      c.stimuli.push_back({o.va_node, o.va_time_ms, c.sa_amplitude_mv, c.sa_duration_ms});
      break;
    case ScenarioName::wpw: {
      add_sa();
      require_node(c, o.wpw_from);
      require_node(c, o.wpw_to);
      PathConfig accessory{o.wpw_from, o.wpw_to, {}};
      accessory.params.delta_ij = o.wpw_delta_ms;
      accessory.params.delta_ji = o.wpw_delta_ms;
      c.paths.push_back(accessory);
      break;
    }
    case ScenarioName::avnrt:
      require_node(c, c.sa_node);
      for (double t : o.avnrt_times_ms) c.stimuli.push_back(sa_stimulus(c, t));
      break;
    case ScenarioName::bradycardia:
      require_node(c, c.sa_node);
      c.sa_cycle_ms = o.bradycardia_cycle_ms;
      break;
    case ScenarioName::tachycardia:
      require_node(c, c.sa_node);
      c.sa_cycle_ms = o.tachycardia_cycle_ms;
      break;
  }
  if (!c.name.empty()) c.name += "+";
  c.name += to_string(scenario.name);
  return c;
}

// Validation -----------------------------------------------------------------

std::vector<Diagnostic> validate_config(const HeartConfig& config, double dt_ms) {
  std::vector<Diagnostic> out;
  auto error = [&out](std::string msg) { out.push_back({Severity::error, std::move(msg)}); };
  auto warning = [&out](std::string msg) { out.push_back({Severity::warning, std::move(msg)}); };

  if (config.schema_version != kSchemaVersion)
    error("schema_version " + std::to_string(config.schema_version) + " is not supported");
  if (!(config.a_m > 0.0)) error("a_m must be positive");
  if (!(config.c_m > 0.0)) error("c_m must be positive");
  if (config.sa_cycle_ms && !(*config.sa_cycle_ms > 0.0)) error("sa_cycle_ms must be positive");

  std::set<std::string> ids;
  std::vector<double> nominal_apd(config.nodes.size(), 0.0);
  for (std::size_t k = 0; k < config.nodes.size(); ++k) {
    const auto& n = config.nodes[k];
    if (n.id.empty()) error("node with empty id");
    if (!ids.insert(n.id).second) error("duplicate node id '" + n.id + "'");
    try {
      const CellParams p = n.cell.resolve();
      check_cell_params(p);
      nominal_apd[k] = single_beat_apd_ms(p, 0.05);
    } catch (const std::exception& e) {
      error("node '" + n.id + "': " + e.what());
    }
  }

  auto fmt = [](double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.precision(10);
    s << v;
    return s.str();
  };

  for (const auto& p : config.paths) {
    const std::string name = p.from + "-" + p.to;
    const auto i = config.node_index(p.from);
    const auto j = config.node_index(p.to);
    if (!i) error("path " + name + ": unknown endpoint '" + p.from + "'");
    if (!j) error("path " + name + ": unknown endpoint '" + p.to + "'");
    if (p.from == p.to) error("path " + name + ": endpoints must differ");
    const auto& q = p.params;
    auto positive = [&](double v, const char* field) {
      if (!(v > 0.0)) error("path " + name + ": " + field + " must be positive (got " + fmt(v) + ")");
    };
    positive(q.delta_ij, "delta_ij");
    positive(q.delta_ji, "delta_ji");
    positive(q.gamma_ij, "gamma_ij");
    positive(q.gamma_ji, "gamma_ji");
    positive(q.sigma_ij, "sigma_ij");
    positive(q.sigma_ji, "sigma_ji");
    if (q.delta_ignore_i < 0.0 || q.delta_ignore_j < 0.0) error("path " + name + ": delta_ignore must be >= 0");

    for (auto [delta, field] : {std::pair{q.delta_ij, "delta_ij"}, std::pair{q.delta_ji, "delta_ji"}}) {
      if (!(delta > 0.0) || !(dt_ms > 0.0)) continue;
      const double rounded = static_cast<double>(delay_steps(delta, dt_ms)) * dt_ms;
      if (std::abs(rounded - delta) > 1e-9 * std::max(1.0, delta))
        warning("path " + name + ": " + field + "=" + fmt(delta) + " ms rounded to " + fmt(rounded) +
                " ms on the dt=" + fmt(dt_ms) + " grid");
    }
    if (i && j) {
      if (nominal_apd[*i] > 0.0 && q.delta_ij >= nominal_apd[*i])
        warning("path " + name + ": delta_ij=" + fmt(q.delta_ij) + " ms is not shorter than the source APD (" +
                fmt(nominal_apd[*i]) + " ms)");
      if (nominal_apd[*j] > 0.0 && q.delta_ji >= nominal_apd[*j])
        warning("path " + name + ": delta_ji=" + fmt(q.delta_ji) + " ms is not shorter than the source APD (" +
                fmt(nominal_apd[*j]) + " ms)");
    }
  }

  for (const auto& s : config.stimuli) {
    if (!config.node_index(s.node_id)) error("stimulus on unknown node '" + s.node_id + "'");
    if (s.time_ms < 0.0) error("stimulus time must be >= 0");
    if (!(s.amplitude_mv > 0.0)) error("stimulus amplitude must be positive");
    if (!(s.duration_ms > 0.0)) error("stimulus duration must be positive");
  }
  if (config.sa_cycle_ms && !config.node_index(config.sa_node))
    error("sa_node '" + config.sa_node + "' is not in the config");
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

}  // namespace heartsim

#include "outputs.hpp"

#include "heartsim/config_io.hpp"
#include "heartsim/engine.hpp"
#include "heartsim/network.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace heartsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string config_file;
  std::string scenario;
  std::string overrides_file;
  std::string coupling;
  std::string manifest_file;
  std::string output_dir = "out";
  double duration_ms = 1000.0;
  double dt_ms = 0.0005;
  std::size_t decimation = 200;
  std::string integrator = "rk4";
  bool record_paths = false;
  bool quiet = false;
};

struct RestitutionCliOptions {
  std::string preset = "uoa";
  double bcl_start = 200.0;
  double bcl_end = 1000.0;
  double bcl_step = 50.0;
  std::size_t beats = 10;
  std::string protocol = "steady_state";
  double dt_ms = 0.0005;
  std::string output;
};

std::string to_text(const auto& writer, const auto& value) {
  std::ostringstream s;
  writer(s, value);
  return s.str();
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    const char* tag = d.severity == Severity::error ? "error" : d.severity == Severity::warning ? "warning" : "info";
    std::cerr << tag << ": " << d.message << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("parse error in " + path + ": " + e.what());
  }
}

/// Resolves the run inputs into a config, the scenario applied (if any) and settings.
std::tuple<HeartConfig, std::optional<ScenarioName>, SimSettings> resolve_run(const RunOptions& o) {
  if (!o.manifest_file.empty()) {
    const json m = read_json_file(o.manifest_file);
    std::optional<ScenarioName> scenario;
    if (m.contains("scenario") && !m["scenario"].is_null())
      scenario = scenario_from_string(m["scenario"].get<std::string>());
    return {heart_config_from_json(m.at("config")), scenario, cli::settings_from_json(m.at("settings"))};
  }

  HeartConfig config = o.config_file.empty() ? default_heart() : load_config(o.config_file);
  std::optional<ScenarioName> scenario;
  if (!o.scenario.empty()) {
    try {
      scenario = scenario_from_string(o.scenario);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    config = apply_scenario(config, {*scenario, {}});
  }
  if (!o.overrides_file.empty()) config = apply_overrides(config, read_json_file(o.overrides_file));
  if (!o.coupling.empty()) config.coupling_mode = coupling_mode_from_string(o.coupling);

  SimSettings settings;
  settings.dt_ms = o.dt_ms;
  settings.duration_ms = o.duration_ms;
  settings.record_decimation = o.decimation;
  settings.integrator = integrator_from_string(o.integrator);
  settings.record_paths = o.record_paths;
  return {config, scenario, settings};
}

int cmd_run(const RunOptions& o) {
  auto [config, scenario, settings] = resolve_run(o);
  try {
    check_settings(settings);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto diagnostics = validate_config(config, settings.dt_ms);
  print_diagnostics(diagnostics);
  if (has_errors(diagnostics)) return kExitFailure;

  const auto t0 = std::chrono::steady_clock::now();
  const Trace trace = simulate(config, settings);
  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = o.output_dir;
  fs::create_directories(dir);
  json outputs{{"trace", "trace.csv"}, {"locations", "locations.csv"}, {"activation", "activation.csv"}};
  cli::write_file(dir / "trace.csv", to_text(cli::write_trace_csv, trace));
  cli::write_file(dir / "locations.csv", to_text(cli::write_locations_csv, trace));
  cli::write_file(dir / "activation.csv", to_text(cli::write_activation_csv, activation_report(trace)));
  if (settings.record_paths) {
    cli::write_file(dir / "path_locations.csv", to_text(cli::write_path_locations_csv, trace));
    outputs["path_locations"] = "path_locations.csv";
  }

  json manifest{{"tool", "heartsim"},
                {"tool_version", HEARTSIM_VERSION},
                {"schema_version", kSchemaVersion},
                {"scenario", scenario ? json(std::string(to_string(*scenario))) : json(nullptr)},
                {"config", to_json(config)},
                {"config_hash", trace.config_hash},
                {"settings", cli::settings_to_json(settings)},
                {"outputs", outputs}};
  cli::write_file(dir / "manifest.json", canonical_dump(manifest));

  if (!o.quiet) {
    std::cout << "simulated " << cli::fixed(settings.duration_ms, 1) << " ms (" << trace.steps << " steps, "
              << config.nodes.size() << " nodes, " << config.paths.size() << " paths) in " << cli::fixed(wall_s, 2)
              << " s\n"
              << "outputs written to " << dir.string() << '\n';
  }
  return kExitOk;
}

int cmd_restitution(const RestitutionCliOptions& o) {
  if (!(o.bcl_step > 0.0) || o.bcl_end < o.bcl_start || !(o.bcl_start > 0.0))
    throw UsageError("empty BCL range: need 0 < bcl-start <= bcl-end and bcl-step > 0");
  CellVariant variant;
  try {
    variant = cell_variant_from_string(o.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::vector<double> bcls;
  for (long k = 0;; ++k) {
    const double bcl = o.bcl_start + static_cast<double>(k) * o.bcl_step;
    if (bcl > o.bcl_end + 1e-9) break;
    bcls.push_back(bcl);
  }
  RestitutionOptions options;
  options.beats_per_bcl = o.beats;
  options.dt_ms = o.dt_ms;
  if (o.protocol == "first_beat") {
    options.protocol = RestitutionProtocol::first_beat;
  } else if (o.protocol != "steady_state") {
    throw UsageError("unknown protocol: " + o.protocol);
  }

  const auto result = restitution_curve(cell_params_preset(variant), bcls, options);
  for (const auto& d : result.diagnostics) std::cerr << "note: " << d << '\n';
  const std::string csv = to_text(cli::write_restitution_csv, result.points);
  if (o.output.empty()) {
    std::cout << csv;
  } else {
    cli::write_file(o.output, csv);
  }
  return result.points.empty() ? kExitFailure : kExitOk;
}

int cmd_list_scenarios() {
  for (ScenarioName s : all_scenarios()) std::cout << to_string(s) << "\t" << scenario_description(s) << '\n';
  return kExitOk;
}

json cell_params_to_json(const CellParams& p) {
  json alpha = json::object();
  const char* rows[] = {"x", "y", "z"};
  for (int r = 0; r < 3; ++r) {
    for (int l = 0; l < 4; ++l) alpha[std::string(rows[r]) + std::to_string(l)] = p.alpha(r, l);
  }
  return {{"variant", std::string(to_string(p.variant))},
          {"alpha", alpha},
          {"beta", {p.beta.x(), p.beta.y(), p.beta.z()}},
          {"composition", {p.composition.x(), p.composition.y(), p.composition.z()}},
          {"v_r", p.v_r},
          {"v_t", p.v_t},
          {"v_o", p.v_o},
          {"overshoot_drop", p.overshoot_drop},
          {"f_cap", p.f_cap},
          {"f_cap_theta", p.f_cap_theta},
          {"f_cap_enabled", p.f_cap_enabled},
          {"q3_f_theta_enabled", p.q3_f_theta_enabled}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-automaton cardiac conduction simulator"};
  app.set_version_flag("--version", std::string("heartsim ") + HEARTSIM_VERSION + " (config schema " +
                                        std::to_string(kSchemaVersion) + ")");
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a heart configuration or scenario");
  auto* config_opt = run_cmd->add_option("--config", run.config_file, "Heart config JSON (default: shipped heart)")
                         ->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", run.scenario, "Scenario applied to the config");
  run_cmd->add_option("--overrides", run.overrides_file, "JSON overrides applied after the scenario")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--duration-ms", run.duration_ms, "Simulated time")->capture_default_str();
  run_cmd->add_option("--dt-ms", run.dt_ms, "Step size")->capture_default_str();
  run_cmd->add_option("--decimation", run.decimation, "Record every Nth step")->capture_default_str();
  run_cmd->add_option("--coupling", run.coupling, "Coupling function")->check(CLI::IsMember({"uoa", "oxford"}));
  run_cmd->add_option("--integrator", run.integrator, "Integrator")
      ->check(CLI::IsMember({"rk4", "euler"}))
      ->capture_default_str();
  run_cmd->add_flag("--record-paths", run.record_paths, "Also write path TA locations");
  run_cmd->add_option("--output", run.output_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--from-manifest", run.manifest_file, "Re-run the inputs recorded in a manifest")
      ->check(CLI::ExistingFile)
      ->excludes(config_opt);
  run_cmd->add_flag("--quiet", run.quiet, "No summary on stdout");

  RestitutionCliOptions rest;
  auto* rest_cmd = app.add_subcommand("restitution", "Restitution curve of an isolated cell");
  rest_cmd->add_option("--preset", rest.preset, "uoa, stony_brook or oxford")->capture_default_str();
  rest_cmd->add_option("--bcl-start", rest.bcl_start, "First BCL (ms)")->capture_default_str();
  rest_cmd->add_option("--bcl-end", rest.bcl_end, "Last BCL (ms)")->capture_default_str();
  rest_cmd->add_option("--bcl-step", rest.bcl_step, "BCL increment (ms)")->capture_default_str();
  rest_cmd->add_option("--beats", rest.beats, "Beats per BCL")->capture_default_str()->check(CLI::Range(10, 1000));
  rest_cmd->add_option("--protocol", rest.protocol, "steady_state or first_beat")->capture_default_str();
  rest_cmd->add_option("--dt-ms", rest.dt_ms, "Step size")->capture_default_str();
  rest_cmd->add_option("--output", rest.output, "CSV file (default: stdout)");

  app.add_subcommand("list-scenarios", "List the built-in scenarios");

  std::string params_preset = "uoa";
  auto* params_cmd = app.add_subcommand("dump-params", "Print a cell preset as JSON");
  params_cmd->add_option("--preset", params_preset, "uoa, stony_brook or oxford")->capture_default_str();

  std::string export_which = "default";
  std::string export_path;
  auto* export_cmd = app.add_subcommand("export-config", "Write a built-in configuration as JSON");
  export_cmd->add_option("--which", export_which, "default or avnrt_demo")
      ->check(CLI::IsMember({"default", "avnrt_demo"}))
      ->capture_default_str();
  export_cmd->add_option("--output", export_path, "File (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (rest_cmd->parsed()) return cmd_restitution(rest);
    if (params_cmd->parsed()) {
      std::cout << canonical_dump(cell_params_to_json(cell_params_preset(cell_variant_from_string(params_preset))));
      return kExitOk;
    }
    if (export_cmd->parsed()) {
      const HeartConfig c = export_which == "default" ? default_heart() : avnrt_four_cell_demo();
      if (export_path.empty()) {
        std::cout << canonical_dump(to_json(c));
      } else {
        save_config(c, export_path);
      }
      return kExitOk;
    }
    return cmd_list_scenarios();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SimulationError& e) {
    std::cerr << "simulation failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

// Command-line front end: validate scenarios, run them into measurement
// logs, and post-process the outputs into plottable columns or a readable
// event timeline.
//
// Exit codes: 0 success, 1 missing input file, 2 invalid input, 3 IO failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aerialtwin/compliance.hpp"
#include "aerialtwin/engine.hpp"
#include "aerialtwin/outputs.hpp"
#include "aerialtwin/postprocess.hpp"
#include "aerialtwin/scenario.hpp"
#include "aerialtwin/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMissingInput = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitIoFailure = 3;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::string> registry_override() {
  const char* env = std::getenv("AERIAL_TWIN_REGISTRY");
  if (env != nullptr && *env != '\0') {
    return std::string(env);
  }
  return std::nullopt;
}

aerialtwin::compliance::Registry load_registry(const aerialtwin::experiment::Scenario& sc) {
  using namespace aerialtwin;
  std::optional<std::string> path = registry_override();
  if (!path) {
    path = sc.registry_path;
  }
  if (path) {
    const auto text = read_file(*path);
    if (!text) {
      throw std::system_error(errno, std::generic_category(), "cannot open registry: " + *path);
    }
    return compliance::parse_registry(*text);
  }
  return compliance::load_default_registry();
}

// Pre-check every declared transmitter against the registry at its initial
// position; reports each violation.
int compliance_precheck(const aerialtwin::experiment::Scenario& sc, std::ostream& out) {
  using namespace aerialtwin;
  const compliance::Registry registry = load_registry(sc);
  int violations = 0;
  for (const auto& node : sc.nodes) {
    if (!node.transmit) {
      continue;
    }
    compliance::EmissionRequest req;
    req.node_kind = node.kind == experiment::NodeKind::fixed
                        ? compliance::StationKind::fixed_station
                        : compliance::StationKind::mobile_station;
    // Portable multicopters will fly; pre-check them as airborne.
    req.airborne = node.kind == experiment::NodeKind::portable &&
                   node.limits.kind == vehicle::VehicleKind::multicopter;
    req.center_freq_hz = node.radio.center_freq_hz;
    req.bandwidth_hz = node.radio.bandwidth_hz;
    req.eirp_dbm = node.radio.tx_power_dbm + channel::peak_gain_dbi(node.radio.antenna);
    const auto result = compliance::validate_emission(req, registry);
    for (const auto reason : result.violations) {
      out << "violation: node " << node.id << ": " << compliance::to_string(reason) << "\n";
      ++violations;
    }
    for (const auto& warning : result.warnings) {
      out << "warning: node " << node.id << ": " << warning << "\n";
    }
  }
  return violations;
}

int cmd_validate(const std::string& scenario_path) {
  using namespace aerialtwin;
  if (!std::filesystem::exists(scenario_path)) {
    std::cerr << "error: cannot open " << scenario_path << "\n";
    return kExitMissingInput;
  }
  try {
    const experiment::Scenario sc = experiment::load_scenario_file(scenario_path);
    const int violations = compliance_precheck(sc, std::cout);
    if (violations > 0) {
      std::cout << "INVALID: " << violations << " compliance violation(s)\n";
      return kExitInvalidInput;
    }
    std::cout << "OK\n" << sc.effective.dump(2) << "\n";
    return kExitOk;
  } catch (const experiment::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, bool strict) {
  using namespace aerialtwin;
  if (!std::filesystem::exists(scenario_path)) {
    std::cerr << "error: cannot open " << scenario_path << "\n";
    return kExitMissingInput;
  }
  experiment::Scenario sc;
  try {
    sc = experiment::load_scenario_file(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  try {
    experiment::RunOptions opts;
    opts.strict = strict;
    opts.seed_override = seed;
    opts.registry_override_path = registry_override();
    const experiment::RunResult result = experiment::run(sc, opts);
    experiment::emit_outputs(sc, result, out_dir);
    std::cout << "ticks: " << result.ticks << "\n"
              << "overrides: " << result.overrides << "\n"
              << "rf_violations: " << result.rf_violations << "\n"
              << "commands_rejected: " << result.commands_rejected << "\n"
              << "events: " << result.log.events.size() << "\n"
              << "measurements: " << result.measurements.size() << "\n"
              << "out_dir: " << out_dir << "\n";
    return kExitOk;
  } catch (const std::system_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

int cmd_plot_data(const std::string& csv_path, const std::string& metric,
                  const std::string& group_by) {
  using namespace aerialtwin;
  const auto text = read_file(csv_path);
  if (!text) {
    std::cerr << "error: cannot open " << csv_path << "\n";
    return kExitMissingInput;
  }
  try {
    experiment::parse_metric(metric);  // reject unknown metric names
    const auto rows = post::parse_measurements_csv(*text);
    std::cout << post::pivot(rows, metric, post::parse_group_by(group_by));
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

int cmd_replay(const std::string& events_path) {
  using namespace aerialtwin;
  const auto text = read_file(events_path);
  if (!text) {
    std::cerr << "error: cannot open " << events_path << "\n";
    return kExitMissingInput;
  }
  try {
    std::cout << post::replay(*text);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aerial-twin: batch digital twin of an aerial Open RAN testbed"};
  app.set_version_flag("--version", aerialtwin::kVersion);
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string metric = "rsrp_dbm";
  std::string group_by = "node";
  std::string data_path;
  std::optional<std::uint64_t> seed;
  bool strict = false;

  auto* validate = app.add_subcommand("validate", "Validate a scenario and pre-check compliance");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* run = app.add_subcommand("run", "Run a scenario into measurement and event logs");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory");
  std::uint64_t seed_value = 0;
  auto* seed_opt = run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_flag("--strict", strict,
                "Testbed semantics: apply supervisor overrides and mute RF violators");

  auto* plot = app.add_subcommand("plot-data", "Pivot a measurements CSV into plottable columns");
  plot->add_option("measurements", data_path, "measurements.csv path")->required();
  plot->add_option("--metric", metric, "Metric to extract");
  plot->add_option("--group-by", group_by, "Column grouping: node, peer or metric");

  auto* replay = app.add_subcommand("replay", "Render an events.jsonl log as a timeline");
  replay->add_option("events", data_path, "events.jsonl path")->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    return cmd_validate(scenario_path);
  }
  if (run->parsed()) {
    if (seed_opt->count() > 0) {
      seed = seed_value;
    }
    return cmd_run(scenario_path, out_dir, seed, strict);
  }
  if (plot->parsed()) {
    return cmd_plot_data(data_path, metric, group_by);
  }
  if (replay->parsed()) {
    return cmd_replay(data_path);
  }
  return kExitInvalidInput;
}

#include <doctest.h>

#include <cmath>
#include <string>

#include "aerialtwin/engine.hpp"
#include "aerialtwin/outputs.hpp"
#include "aerialtwin/scenario.hpp"

using namespace aerialtwin;
using experiment::load_scenario;
using experiment::Metric;
using experiment::RunOptions;
using experiment::Scenario;
using experiment::ScenarioError;

namespace {

// Minimal valid scenario: one fixed transmitter, one portable with a
// one-waypoint mission.
std::string minimal_scenario() {
  return R"({
    "name": "minimal",
    "seed": 1,
    "duration": 60.0,
    "origin": {"lat": 35.7275, "lon": -78.6962, "alt": 0},
    "nodes": [
      {"id": "LW1", "kind": "fixed",
       "position": {"lat": 35.7275, "lon": -78.6962, "alt": 10},
       "radio": {"center_freq_hz": 3.51e9, "bandwidth_hz": 1.4e6, "sample_rate_hz": 2e6,
                 "tx_power_dbm": 23.0, "n_prb": 6, "transmit": true}},
      {"id": "UAV1", "kind": "portable",
       "position": {"lat": 35.7280, "lon": -78.6962, "alt": 0},
       "radio": {"center_freq_hz": 3.51e9, "bandwidth_hz": 1.4e6, "sample_rate_hz": 2e6,
                 "tx_power_dbm": 10.0, "n_prb": 6}}
    ],
    "missions": [
      {"node": "UAV1", "type": "waypoints",
       "waypoints": [{"east": 0, "north": 100, "up": 30, "speed": 5, "wait": 0}]}
    ]
  })";
}

}  // namespace

TEST_CASE("minimal scenario loads with defaults echoed") {
  const Scenario sc = load_scenario(minimal_scenario());
  CHECK(sc.dt_s == 0.1);
  CHECK(sc.measurement_rate_hz == 10.0);
  CHECK(sc.propagation == channel::PropagationModel::free_space);
  CHECK(sc.effective.at("dt").get<double>() == 0.1);
  CHECK(sc.effective.at("measurement_rate_hz").get<double>() == 10.0);
  // Default measurement plan: the portable measures the fixed transmitter.
  REQUIRE(sc.measurements.size() == 1);
  CHECK(sc.measurements[0].rx == "UAV1");
  CHECK(sc.measurements[0].tx == "LW1");
}

TEST_CASE("load errors name the field path") {
  SUBCASE("dangling mission reference") {
    std::string text = minimal_scenario();
    const auto pos = text.find("\"node\": \"UAV1\"");
    text.replace(pos, 14, "\"node\": \"UAV9\"");
    try {
      load_scenario(text);
      FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find("missions[0].node") != std::string::npos);
      CHECK(std::string(e.what()).find("UAV9") != std::string::npos);
    }
  }

  SUBCASE("slice shares that do not sum to one") {
    std::string text = R"({
      "name": "bad-shares", "duration": 10,
      "origin": {"lat": 35.0, "lon": -78.0},
      "nodes": [
        {"id": "BS", "kind": "fixed", "position": {"lat": 35.0, "lon": -78.0, "alt": 10},
         "radio": {"transmit": true, "bandwidth_hz": 18e6, "sample_rate_hz": 23.04e6, "n_prb": 100}},
        {"id": "UE1", "kind": "portable", "position": {"lat": 35.0005, "lon": -78.0}}
      ],
      "slicing": {
        "cell": "BS", "total_prb": 100,
        "timeline": [{"time": 0, "shares": [{"slice": "fast", "share": 0.5},
                                            {"slice": "slow", "share": 0.4}]}],
        "ue_bindings": [{"ue": "UE1", "slice": "fast"}]
      }
    })";
    try {
      load_scenario(text);
      FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find("slicing.timeline[0]") != std::string::npos);
    }
  }

  SUBCASE("malformed JSON reports a parse error") {
    CHECK_THROWS_AS(load_scenario("{ not json"), ScenarioError);
  }
}

TEST_CASE("single-tick run produces a header and at least one measurement") {
  std::string text = minimal_scenario();
  text.replace(text.find("\"duration\": 60.0"), 16, "\"duration\": 0.1 ");
  const Scenario sc = load_scenario(text);
  const auto result = experiment::run(sc);
  CHECK(result.ticks == 1);
  CHECK(result.measurements.size() >= 1);
  CHECK(result.log.header.contains("seed"));
  const std::string jsonl = experiment::events_jsonl(result.log);
  CHECK(jsonl.find("run_header") != std::string::npos);
}

TEST_CASE("measurement cadence: 10 Hz over 60 s on one link/metric is 600 rows") {
  std::string text = minimal_scenario();
  // Restrict to a single metric.
  text.insert(text.rfind("}"), R"(,
    "measurements": [{"rx": "UAV1", "tx": "LW1", "metrics": ["rsrp_dbm"]}])");
  const Scenario sc = load_scenario(text);
  const auto result = experiment::run(sc);
  CHECK(result.measurements.size() == 600);
  const std::string csv = experiment::measurements_csv(result.measurements);
  std::size_t lines = 0;
  for (char c : csv) {
    lines += c == '\n' ? 1 : 0;
  }
  CHECK(lines == 601);  // header + 600 data rows
}

TEST_CASE("determinism: identical scenario and seed give identical artifacts") {
  const Scenario sc = load_scenario(minimal_scenario());
  const auto r1 = experiment::run(sc);
  const auto r2 = experiment::run(sc);
  CHECK(experiment::measurements_csv(r1.measurements) ==
        experiment::measurements_csv(r2.measurements));
  CHECK(experiment::events_jsonl(r1.log) == experiment::events_jsonl(r2.log));
  CHECK(experiment::manifest_json(sc, r1) == experiment::manifest_json(sc, r2));

  // A different seed leaves the event sequence of a noise-free scenario
  // untouched.
  RunOptions other_seed;
  other_seed.seed_override = 999;
  const auto r3 = experiment::run(sc, other_seed);
  auto strip_header = [](const std::string& jsonl) {
    return jsonl.substr(jsonl.find('\n') + 1);
  };
  CHECK(strip_header(experiment::events_jsonl(r3.log)) ==
        strip_header(experiment::events_jsonl(r1.log)));
  CHECK(experiment::measurements_csv(r3.measurements) ==
        experiment::measurements_csv(r1.measurements));
}

TEST_CASE("emit_outputs writes deterministic files") {
  const Scenario sc = load_scenario(minimal_scenario());
  const auto result = experiment::run(sc);
  const auto dir1 = std::filesystem::temp_directory_path() / "aerialtwin_test_out1";
  const auto dir2 = std::filesystem::temp_directory_path() / "aerialtwin_test_out2";
  experiment::emit_outputs(sc, result, dir1);
  const auto result2 = experiment::run(sc);
  experiment::emit_outputs(sc, result2, dir2);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  for (const char* name : {"measurements.csv", "events.jsonl", "manifest.json"}) {
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }
  CHECK(slurp(dir1 / "measurements.csv").rfind("time,node_id,peer_node_id,lat,lon,alt,metric,value\n", 0) == 0);
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("empty measurement list yields a header-only CSV") {
  CHECK(experiment::measurements_csv({}) ==
        "time,node_id,peer_node_id,lat,lon,alt,metric,value\n");
}

TEST_CASE("altitude-leg RSRP means decrease with slant distance") {
  // The bundled five-leg flight: segment the trace by waypoint events and
  // check the per-leg mean RSRP drops as the legs climb.
  const Scenario sc = experiment::load_scenario_file(std::string(SCENARIO_DIR) +
                                                     "/rsrp_altitudes.json");
  const auto result = experiment::run(sc);

  // Legs run between waypoint pairs (0,1), (2,3), (4,5), (6,7), (8,9).
  std::map<std::size_t, double> reach_time;
  for (const auto& e : result.log.events) {
    if (e.kind == experiment::EventKind::waypoint_reached) {
      reach_time[e.payload.at("waypoint").get<std::size_t>()] = e.time_s;
    }
  }
  REQUIRE(reach_time.size() == 10);

  std::vector<double> leg_means;
  for (std::size_t leg = 0; leg < 5; ++leg) {
    const double t0 = reach_time.at(2 * leg);
    const double t1 = reach_time.at(2 * leg + 1);
    double acc = 0.0;
    int n = 0;
    for (const auto& m : result.measurements) {
      if (m.metric == experiment::Metric::rsrp_dbm && m.time_s > t0 && m.time_s <= t1) {
        acc += m.value;
        ++n;
      }
    }
    REQUIRE(n > 100);
    leg_means.push_back(acc / n);
  }
  for (std::size_t leg = 1; leg < 5; ++leg) {
    CHECK(leg_means[leg] < leg_means[leg - 1]);
  }
}

TEST_CASE("pitch gain maps horizontal acceleration to a forward pitch") {
  vehicle::VehicleState s;
  vehicle::VehicleLimits limits;
  vehicle::KinematicsOptions opts;
  opts.pitch_gain = 0.05;
  const auto accelerating = vehicle::step_kinematics(s, {100, 0, 0}, 5.0, limits, 0.1, opts);
  CHECK(accelerating.pitch_rad == doctest::Approx(0.05 * limits.a_max).epsilon(1e-9));
  // Default gain keeps the vehicle level.
  const auto level = vehicle::step_kinematics(s, {100, 0, 0}, 5.0, limits, 0.1);
  CHECK(level.pitch_rad == 0.0);
}

TEST_CASE("runtime RF guard flags an authorized ground UE once it takes off") {
  // 3.6 GHz sits in a band where airborne use is prohibited: a transmitter
  // that is compliant on the ground violates on the first tick above the
  // airborne threshold, and strict mode mutes it in the channel matrix.
  // Duration 30 s keeps the vehicle airborne to the end of the run.
  const std::string text = R"({
    "name": "airborne-guard", "seed": 11, "duration": 30.0,
    "origin": {"lat": 35.7275, "lon": -78.6962, "alt": 0},
    "nodes": [
      {"id": "LW1", "kind": "fixed", "position": {"lat": 35.7275, "lon": -78.6962, "alt": 10},
       "radio": {"center_freq_hz": 3.6e9, "bandwidth_hz": 1.4e6, "sample_rate_hz": 2e6,
                 "tx_power_dbm": 20.0, "n_prb": 6, "transmit": true}},
      {"id": "UAV1", "kind": "portable", "position": {"lat": 35.728, "lon": -78.6962, "alt": 0},
       "radio": {"center_freq_hz": 3.6e9, "bandwidth_hz": 1.4e6, "sample_rate_hz": 2e6,
                 "tx_power_dbm": 10.0, "n_prb": 6, "transmit": true}}
    ],
    "missions": [
      {"node": "UAV1", "takeoff_alt": 30.0,
       "waypoints": [{"east": 0, "north": 150, "up": 30, "speed": 5, "wait": 5}]}
    ],
    "measurements": [{"rx": "LW1", "tx": "UAV1", "metrics": ["rx_power_dbm"]}]
  })";
  const Scenario sc = load_scenario(text);
  RunOptions strict;
  strict.strict = true;
  const auto result = experiment::run(sc, strict);

  // Exactly one onset; the fixed 3.6 GHz station stays legal (fixed + ground).
  CHECK(result.rf_violations == 1);
  double violation_time = -1.0;
  for (const auto& e : result.log.events) {
    if (e.kind == experiment::EventKind::rf_violation) {
      CHECK(e.payload.at("node").get<std::string>() == "UAV1");
      CHECK(e.payload.at("airborne").get<bool>());
      bool has_airborne_reason = false;
      for (const auto& r : e.payload.at("reasons")) {
        has_airborne_reason |= r.get<std::string>() == "airborne_prohibited";
      }
      CHECK(has_airborne_reason);
      violation_time = e.time_s;
    }
  }
  REQUIRE(violation_time >= 0.0);

  // The violation appears on the first tick above the 0.5 m threshold; the
  // muted transmitter contributes a zero-gain row from the next matrix
  // update on, so measurable rows stop. Ground rows before takeoff remain.
  double first_measured = 1e9;
  double last_measured = -1.0;
  for (const auto& rec : result.measurements) {
    if (rec.metric == experiment::Metric::rx_power_dbm) {
      first_measured = std::min(first_measured, rec.time_s);
      last_measured = std::max(last_measured, rec.time_s);
    }
  }
  CHECK(first_measured == 0.0);
  CHECK(last_measured <= violation_time + sc.channel_update_interval_s + sc.dt_s);
  // Climb at v_max_v = 2 m/s: 0.5 m is crossed within the first second.
  CHECK(violation_time <= 5.0);
}

TEST_CASE("wind hook drifts airborne vehicles, default is exact hover") {
  auto scenario_with = [](const std::string& wind_field) {
    return std::string(R"({
      "name": "wind", "seed": 12, "duration": 60.0,
      "origin": {"lat": 35.7275, "lon": -78.6962, "alt": 0},)") +
           wind_field + R"(
      "nodes": [
        {"id": "LW1", "kind": "fixed", "position": {"lat": 35.7275, "lon": -78.6962, "alt": 10},
         "radio": {"center_freq_hz": 910e6, "bandwidth_hz": 1e6, "sample_rate_hz": 2e6,
                   "tx_power_dbm": 20.0, "n_prb": 6, "transmit": true}},
        {"id": "UAV1", "kind": "portable", "position": {"lat": 35.728, "lon": -78.6962, "alt": 0},
         "radio": {"center_freq_hz": 910e6, "bandwidth_hz": 1e6, "sample_rate_hz": 2e6,
                   "tx_power_dbm": 10.0, "n_prb": 6}}
      ],
      "missions": [
        {"node": "UAV1", "takeoff_alt": 30.0,
         "waypoints": [{"east": 0, "north": 0, "up": 30, "speed": 5, "wait": 40}]}
      ],
      "measurements": [{"rx": "UAV1", "tx": "LW1", "metrics": ["rsrp_dbm"]}]
    })";
  };

  const Scenario calm = load_scenario(scenario_with(""));
  CHECK(calm.wind_mps.norm() == 0.0);
  const Scenario windy = load_scenario(scenario_with(R"("wind": {"east": 2.0},)"));
  CHECK(windy.wind_mps.east == 2.0);

  auto hold_position = [&](const Scenario& sc) {
    const auto result = experiment::run(sc);
    // Mean position over the hold (t in [30, 50]).
    double east = 0.0;
    int n = 0;
    for (const auto& rec : result.measurements) {
      if (rec.time_s >= 30.0 && rec.time_s <= 50.0) {
        east += geo::geodetic_to_enu(sc.origin, rec.position).east;
        ++n;
      }
    }
    return east / n;
  };

  const double calm_east = hold_position(calm);
  const double windy_east = hold_position(windy);
  // The waypoint sits at east = 0 over the start point. In calm air the
  // vehicle parks on it; in a 2 m/s crosswind the position controller holds
  // a small steady downwind offset.
  CHECK(std::abs(calm_east) <= 1e-6);
  CHECK(windy_east > 0.05);
  CHECK(windy_east <= 2.0);
}

TEST_CASE("IQ dumps are interleaved little-endian float32 with a sidecar") {
  channel::IqBuffer buf;
  buf.sample_rate_hz = 2e6;
  buf.start_time_s = 1.5;
  buf.samples = {{1.0, -2.0}, {0.25, 0.5}};
  const auto dir = std::filesystem::temp_directory_path() / "aerialtwin_iq_test";
  std::filesystem::create_directories(dir);
  experiment::write_iq_dump(dir / "iq_test.bin", buf, 3.51e9);

  std::ifstream in(dir / "iq_test.bin", std::ios::binary);
  float vals[4] = {};
  in.read(reinterpret_cast<char*>(vals), sizeof(vals));
  CHECK(in.gcount() == 16);
  CHECK(vals[0] == 1.0f);
  CHECK(vals[1] == -2.0f);
  CHECK(vals[2] == 0.25f);
  CHECK(vals[3] == 0.5f);
  in.seekg(0, std::ios::end);
  CHECK(in.tellg() == 16);  // 2 samples * 2 floats * 4 bytes

  std::ifstream meta(dir / "iq_test.json");
  nlohmann::json j;
  meta >> j;
  CHECK(j.at("center_freq_hz").get<double>() == 3.51e9);
  CHECK(j.at("sample_rate_hz").get<double>() == 2e6);
  CHECK(j.at("start_time").get<double>() == 1.5);
  CHECK(j.at("samples").get<int>() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("strict-mode geofence override keeps the vehicle inside") {
  // Mission deliberately aims 500 m past a 200 m fence edge.
  const std::string text = R"({
    "name": "fence-test", "seed": 3, "duration": 60.0,
    "origin": {"lat": 35.7275, "lon": -78.6962, "alt": 0},
    "geofence": {
      "boundary": [
        {"lat": 35.725702, "lon": -78.698412},
        {"lat": 35.725702, "lon": -78.693988},
        {"lat": 35.729298, "lon": -78.693988},
        {"lat": 35.729298, "lon": -78.698412}
      ],
      "alt_min": 0, "alt_max": 120
    },
    "nodes": [
      {"id": "LW1", "kind": "fixed", "position": {"lat": 35.7275, "lon": -78.6962, "alt": 10},
       "radio": {"center_freq_hz": 3.51e9, "bandwidth_hz": 1.4e6, "sample_rate_hz": 2e6,
                 "tx_power_dbm": 23.0, "n_prb": 6, "transmit": true}},
      {"id": "UAV1", "kind": "portable", "position": {"lat": 35.7275, "lon": -78.6962, "alt": 0}}
    ],
    "missions": [
      {"node": "UAV1", "waypoints": [{"east": 500, "north": 0, "up": 30, "speed": 5, "wait": 0}]}
    ]
  })";
  const Scenario sc = load_scenario(text);
  REQUIRE(sc.geofence.has_value());

  RunOptions strict;
  strict.strict = true;
  const auto result = experiment::run(sc, strict);
  CHECK(result.overrides >= 1);

  bool saw_override_event = false;
  for (const auto& e : result.log.events) {
    if (e.kind == experiment::EventKind::override_applied) {
      saw_override_event = true;
      CHECK(e.payload.contains("rule"));
      CHECK_FALSE(e.payload.at("rule").get<std::string>().empty());
    }
  }
  CHECK(saw_override_event);

  // No logged position may lie outside the fence by more than v_max*dt.
  const auto fence = sc.geofence->to_local(sc.origin);
  const double slack = 5.0 * sc.dt_s;
  for (const auto& rec : result.measurements) {
    const auto enu = geo::geodetic_to_enu(sc.origin, rec.position);
    CHECK(enu.east <= 200.0 + slack);
    CHECK(std::abs(enu.north) <= 200.0 + slack);
  }

  // Development mode: same scenario, no applied overrides.
  const auto dev = experiment::run(sc, RunOptions{});
  CHECK(dev.overrides == 0);
}

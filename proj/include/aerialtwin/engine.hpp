#pragma once

// The deterministic batch simulation loop. Each tick: missions and the
// orbiter controller produce commands; the filter and the geofence
// supervisor resolve them; kinematics step; the channel matrix refreshes on
// its interval; the RF compliance guard re-validates every transmitter;
// the slice scheduler and throughput model run; measurements are sampled.
// Outputs are a pure function of (scenario, seed).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aerialtwin/channel.hpp"
#include "aerialtwin/compliance.hpp"
#include "aerialtwin/experiment.hpp"
#include "aerialtwin/ran.hpp"
#include "aerialtwin/scenario.hpp"
#include "aerialtwin/vehicle.hpp"
#include "aerialtwin/version.hpp"

namespace aerialtwin::experiment {

struct RunOptions {
  bool strict = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> registry_override_path;
};

struct RunResult {
  RunLog log;
  std::vector<MeasurementRecord> measurements;
  std::map<std::string, vehicle::VehicleState> final_states;
  std::map<std::string, channel::IqBuffer> iq_captures;
  std::size_t ticks = 0;
  int commands_rejected = 0;
  int overrides = 0;
  int rf_violations = 0;
  std::uint64_t seed = 0;
};

namespace detail {

using geo::EnuVector;

struct Guidance {
  enum class Mode { parked, direct };
  Mode mode = Mode::parked;
  EnuVector setpoint;
  double speed_mps = 0.0;
  bool emergency_stop = false;  // one-tick hard stop (supervisor hold)
};

struct OrbiterRt {
  std::size_t tracer = 0;  // index into the vehicle table
  double radius_m = 0.0;
  double rate = 0.0;
  double orbit_alt_m = 0.0;
  EnuVector formation_offset;
  enum class Phase { init, takeoff, formation, orbiting, station, landing, done };
  Phase phase = Phase::init;
  bool takeoff_sent = false;
  double unwrapped = 0.0;
  double last_bearing = 0.0;
};

struct VehicleRt {
  std::size_t node = 0;  // index into the node table
  vehicle::VehicleState state;
  vehicle::VehicleLimits limits;
  double pitch_gain = 0.0;
  EnuVector home;
  Guidance guidance;
  bool has_mission = false;
  vehicle::Mission mission;
  bool is_orbiter = false;
  OrbiterRt orbiter;
  std::optional<vehicle::Supervisor> supervisor;
  bool overridden = false;
  std::set<std::string> warned_rules;  // development mode: one warning per rule
};

inline double wrap_pi(double a) {
  while (a > std::numbers::pi) {
    a -= 2.0 * std::numbers::pi;
  }
  while (a < -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

inline double bearing_of(const EnuVector& from_center, double fallback) {
  if (std::hypot(from_center.east, from_center.north) < 1e-9) {
    return fallback;
  }
  return std::atan2(from_center.east, from_center.north);
}

inline nlohmann::ordered_json command_payload(const std::string& node, const vehicle::Command& c) {
  nlohmann::ordered_json p;
  p["node"] = node;
  p["kind"] = vehicle::to_string(c.kind);
  p["issuer"] = c.issuer == vehicle::Issuer::supervisor ? "supervisor" : "experimenter";
  switch (c.kind) {
    case vehicle::CommandKind::goto_wp:
      p["speed"] = c.speed_mps;
      break;
    case vehicle::CommandKind::takeoff:
      p["alt"] = c.altitude_m;
      break;
    case vehicle::CommandKind::hold:
      p["duration"] = c.duration_s;
      break;
    case vehicle::CommandKind::orbit:
      p["radius"] = c.radius_m;
      p["angular_rate"] = c.angular_rate;
      break;
    default:
      break;
  }
  return p;
}

}  // namespace detail

inline RunResult run(const Scenario& sc, const RunOptions& opts = {}) {
  using detail::Guidance;
  using detail::OrbiterRt;
  using detail::VehicleRt;
  using geo::EnuVector;

  RunResult res;
  res.seed = opts.seed_override.value_or(sc.seed);

  // --- static tables -------------------------------------------------------
  const std::size_t n_nodes = sc.nodes.size();
  std::vector<channel::RadioEndpoint> endpoints(n_nodes);
  std::vector<bool> transmitting(n_nodes, false);
  std::vector<bool> muted(n_nodes, false);
  std::vector<bool> in_violation(n_nodes, false);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    endpoints[i].position = geo::geodetic_to_enu(sc.origin, sc.nodes[i].position);
    endpoints[i].radio = sc.nodes[i].radio;
    transmitting[i] = sc.nodes[i].transmit;
  }

  auto registry_from_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw std::system_error(errno, std::generic_category(), "cannot open registry: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return compliance::parse_registry(buf.str());
  };
  compliance::Registry registry;
  if (opts.registry_override_path) {
    registry = registry_from_file(*opts.registry_override_path);
  } else if (sc.registry_path) {
    registry = registry_from_file(*sc.registry_path);
  } else {
    registry = compliance::load_default_registry();
  }

  std::optional<geo::LocalFence> fence;
  if (sc.geofence) {
    fence = sc.geofence->to_local(sc.origin);
  }

  // --- vehicle table -------------------------------------------------------
  std::vector<VehicleRt> vehicles;
  std::vector<int> node_to_vehicle(n_nodes, -1);
  auto node_index = [&](const std::string& id) -> std::size_t {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (sc.nodes[i].id == id) {
        return i;
      }
    }
    throw std::logic_error("unresolved node id: " + id);  // loader guarantees
  };

  for (const auto& ms : sc.missions) {
    VehicleRt v;
    v.node = node_index(ms.node);
    v.limits = sc.nodes[v.node].limits;
    v.pitch_gain = sc.nodes[v.node].pitch_gain;
    v.state.position = endpoints[v.node].position;
    v.home = v.state.position;
    v.has_mission = true;
    v.mission.waypoints = ms.waypoints;
    v.mission.arrival_radius_m = ms.arrival_radius_m;
    v.mission.takeoff_alt_m = ms.takeoff_alt_m;
    node_to_vehicle[v.node] = static_cast<int>(vehicles.size());
    vehicles.push_back(std::move(v));
  }
  for (const auto& os : sc.orbiters) {
    VehicleRt v;
    v.node = node_index(os.node);
    v.limits = sc.nodes[v.node].limits;
    v.pitch_gain = sc.nodes[v.node].pitch_gain;
    v.state.position = endpoints[v.node].position;
    v.home = v.state.position;
    v.is_orbiter = true;
    v.orbiter.tracer = static_cast<std::size_t>(node_to_vehicle[node_index(os.tracer)]);
    v.orbiter.radius_m = os.radius_m;
    v.orbiter.rate = os.angular_rate;
    const auto& tracer_rt = vehicles[v.orbiter.tracer];
    v.orbiter.orbit_alt_m = tracer_rt.mission.takeoff_alt_m >= 0.0
                                ? tracer_rt.mission.takeoff_alt_m
                                : tracer_rt.mission.waypoints.front().position.up;
    EnuVector off = v.state.position - tracer_rt.state.position;
    off.up = 0.0;
    const double off_norm = off.horizontal_norm();
    if (off_norm < 1e-6) {
      off = {os.radius_m, 0.0, 0.0};
    } else {
      off = off * (os.radius_m / off_norm);
    }
    v.orbiter.formation_offset = off;
    node_to_vehicle[v.node] = static_cast<int>(vehicles.size());
    vehicles.push_back(std::move(v));
  }

  const vehicle::CommandAllowlist allowlist = vehicle::default_allowlist();
  const double fence_alt_max =
      sc.geofence ? sc.geofence->alt_max : std::numeric_limits<double>::infinity();

  if (sc.supervisor.enabled && fence) {
    for (auto& v : vehicles) {
      const double lookahead =
          sc.supervisor.lookahead_s.value_or(vehicle::default_lookahead(v.limits, sc.dt_s));
      v.supervisor.emplace(lookahead, sc.supervisor.grace_s);
    }
  }

  // --- slicing -------------------------------------------------------------
  std::optional<ran::ThroughputTracker> tracker;
  std::vector<std::size_t> ue_nodes;
  std::size_t cell_node = 0;
  int active_timeline_entry = -2;
  if (sc.slicing) {
    tracker.emplace(sc.slicing->bindings, sc.slicing->total_prb, sc.slicing->link,
                    sc.slicing->smoothing_window_s);
    for (const auto& b : sc.slicing->bindings) {
      ue_nodes.push_back(node_index(b.ue_id));
    }
    cell_node = node_index(sc.slicing->cell_node);
  }

  // --- run log -------------------------------------------------------------
  res.log.header = sc.effective;
  res.log.header["seed"] = res.seed;
  res.log.header["strict"] = opts.strict;
  res.log.header["tool_version"] = kVersion;
  auto log_event = [&](double t, EventKind kind, nlohmann::ordered_json payload) {
    res.log.events.push_back({t, kind, std::move(payload)});
  };

  const auto ticks = static_cast<std::size_t>(std::llround(sc.duration_s / sc.dt_s));
  const auto channel_every = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(sc.channel_update_interval_s / sc.dt_s)));
  const auto measure_every = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(1.0 / (sc.measurement_rate_hz * sc.dt_s))));
  const auto iq_every = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(sc.iq.interval_s / sc.dt_s)));

  channel::ChannelMatrix matrix;
  std::size_t iq_block_counter = 0;

  auto rx_power_from_matrix = [&](std::size_t tx, std::size_t rx) -> double {
    const auto& lg = matrix.at(tx, rx);
    const double a = std::abs(lg.gain);
    if (a <= 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    return endpoints[tx].radio.tx_power_dbm + 20.0 * std::log10(a);
  };

  auto geo_position = [&](std::size_t node) {
    return geo::enu_to_geodetic(sc.origin, endpoints[node].position);
  };

  // --- main loop -----------------------------------------------------------
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * sc.dt_s;

    // (1)+(2) commands from missions/orbiter, filtered and supervised
    for (auto& v : vehicles) {
      std::optional<vehicle::Command> candidate;

      if (!v.overridden && v.has_mission) {
        vehicle::FsmResult fr = vehicle::fsm_tick(v.mission, v.state, t);
        v.mission = fr.mission;
        if (fr.reached_waypoint) {
          log_event(t, EventKind::waypoint_reached,
                    {{"node", sc.nodes[v.node].id}, {"waypoint", *fr.reached_waypoint}});
        }
        candidate = fr.command;
      } else if (!v.overridden && v.is_orbiter) {
        candidate = [&]() -> std::optional<vehicle::Command> {
          OrbiterRt& orb = v.orbiter;
          const VehicleRt& tracer = vehicles[orb.tracer];
          switch (orb.phase) {
            case OrbiterRt::Phase::init:
              orb.phase = OrbiterRt::Phase::takeoff;
              return vehicle::Command::arm();
            case OrbiterRt::Phase::takeoff:
              if (!orb.takeoff_sent) {
                orb.takeoff_sent = true;
                if (orb.orbit_alt_m > 0.5) {
                  return vehicle::Command::takeoff(orb.orbit_alt_m);
                }
              }
              if (std::abs(v.state.position.up - orb.orbit_alt_m) <= 1.0) {
                orb.phase = OrbiterRt::Phase::formation;
                return vehicle::Command::goto_wp(tracer.state.position + orb.formation_offset,
                                                 v.limits.v_max_h);
              }
              return std::nullopt;
            case OrbiterRt::Phase::formation:
              if (tracer.state.mode == vehicle::FlightMode::hold) {
                orb.phase = OrbiterRt::Phase::orbiting;
                orb.unwrapped = 0.0;
                orb.last_bearing = detail::bearing_of(v.state.position - tracer.state.position, 0.0);
                return vehicle::Command::orbit(sc.nodes[tracer.node].id, orb.radius_m, orb.rate);
              }
              if (tracer.state.mode == vehicle::FlightMode::landing ||
                  tracer.state.mode == vehicle::FlightMode::idle) {
                orb.phase = OrbiterRt::Phase::landing;
                return vehicle::Command::land();
              }
              return std::nullopt;
            case OrbiterRt::Phase::orbiting:
            case OrbiterRt::Phase::station:
              if (tracer.state.mode == vehicle::FlightMode::enroute ||
                  tracer.state.mode == vehicle::FlightMode::takeoff) {
                orb.phase = OrbiterRt::Phase::formation;
                return vehicle::Command::goto_wp(tracer.state.position + orb.formation_offset,
                                                 v.limits.v_max_h);
              }
              if (tracer.state.mode == vehicle::FlightMode::landing ||
                  tracer.state.mode == vehicle::FlightMode::idle) {
                orb.phase = OrbiterRt::Phase::landing;
                return vehicle::Command::land();
              }
              return std::nullopt;
            case OrbiterRt::Phase::landing:
              if (v.state.position.up <= 0.05 && v.state.velocity.norm() < 1e-6) {
                orb.phase = OrbiterRt::Phase::done;
                return vehicle::Command::disarm();
              }
              return std::nullopt;
            case OrbiterRt::Phase::done:
              return std::nullopt;
          }
          return std::nullopt;
        }();
      }

      if (candidate) {
        const vehicle::FilterResult fr =
            vehicle::filter_command(*candidate, allowlist, v.limits, fence_alt_max);
        if (!fr.ok()) {
          ++res.commands_rejected;
          auto payload = detail::command_payload(sc.nodes[v.node].id, *candidate);
          payload["reason"] = vehicle::to_string(*fr.reason);
          log_event(t, EventKind::command_rejected, std::move(payload));
        } else {
          log_event(t, EventKind::command_accepted,
                    detail::command_payload(sc.nodes[v.node].id, *candidate));
          const vehicle::Command& cmd = fr.accepted->cmd;
          switch (cmd.kind) {
            case vehicle::CommandKind::arm:
              v.state.armed = true;
              break;
            case vehicle::CommandKind::disarm:
              v.state.armed = false;
              v.state.mode = vehicle::FlightMode::idle;
              v.guidance.mode = Guidance::Mode::parked;
              break;
            case vehicle::CommandKind::takeoff:
              v.guidance.mode = Guidance::Mode::direct;
              v.guidance.setpoint = {v.state.position.east, v.state.position.north, cmd.altitude_m};
              v.guidance.speed_mps = v.limits.v_max_h;
              v.state.mode = vehicle::FlightMode::takeoff;
              break;
            case vehicle::CommandKind::goto_wp:
              v.guidance.mode = Guidance::Mode::direct;
              v.guidance.setpoint = cmd.target;
              v.guidance.speed_mps = cmd.speed_mps;
              v.state.mode = vehicle::FlightMode::enroute;
              break;
            case vehicle::CommandKind::set_speed:
              v.guidance.speed_mps = cmd.speed_mps;
              break;
            case vehicle::CommandKind::hold:
              // Mission holds park on the current setpoint; the vehicle
              // settles onto the waypoint it was heading to.
              v.state.mode = vehicle::FlightMode::hold;
              break;
            case vehicle::CommandKind::orbit:
              v.state.mode = vehicle::FlightMode::orbit;
              break;
            case vehicle::CommandKind::land:
              v.guidance.mode = Guidance::Mode::direct;
              v.guidance.setpoint = {v.state.position.east, v.state.position.north, 0.0};
              v.guidance.speed_mps = v.limits.v_max_h;
              v.state.mode = vehicle::FlightMode::landing;
              break;
            case vehicle::CommandKind::rtl:
              v.guidance.mode = Guidance::Mode::direct;
              v.guidance.setpoint = v.home;
              v.guidance.speed_mps = v.limits.v_max_h;
              v.state.mode = vehicle::FlightMode::rtl;
              break;
          }
        }
      }

      // Supervisor runs after the experimenter command has been resolved.
      // Strict (testbed) mode applies overrides; development mode only logs
      // the first trigger of each rule.
      if (v.supervisor && v.state.armed) {
        const vehicle::SupervisorResult sr = v.supervisor->check(v.state, *fence, t);
        if (!sr.clear()) {
          const vehicle::Command& oc = *sr.override_cmd;
          auto payload = detail::command_payload(sc.nodes[v.node].id, oc);
          payload["rule"] = sr.rule;
          payload["applied"] = opts.strict;
          if (opts.strict) {
            ++res.overrides;
            log_event(t, EventKind::override_applied, std::move(payload));
            v.overridden = true;
            v.state.mode = vehicle::FlightMode::overridden;
            if (oc.kind == vehicle::CommandKind::hold) {
              v.guidance.emergency_stop = true;
            } else if (oc.kind == vehicle::CommandKind::rtl) {
              v.guidance.mode = Guidance::Mode::direct;
              v.guidance.setpoint = v.home;
              v.guidance.speed_mps = v.limits.v_max_h;
            }
          } else if (v.warned_rules.insert(sr.rule).second) {
            log_event(t, EventKind::override_applied, std::move(payload));
          }
        }
      }
    }

    // (3) kinematics
    for (auto& v : vehicles) {
      if (!v.state.armed) {
        continue;
      }
      if (v.guidance.emergency_stop) {
        v.state = vehicle::emergency_stop(v.state, sc.dt_s);
        v.guidance.emergency_stop = false;
        v.guidance.mode = Guidance::Mode::direct;
        v.guidance.setpoint = v.state.position;
        v.guidance.speed_mps = v.limits.v_max_h;
      } else {
        EnuVector setpoint = v.state.position;
        double speed = 0.0;
        vehicle::KinematicsOptions kin;
        kin.pitch_gain = v.pitch_gain;
        if (v.is_orbiter && v.orbiter.phase == OrbiterRt::Phase::orbiting) {
          const VehicleRt& tracer = vehicles[v.orbiter.tracer];
          setpoint = vehicle::orbiter_tick(v.state, tracer.state, v.orbiter.radius_m,
                                           v.orbiter.rate, sc.dt_s, v.orbiter.formation_offset);
          speed = std::min(v.limits.v_max_h, v.orbiter.rate * v.orbiter.radius_m);
          kin.cruise = true;  // the carrot advances every tick
        } else if (v.is_orbiter && v.orbiter.phase == OrbiterRt::Phase::formation) {
          const VehicleRt& tracer = vehicles[v.orbiter.tracer];
          setpoint = tracer.state.position + v.orbiter.formation_offset;
          setpoint.up = v.orbiter.orbit_alt_m;
          speed = v.limits.v_max_h;
        } else if (v.is_orbiter && v.orbiter.phase == OrbiterRt::Phase::station) {
          setpoint = v.guidance.setpoint;
          speed = v.guidance.speed_mps;
        } else if (v.guidance.mode == Guidance::Mode::direct) {
          setpoint = v.guidance.setpoint;
          speed = v.guidance.speed_mps;
        }
        if (v.guidance.mode != Guidance::Mode::parked || v.is_orbiter) {
          v.state = vehicle::step_kinematics(v.state, setpoint, speed, v.limits, sc.dt_s, kin);
        }
      }

      // Disturbance hook: airborne multicopters drift with the configured
      // wind each tick.
      if (v.limits.kind == vehicle::VehicleKind::multicopter && v.state.position.up > 0.0) {
        v.state.position = v.state.position + sc.wind_mps * sc.dt_s;
        v.state.position.up = std::max(v.state.position.up, 0.0);
      }

      // Orbit bookkeeping: unwrap the actual bearing and freeze after 2*pi.
      if (v.is_orbiter && v.orbiter.phase == OrbiterRt::Phase::orbiting) {
        const VehicleRt& tracer = vehicles[v.orbiter.tracer];
        const double b =
            detail::bearing_of(v.state.position - tracer.state.position, v.orbiter.last_bearing);
        v.orbiter.unwrapped += detail::wrap_pi(b - v.orbiter.last_bearing);
        v.orbiter.last_bearing = b;
        if (std::abs(v.orbiter.unwrapped) >= 2.0 * std::numbers::pi) {
          v.orbiter.phase = OrbiterRt::Phase::station;
          v.guidance.mode = Guidance::Mode::direct;
          v.guidance.setpoint = v.state.position;
          v.guidance.speed_mps = std::min(v.limits.v_max_h, 1.0);
        }
      }

      endpoints[v.node].position = v.state.position;
      endpoints[v.node].heading_rad = v.state.heading_rad;
      endpoints[v.node].pitch_rad = v.state.pitch_rad;
    }

    // (4) channel matrix refresh
    if (n_nodes >= 2 && (k % channel_every == 0 || matrix.n == 0)) {
      matrix = channel::build_channel_matrix(endpoints, t, sc.propagation, muted);
    }

    // (5) RF compliance guard
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (!transmitting[i]) {
        continue;
      }
      compliance::EmissionRequest req;
      req.node_kind = sc.nodes[i].kind == NodeKind::fixed ? compliance::StationKind::fixed_station
                                                          : compliance::StationKind::mobile_station;
      const int vi = node_to_vehicle[i];
      const bool multicopter =
          vi >= 0 && vehicles[vi].limits.kind == vehicle::VehicleKind::multicopter;
      req.airborne = sc.nodes[i].kind == NodeKind::portable && multicopter &&
                     endpoints[i].position.up > compliance::kAirborneAltitudeM;
      req.center_freq_hz = endpoints[i].radio.center_freq_hz;
      req.bandwidth_hz = endpoints[i].radio.bandwidth_hz;
      req.eirp_dbm =
          endpoints[i].radio.tx_power_dbm + channel::peak_gain_dbi(endpoints[i].radio.antenna);
      const compliance::ValidationResult vr = compliance::validate_emission(req, registry);
      if (!vr.authorized() && !in_violation[i]) {
        ++res.rf_violations;
        nlohmann::ordered_json payload;
        payload["node"] = sc.nodes[i].id;
        payload["airborne"] = req.airborne;
        payload["reasons"] = nlohmann::ordered_json::array();
        for (auto r : vr.violations) {
          payload["reasons"].push_back(compliance::to_string(r));
        }
        log_event(t, EventKind::rf_violation, std::move(payload));
      }
      in_violation[i] = !vr.authorized();
      if (opts.strict) {
        muted[i] = !vr.authorized();
      }
    }

    // (6) slice scheduling and throughput
    std::vector<double> ue_throughput;
    if (tracker) {
      const ran::SliceConfig cfg = ran::apply_timeline(sc.slicing->timeline, t);
      int entry_index = -1;
      for (std::size_t e = 0; e < sc.slicing->timeline.entries.size(); ++e) {
        if (sc.slicing->timeline.entries[e].time_s <= t) {
          entry_index = static_cast<int>(e);
        }
      }
      if (entry_index != active_timeline_entry) {
        active_timeline_entry = entry_index;
        nlohmann::ordered_json payload;
        payload["entry"] = entry_index;
        payload["shares"] = nlohmann::ordered_json::object();
        for (const auto& s : cfg.slices) {
          payload["shares"][s.slice_id] = s.share;
        }
        log_event(t, EventKind::slice_reconfig, std::move(payload));
      }
      std::vector<double> snr(ue_nodes.size(), 0.0);
      for (std::size_t u = 0; u < ue_nodes.size(); ++u) {
        const double rx = rx_power_from_matrix(cell_node, ue_nodes[u]);
        const double floor = channel::noise_floor(sc.noise, endpoints[cell_node].radio.bandwidth_hz,
                                                  endpoints[ue_nodes[u]].radio.noise_figure_db);
        snr[u] = channel::snr(rx, floor);
      }
      ue_throughput = tracker->tick(cfg, snr, sc.dt_s);
    }

    // IQ propagation blocks
    if (sc.iq.enabled && n_nodes >= 2 && k % iq_every == 0) {
      std::vector<channel::IqBuffer> inputs(n_nodes);
      std::vector<double> floors(n_nodes, -std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < n_nodes; ++i) {
        floors[i] = channel::noise_floor(sc.noise, endpoints[i].radio.bandwidth_hz,
                                         endpoints[i].radio.noise_figure_db);
        if (!transmitting[i] || muted[i]) {
          continue;
        }
        auto& b = inputs[i];
        b.sample_rate_hz = endpoints[i].radio.sample_rate_hz;
        b.start_time_s = t;
        b.samples.resize(sc.iq.block_samples);
        const double amp = std::pow(10.0, endpoints[i].radio.tx_power_dbm / 20.0);
        const double w = 2.0 * std::numbers::pi * sc.iq.tone_offset_hz / b.sample_rate_hz;
        for (std::size_t s = 0; s < b.samples.size(); ++s) {
          b.samples[s] = std::polar(amp, w * static_cast<double>(s));
        }
      }
      for (std::size_t i = 0; i < n_nodes; ++i) {
        if (inputs[i].samples.empty()) {
          inputs[i].sample_rate_hz = endpoints[i].radio.sample_rate_hz;
          inputs[i].start_time_s = t;
        }
      }
      const channel::PropagationResult pr = channel::propagate_iq(
          inputs, matrix, floors, rng::substream(res.seed, 0xABC0 + iq_block_counter));
      ++iq_block_counter;
      if (pr.silence_suppressed > 0) {
        log_event(t, EventKind::silence_suppressed, {{"count", pr.silence_suppressed}});
      }
      for (const auto& id : sc.iq.capture) {
        const std::size_t i = node_index(id);
        auto& dst = res.iq_captures[id];
        dst.sample_rate_hz = pr.outputs[i].sample_rate_hz;
        if (dst.samples.empty()) {
          dst.start_time_s = pr.outputs[i].start_time_s;
        }
        dst.samples.insert(dst.samples.end(), pr.outputs[i].samples.begin(),
                           pr.outputs[i].samples.end());
        if (sc.iq.measure_rx_power) {
          res.measurements.push_back({t, id, std::nullopt, geo_position(i),
                                      Metric::rx_power_dbm,
                                      channel::measured_power_dbm(pr.outputs[i])});
        }
      }
    }

    // (7) measurements
    if (k % measure_every == 0) {
      for (const auto& m : sc.measurements) {
        const std::size_t rx = node_index(m.rx);
        const std::size_t tx = node_index(m.tx);
        const double rx_dbm = rx_power_from_matrix(tx, rx);
        if (!std::isfinite(rx_dbm)) {
          continue;  // transmitter muted or matrix not yet built
        }
        const double floor = channel::noise_floor(sc.noise, endpoints[tx].radio.bandwidth_hz,
                                                  endpoints[rx].radio.noise_figure_db);
        const geo::GeoPoint pos = geo_position(rx);
        for (const Metric metric : m.metrics) {
          double value = 0.0;
          switch (metric) {
            case Metric::rsrp_dbm:
              value = channel::rsrp(rx_dbm, endpoints[tx].radio.n_prb);
              break;
            case Metric::snr_db:
              value = channel::snr(rx_dbm, floor);
              break;
            case Metric::rx_power_dbm:
              value = rx_dbm;
              break;
            case Metric::throughput_bps:
              continue;  // produced by the slicing path below
          }
          res.measurements.push_back({t, m.rx, m.tx, pos, metric, value});
        }
      }
      if (tracker) {
        for (std::size_t u = 0; u < ue_nodes.size(); ++u) {
          res.measurements.push_back({t, sc.slicing->bindings[u].ue_id,
                                      sc.nodes[cell_node].id, geo_position(ue_nodes[u]),
                                      Metric::throughput_bps, ue_throughput[u]});
        }
      }
    }
  }

  res.ticks = ticks;
  for (const auto& v : vehicles) {
    res.final_states[sc.nodes[v.node].id] = v.state;
  }
  return res;
}

}  // namespace aerialtwin::experiment

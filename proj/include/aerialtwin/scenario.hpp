#pragma once

// Declarative experiment description and its JSON loader. One scenario
// document is the single hashable artifact describing an experiment: nodes,
// missions, radio configuration, slice timeline and safety volume. Load
// errors name the offending field path.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aerialtwin/channel.hpp"
#include "aerialtwin/compliance.hpp"
#include "aerialtwin/experiment.hpp"
#include "aerialtwin/geo.hpp"
#include "aerialtwin/ran.hpp"
#include "aerialtwin/vehicle.hpp"

namespace aerialtwin::experiment {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class NodeKind { fixed, portable };

inline const char* to_string(NodeKind k) { return k == NodeKind::fixed ? "fixed" : "portable"; }

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::fixed;
  geo::GeoPoint position;
  channel::RadioConfig radio;
  bool transmit = false;
  vehicle::VehicleLimits limits;  // portable nodes only; defaults otherwise
  double pitch_gain = 0.0;        // forward pitch per m/s^2 of horizontal accel
};

struct WaypointMissionSpec {
  std::string node;
  double arrival_radius_m = vehicle::kArrivalRadiusM;
  double takeoff_alt_m = -1.0;
  std::vector<vehicle::Waypoint> waypoints;
};

struct OrbiterSpec {
  std::string node;
  std::string tracer;
  double radius_m = 20.0;
  double angular_rate = 0.1;  // rad/s
};

struct SlicingSpec {
  std::string cell_node;
  int total_prb = 100;
  ran::LinkParams link;
  double smoothing_window_s = 1.0;
  ran::SliceTimeline timeline;
  std::vector<ran::UeBinding> bindings;
};

struct MeasureSpec {
  std::string rx;
  std::string tx;
  std::vector<Metric> metrics;
};

struct IqSpec {
  bool enabled = false;
  std::size_t block_samples = 2048;
  double interval_s = 1.0;
  double tone_offset_hz = 100e3;
  std::vector<std::string> capture;  // receiving nodes to record
  bool dump = true;
  bool measure_rx_power = true;
};

struct SupervisorSpec {
  bool enabled = true;
  std::optional<double> lookahead_s;  // default derived from limits and dt
  double grace_s = 5.0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  double dt_s = vehicle::kDefaultTickSeconds;
  double duration_s = 0.0;
  double measurement_rate_hz = 10.0;
  double channel_update_interval_s = 0.01;
  geo::GeoPoint origin;
  std::optional<geo::Geofence> geofence;
  // Disturbance hook: additive drift velocity applied to airborne vehicles
  // each tick. No gust process is modeled; default zero.
  geo::EnuVector wind_mps;
  channel::PropagationModel propagation = channel::PropagationModel::free_space;
  channel::NoiseModel noise;
  std::optional<std::string> registry_path;
  SupervisorSpec supervisor;
  std::vector<NodeSpec> nodes;
  std::vector<WaypointMissionSpec> missions;
  std::vector<OrbiterSpec> orbiters;
  std::optional<SlicingSpec> slicing;
  std::vector<MeasureSpec> measurements;
  IqSpec iq;

  std::string raw_bytes;               // document as loaded, for hashing
  nlohmann::ordered_json effective;    // defaults applied, echoed to run logs

  const NodeSpec* find_node(const std::string& id) const {
    for (const auto& n : nodes) {
      if (n.id == id) {
        return &n;
      }
    }
    return nullptr;
  }
};

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ScenarioError(path + "." + key, "required field missing");
  }
  return obj.at(key);
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) {
    throw ScenarioError(path, "expected a number");
  }
  return v.get<double>();
}

inline std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) {
    throw ScenarioError(path, "expected a string");
  }
  return v.get<std::string>();
}

inline geo::GeoPoint geopoint(const json& v, const std::string& path) {
  geo::GeoPoint p;
  p.lat_deg = number(require(v, "lat", path), path + ".lat");
  p.lon_deg = number(require(v, "lon", path), path + ".lon");
  p.alt_m = v.contains("alt") ? number(v.at("alt"), path + ".alt") : 0.0;
  if (!p.valid()) {
    throw ScenarioError(path, "latitude/longitude out of range");
  }
  return p;
}

inline channel::AntennaPattern antenna(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "isotropic") {
      return channel::AntennaPattern::isotropic();
    }
    if (s == "vertical_dipole") {
      return channel::AntennaPattern::vertical_dipole();
    }
    throw ScenarioError(path, "unknown antenna pattern: " + s);
  }
  if (v.is_object() && v.contains("table")) {
    const json& t = v.at("table");
    const auto n_az = static_cast<std::size_t>(number(require(t, "n_az", path), path + ".n_az"));
    const auto n_el = static_cast<std::size_t>(number(require(t, "n_el", path), path + ".n_el"));
    std::vector<double> gains;
    for (const auto& g : require(t, "gains_dbi", path)) {
      gains.push_back(g.get<double>());
    }
    try {
      return channel::AntennaPattern::from_table(n_az, n_el, std::move(gains));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path, e.what());
    }
  }
  throw ScenarioError(path, "expected antenna name or table object");
}

}  // namespace detail

// Parses and fully validates one scenario document. All cross-references
// are resolved here so the run loop never fails.
inline Scenario load_scenario(const std::string& text) {
  using detail::require;
  using json = nlohmann::json;

  Scenario sc;
  sc.raw_bytes = text;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("document", std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ScenarioError("document", "scenario must be a JSON object");
  }

  sc.name = detail::text(require(doc, "name", "scenario"), "scenario.name");
  if (doc.contains("seed")) {
    sc.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("dt")) {
    sc.dt_s = detail::number(doc.at("dt"), "scenario.dt");
  }
  sc.duration_s = detail::number(require(doc, "duration", "scenario"), "scenario.duration");
  if (!(sc.dt_s > 0.0)) {
    throw ScenarioError("scenario.dt", "dt must be positive");
  }
  if (!(sc.duration_s > 0.0)) {
    throw ScenarioError("scenario.duration", "duration must be positive");
  }
  if (doc.contains("measurement_rate_hz")) {
    sc.measurement_rate_hz = detail::number(doc.at("measurement_rate_hz"), "scenario.measurement_rate_hz");
    if (!(sc.measurement_rate_hz > 0.0)) {
      throw ScenarioError("scenario.measurement_rate_hz", "rate must be positive");
    }
  }
  if (doc.contains("channel_update_interval")) {
    sc.channel_update_interval_s =
        detail::number(doc.at("channel_update_interval"), "scenario.channel_update_interval");
  }
  sc.origin = detail::geopoint(require(doc, "origin", "scenario"), "scenario.origin");

  if (doc.contains("geofence")) {
    const json& g = doc.at("geofence");
    geo::Geofence fence;
    const json& boundary = require(g, "boundary", "scenario.geofence");
    std::size_t i = 0;
    for (const auto& p : boundary) {
      fence.boundary.push_back(
          detail::geopoint(p, "scenario.geofence.boundary[" + std::to_string(i++) + "]"));
    }
    fence.alt_min = detail::number(require(g, "alt_min", "scenario.geofence"), "scenario.geofence.alt_min");
    fence.alt_max = detail::number(require(g, "alt_max", "scenario.geofence"), "scenario.geofence.alt_max");
    try {
      fence.to_local(sc.origin);  // validates shape
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("scenario.geofence", e.what());
    }
    sc.geofence = std::move(fence);
  }

  if (doc.contains("wind")) {
    const json& w = doc.at("wind");
    sc.wind_mps.east = w.contains("east") ? detail::number(w.at("east"), "scenario.wind.east") : 0.0;
    sc.wind_mps.north = w.contains("north") ? detail::number(w.at("north"), "scenario.wind.north") : 0.0;
    sc.wind_mps.up = w.contains("up") ? detail::number(w.at("up"), "scenario.wind.up") : 0.0;
    if (!sc.wind_mps.finite()) {
      throw ScenarioError("scenario.wind", "wind components must be finite");
    }
  }

  if (doc.contains("propagation")) {
    const std::string m = detail::text(doc.at("propagation"), "scenario.propagation");
    if (m == "free_space") {
      sc.propagation = channel::PropagationModel::free_space;
    } else if (m == "two_ray") {
      sc.propagation = channel::PropagationModel::two_ray;
    } else {
      throw ScenarioError("scenario.propagation", "unknown model: " + m);
    }
  }

  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    const std::string m = detail::text(require(n, "model", "scenario.noise"), "scenario.noise.model");
    if (m == "thermal") {
      sc.noise = channel::NoiseModel::thermal();
    } else if (m == "fixed") {
      sc.noise = channel::NoiseModel::fixed(
          detail::number(require(n, "floor_dbm", "scenario.noise"), "scenario.noise.floor_dbm"));
    } else {
      throw ScenarioError("scenario.noise.model", "unknown model: " + m);
    }
  }

  if (doc.contains("registry")) {
    sc.registry_path = detail::text(doc.at("registry"), "scenario.registry");
  }

  if (doc.contains("supervisor")) {
    const json& s = doc.at("supervisor");
    if (s.contains("enabled")) {
      sc.supervisor.enabled = s.at("enabled").get<bool>();
    }
    if (s.contains("lookahead")) {
      sc.supervisor.lookahead_s = detail::number(s.at("lookahead"), "scenario.supervisor.lookahead");
    }
    if (s.contains("grace")) {
      sc.supervisor.grace_s = detail::number(s.at("grace"), "scenario.supervisor.grace");
    }
  }

  // --- nodes ---
  const json& nodes = require(doc, "nodes", "scenario");
  std::set<std::string> seen_ids;
  std::size_t ni = 0;
  for (const auto& n : nodes) {
    const std::string path = "scenario.nodes[" + std::to_string(ni++) + "]";
    NodeSpec spec;
    spec.id = detail::text(require(n, "id", path), path + ".id");
    if (!seen_ids.insert(spec.id).second) {
      throw ScenarioError(path + ".id", "duplicate node id: " + spec.id);
    }
    const std::string kind = detail::text(require(n, "kind", path), path + ".kind");
    if (kind == "fixed") {
      spec.kind = NodeKind::fixed;
    } else if (kind == "portable") {
      spec.kind = NodeKind::portable;
    } else {
      throw ScenarioError(path + ".kind", "node kind must be fixed or portable");
    }
    spec.position = detail::geopoint(require(n, "position", path), path + ".position");
    if (n.contains("radio")) {
      const json& r = n.at("radio");
      auto& rc = spec.radio;
      if (r.contains("center_freq_hz")) rc.center_freq_hz = detail::number(r.at("center_freq_hz"), path + ".radio.center_freq_hz");
      if (r.contains("bandwidth_hz")) rc.bandwidth_hz = detail::number(r.at("bandwidth_hz"), path + ".radio.bandwidth_hz");
      if (r.contains("sample_rate_hz")) rc.sample_rate_hz = detail::number(r.at("sample_rate_hz"), path + ".radio.sample_rate_hz");
      if (r.contains("tx_power_dbm")) rc.tx_power_dbm = detail::number(r.at("tx_power_dbm"), path + ".radio.tx_power_dbm");
      if (r.contains("noise_figure_db")) rc.noise_figure_db = detail::number(r.at("noise_figure_db"), path + ".radio.noise_figure_db");
      if (r.contains("n_prb")) rc.n_prb = static_cast<int>(detail::number(r.at("n_prb"), path + ".radio.n_prb"));
      if (r.contains("antenna")) rc.antenna = detail::antenna(r.at("antenna"), path + ".radio.antenna");
      if (r.contains("transmit")) spec.transmit = r.at("transmit").get<bool>();
      try {
        rc.validate();
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(path + ".radio", e.what());
      }
    }
    if (n.contains("limits")) {
      const json& l = n.at("limits");
      auto& lim = spec.limits;
      if (l.contains("pitch_gain")) {
        spec.pitch_gain = detail::number(l.at("pitch_gain"), path + ".limits.pitch_gain");
      }
      if (l.contains("v_max_h")) lim.v_max_h = detail::number(l.at("v_max_h"), path + ".limits.v_max_h");
      if (l.contains("v_max_v")) lim.v_max_v = detail::number(l.at("v_max_v"), path + ".limits.v_max_v");
      if (l.contains("a_max")) lim.a_max = detail::number(l.at("a_max"), path + ".limits.a_max");
      if (l.contains("kind")) {
        const std::string vk = detail::text(l.at("kind"), path + ".limits.kind");
        if (vk == "multicopter") {
          lim.kind = vehicle::VehicleKind::multicopter;
        } else if (vk == "rover") {
          lim.kind = vehicle::VehicleKind::rover;
          if (!l.contains("v_max_v")) {
            lim.v_max_v = 0.0;
          }
        } else {
          throw ScenarioError(path + ".limits.kind", "vehicle kind must be multicopter or rover");
        }
      }
      try {
        lim.validate();
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(path + ".limits", e.what());
      }
    }
    sc.nodes.push_back(std::move(spec));
  }
  if (sc.nodes.empty()) {
    throw ScenarioError("scenario.nodes", "at least one node is required");
  }

  // --- missions ---
  std::set<std::string> mission_nodes;
  if (doc.contains("missions")) {
    std::size_t mi = 0;
    for (const auto& m : doc.at("missions")) {
      const std::string path = "scenario.missions[" + std::to_string(mi++) + "]";
      const std::string node_id = detail::text(require(m, "node", path), path + ".node");
      const NodeSpec* node = sc.find_node(node_id);
      if (node == nullptr) {
        throw ScenarioError(path + ".node", "mission references unknown node: " + node_id);
      }
      if (node->kind != NodeKind::portable) {
        throw ScenarioError(path + ".node", "missions require a portable node");
      }
      if (!mission_nodes.insert(node_id).second) {
        throw ScenarioError(path + ".node", "node already has a mission: " + node_id);
      }
      const std::string type =
          m.contains("type") ? detail::text(m.at("type"), path + ".type") : std::string("waypoints");
      if (type == "waypoints") {
        WaypointMissionSpec spec;
        spec.node = node_id;
        if (m.contains("arrival_radius")) {
          spec.arrival_radius_m = detail::number(m.at("arrival_radius"), path + ".arrival_radius");
        }
        if (m.contains("takeoff_alt")) {
          spec.takeoff_alt_m = detail::number(m.at("takeoff_alt"), path + ".takeoff_alt");
        }
        std::size_t wi = 0;
        for (const auto& w : require(m, "waypoints", path)) {
          const std::string wpath = path + ".waypoints[" + std::to_string(wi++) + "]";
          vehicle::Waypoint wp;
          wp.position.east = detail::number(require(w, "east", wpath), wpath + ".east");
          wp.position.north = detail::number(require(w, "north", wpath), wpath + ".north");
          wp.position.up = detail::number(require(w, "up", wpath), wpath + ".up");
          if (w.contains("speed")) wp.speed_mps = detail::number(w.at("speed"), wpath + ".speed");
          if (w.contains("wait")) wp.wait_s = detail::number(w.at("wait"), wpath + ".wait");
          spec.waypoints.push_back(wp);
        }
        vehicle::Mission probe;
        probe.waypoints = spec.waypoints;
        try {
          probe.validate(node->limits);
        } catch (const std::invalid_argument& e) {
          throw ScenarioError(path + ".waypoints", e.what());
        }
        sc.missions.push_back(std::move(spec));
      } else if (type == "orbiter") {
        OrbiterSpec spec;
        spec.node = node_id;
        spec.tracer = detail::text(require(m, "tracer", path), path + ".tracer");
        if (sc.find_node(spec.tracer) == nullptr) {
          throw ScenarioError(path + ".tracer", "orbiter references unknown node: " + spec.tracer);
        }
        if (m.contains("radius")) {
          spec.radius_m = detail::number(m.at("radius"), path + ".radius");
        }
        if (m.contains("angular_rate")) {
          spec.angular_rate = detail::number(m.at("angular_rate"), path + ".angular_rate");
        }
        if (!(spec.radius_m > 0.0)) {
          throw ScenarioError(path + ".radius", "orbit radius must be positive");
        }
        sc.orbiters.push_back(std::move(spec));
      } else {
        throw ScenarioError(path + ".type", "mission type must be waypoints or orbiter");
      }
    }
  }
  for (const auto& orb : sc.orbiters) {
    bool tracer_has_mission = false;
    for (const auto& wm : sc.missions) {
      tracer_has_mission |= wm.node == orb.tracer;
    }
    if (!tracer_has_mission) {
      throw ScenarioError("scenario.missions", "orbiter tracer has no waypoint mission: " + orb.tracer);
    }
  }

  // --- slicing ---
  if (doc.contains("slicing")) {
    const json& s = doc.at("slicing");
    SlicingSpec spec;
    spec.cell_node = detail::text(require(s, "cell", "scenario.slicing"), "scenario.slicing.cell");
    const NodeSpec* cell = sc.find_node(spec.cell_node);
    if (cell == nullptr) {
      throw ScenarioError("scenario.slicing.cell", "unknown node: " + spec.cell_node);
    }
    if (!cell->transmit) {
      throw ScenarioError("scenario.slicing.cell", "cell node must transmit");
    }
    spec.total_prb = static_cast<int>(
        detail::number(require(s, "total_prb", "scenario.slicing"), "scenario.slicing.total_prb"));
    if (spec.total_prb < 1) {
      throw ScenarioError("scenario.slicing.total_prb", "total_prb must be >= 1");
    }
    if (s.contains("link")) {
      const json& l = s.at("link");
      if (l.contains("streams")) spec.link.streams = static_cast<int>(detail::number(l.at("streams"), "scenario.slicing.link.streams"));
      if (l.contains("efficiency")) spec.link.efficiency = detail::number(l.at("efficiency"), "scenario.slicing.link.efficiency");
      if (l.contains("se_max")) spec.link.se_max = detail::number(l.at("se_max"), "scenario.slicing.link.se_max");
    }
    if (s.contains("smoothing_window")) {
      spec.smoothing_window_s = detail::number(s.at("smoothing_window"), "scenario.slicing.smoothing_window");
    }
    std::size_t ti = 0;
    for (const auto& e : require(s, "timeline", "scenario.slicing")) {
      const std::string path = "scenario.slicing.timeline[" + std::to_string(ti++) + "]";
      ran::SliceTimeline::Entry entry;
      entry.time_s = detail::number(require(e, "time", path), path + ".time");
      if (e.contains("work_conserving")) {
        entry.config.work_conserving = e.at("work_conserving").get<bool>();
      }
      for (const auto& sh : require(e, "shares", path)) {
        ran::SliceShare share;
        share.slice_id = detail::text(require(sh, "slice", path), path + ".slice");
        share.share = detail::number(require(sh, "share", path), path + ".share");
        entry.config.slices.push_back(std::move(share));
      }
      try {
        entry.config.validate();
      } catch (const std::invalid_argument& e2) {
        throw ScenarioError(path + ".shares", e2.what());
      }
      spec.timeline.entries.push_back(std::move(entry));
    }
    try {
      spec.timeline.validate();
    } catch (const std::invalid_argument& e2) {
      throw ScenarioError("scenario.slicing.timeline", e2.what());
    }
    std::size_t bi = 0;
    for (const auto& b : require(s, "ue_bindings", "scenario.slicing")) {
      const std::string path = "scenario.slicing.ue_bindings[" + std::to_string(bi++) + "]";
      ran::UeBinding binding;
      binding.ue_id = detail::text(require(b, "ue", path), path + ".ue");
      if (sc.find_node(binding.ue_id) == nullptr) {
        throw ScenarioError(path + ".ue", "unknown node: " + binding.ue_id);
      }
      binding.slice_id = detail::text(require(b, "slice", path), path + ".slice");
      if (b.contains("demand")) {
        if (b.at("demand").is_string()) {
          if (b.at("demand").get<std::string>() != "saturated") {
            throw ScenarioError(path + ".demand", "demand must be a rate in bit/s or \"saturated\"");
          }
          binding.demand_bps = ran::kSaturated;
        } else {
          binding.demand_bps = static_cast<std::int64_t>(detail::number(b.at("demand"), path + ".demand"));
        }
      }
      spec.bindings.push_back(std::move(binding));
    }
    if (spec.bindings.empty()) {
      throw ScenarioError("scenario.slicing.ue_bindings", "at least one UE binding is required");
    }
    sc.slicing = std::move(spec);
  }

  // --- measurements ---
  if (doc.contains("measurements")) {
    std::size_t mi = 0;
    for (const auto& m : doc.at("measurements")) {
      const std::string path = "scenario.measurements[" + std::to_string(mi++) + "]";
      MeasureSpec spec;
      spec.rx = detail::text(require(m, "rx", path), path + ".rx");
      spec.tx = detail::text(require(m, "tx", path), path + ".tx");
      if (sc.find_node(spec.rx) == nullptr) {
        throw ScenarioError(path + ".rx", "unknown node: " + spec.rx);
      }
      const NodeSpec* tx = sc.find_node(spec.tx);
      if (tx == nullptr) {
        throw ScenarioError(path + ".tx", "unknown node: " + spec.tx);
      }
      if (!tx->transmit) {
        throw ScenarioError(path + ".tx", "measurement tx node does not transmit: " + spec.tx);
      }
      if (m.contains("metrics")) {
        for (const auto& met : m.at("metrics")) {
          try {
            spec.metrics.push_back(parse_metric(met.get<std::string>()));
          } catch (const std::invalid_argument& e) {
            throw ScenarioError(path + ".metrics", e.what());
          }
        }
      } else {
        spec.metrics = {Metric::rsrp_dbm, Metric::snr_db};
      }
      sc.measurements.push_back(std::move(spec));
    }
  } else {
    // Default: every portable node measures every transmitting fixed node.
    for (const auto& rx : sc.nodes) {
      if (rx.kind != NodeKind::portable) {
        continue;
      }
      for (const auto& tx : sc.nodes) {
        if (&tx != &rx && tx.transmit) {
          sc.measurements.push_back({rx.id, tx.id, {Metric::rsrp_dbm, Metric::snr_db}});
        }
      }
    }
  }

  // --- IQ capture ---
  if (doc.contains("iq")) {
    const json& q = doc.at("iq");
    if (q.contains("enabled")) sc.iq.enabled = q.at("enabled").get<bool>();
    if (q.contains("block_samples")) {
      sc.iq.block_samples = static_cast<std::size_t>(detail::number(q.at("block_samples"), "scenario.iq.block_samples"));
    }
    if (q.contains("interval")) sc.iq.interval_s = detail::number(q.at("interval"), "scenario.iq.interval");
    if (q.contains("tone_offset_hz")) sc.iq.tone_offset_hz = detail::number(q.at("tone_offset_hz"), "scenario.iq.tone_offset_hz");
    if (q.contains("dump")) sc.iq.dump = q.at("dump").get<bool>();
    if (q.contains("measure_rx_power")) sc.iq.measure_rx_power = q.at("measure_rx_power").get<bool>();
    if (q.contains("capture")) {
      for (const auto& c : q.at("capture")) {
        const std::string id = c.get<std::string>();
        if (sc.find_node(id) == nullptr) {
          throw ScenarioError("scenario.iq.capture", "unknown node: " + id);
        }
        sc.iq.capture.push_back(id);
      }
    }
    if (sc.iq.enabled && sc.iq.capture.empty()) {
      for (const auto& n : sc.nodes) {
        if (!n.transmit) {
          sc.iq.capture.push_back(n.id);
        }
      }
    }
  }

  // --- effective configuration echo ---
  nlohmann::ordered_json eff;
  eff["name"] = sc.name;
  eff["seed"] = sc.seed;
  eff["dt"] = sc.dt_s;
  eff["duration"] = sc.duration_s;
  eff["measurement_rate_hz"] = sc.measurement_rate_hz;
  eff["channel_update_interval"] = sc.channel_update_interval_s;
  eff["propagation"] = sc.propagation == channel::PropagationModel::two_ray ? "two_ray" : "free_space";
  eff["wind"] = {{"east", sc.wind_mps.east}, {"north", sc.wind_mps.north}, {"up", sc.wind_mps.up}};
  eff["noise"] = sc.noise.kind == channel::NoiseModel::Kind::thermal
                     ? nlohmann::ordered_json{{"model", "thermal"}}
                     : nlohmann::ordered_json{{"model", "fixed"}, {"floor_dbm", sc.noise.fixed_floor_dbm}};
  eff["supervisor"] = {{"enabled", sc.supervisor.enabled},
                       {"grace", sc.supervisor.grace_s},
                       {"lookahead", sc.supervisor.lookahead_s ? nlohmann::ordered_json(*sc.supervisor.lookahead_s)
                                                               : nlohmann::ordered_json("auto")}};
  eff["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : sc.nodes) {
    nlohmann::ordered_json e;
    e["id"] = n.id;
    e["kind"] = to_string(n.kind);
    e["transmit"] = n.transmit;
    e["tx_power_dbm"] = n.radio.tx_power_dbm;
    e["center_freq_hz"] = n.radio.center_freq_hz;
    e["bandwidth_hz"] = n.radio.bandwidth_hz;
    e["n_prb"] = n.radio.n_prb;
    if (n.kind == NodeKind::portable) {
      e["limits"] = {{"v_max_h", n.limits.v_max_h},
                     {"v_max_v", n.limits.v_max_v},
                     {"a_max", n.limits.a_max}};
    }
    eff["nodes"].push_back(std::move(e));
  }
  eff["mission_count"] = sc.missions.size() + sc.orbiters.size();
  eff["sliced"] = sc.slicing.has_value();
  eff["iq_capture"] = sc.iq.enabled;
  sc.effective = std::move(eff);

  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::system_error(errno, std::generic_category(), "cannot open scenario: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario sc = load_scenario(buf.str());
  // Registry paths are relative to the scenario document.
  if (sc.registry_path && std::filesystem::path(*sc.registry_path).is_relative()) {
    sc.registry_path =
        (std::filesystem::path(path).parent_path() / *sc.registry_path).string();
  }
  return sc;
}

}  // namespace aerialtwin::experiment

#pragma once

// Common record types for experiment runs: measurements and the event log.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aerialtwin/geo.hpp"

namespace aerialtwin::experiment {

enum class Metric { rsrp_dbm, snr_db, throughput_bps, rx_power_dbm };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::rsrp_dbm: return "rsrp_dbm";
    case Metric::snr_db: return "snr_db";
    case Metric::throughput_bps: return "throughput_bps";
    case Metric::rx_power_dbm: return "rx_power_dbm";
  }
  return "?";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "rsrp_dbm") return Metric::rsrp_dbm;
  if (s == "snr_db") return Metric::snr_db;
  if (s == "throughput_bps") return Metric::throughput_bps;
  if (s == "rx_power_dbm") return Metric::rx_power_dbm;
  throw std::invalid_argument("unknown metric: " + s);
}

struct MeasurementRecord {
  double time_s = 0.0;
  std::string node_id;
  std::optional<std::string> peer_node_id;
  geo::GeoPoint position;
  Metric metric = Metric::rx_power_dbm;
  double value = 0.0;
};

enum class EventKind {
  command_accepted,
  command_rejected,
  override_applied,
  rf_violation,
  silence_suppressed,
  slice_reconfig,
  waypoint_reached,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::command_accepted: return "command_accepted";
    case EventKind::command_rejected: return "command_rejected";
    case EventKind::override_applied: return "override";
    case EventKind::rf_violation: return "rf_violation";
    case EventKind::silence_suppressed: return "silence_suppressed";
    case EventKind::slice_reconfig: return "slice_reconfig";
    case EventKind::waypoint_reached: return "waypoint_reached";
  }
  return "?";
}

struct Event {
  double time_s = 0.0;
  EventKind kind = EventKind::command_accepted;
  nlohmann::ordered_json payload;
};

// Ordered event log; a pure function of (scenario, seed). The header echoes
// the effective configuration, defaults included, for reproducibility.
struct RunLog {
  nlohmann::ordered_json header;
  std::vector<Event> events;
};

}  // namespace aerialtwin::experiment

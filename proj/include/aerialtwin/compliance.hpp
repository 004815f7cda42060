#pragma once

// Spectrum authorization registry and emission validator. The default
// registry encodes the thirteen Innovation Zone bands this testbed may
// transmit in, with per-band EIRP limits for fixed and mobile stations,
// airborne prohibitions, and coordination flags. The supervisor consults
// the validator before (and while) any transmitter is enabled.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace aerialtwin::compliance {

enum class OperationType { fixed, mobile, fixed_and_mobile };
enum class AllocationType { federal_shared, non_federal };

inline const char* to_string(OperationType t) {
  switch (t) {
    case OperationType::fixed: return "fixed";
    case OperationType::mobile: return "mobile";
    case OperationType::fixed_and_mobile: return "fixed_and_mobile";
  }
  return "?";
}

inline const char* to_string(AllocationType t) {
  switch (t) {
    case AllocationType::federal_shared: return "federal_shared";
    case AllocationType::non_federal: return "non_federal";
  }
  return "?";
}

struct BandRecord {
  std::int64_t low_hz = 0;
  std::int64_t high_hz = 0;
  OperationType operation = OperationType::fixed_and_mobile;
  AllocationType allocation = AllocationType::non_federal;
  std::optional<double> fs_max_eirp_dbm;
  std::optional<double> ms_max_eirp_dbm;
  bool airborne_prohibited = false;
  bool coordination_required = false;

  void validate() const {
    if (low_hz >= high_hz) {
      throw std::invalid_argument("band record requires low < high");
    }
    if (!fs_max_eirp_dbm && !ms_max_eirp_dbm) {
      throw std::invalid_argument("band record needs at least one EIRP limit");
    }
  }
};

using Registry = std::vector<BandRecord>;

// The thirteen authorized bands, 0.6-40 GHz. Airborne use is prohibited on
// 2500-2690, 3550-3700 and 3700-3980 MHz; bands requiring coordination with
// incumbents or a spectrum access system carry the coordination flag.
inline Registry load_default_registry() {
  constexpr std::int64_t MHz = 1000000;
  auto fs = [](double v) { return std::optional<double>(v); };
  const std::optional<double> none;
  Registry r;
  r.push_back({617 * MHz, 634 * MHz + MHz / 2, OperationType::fixed, AllocationType::non_federal,
               fs(65.0), none, false, false});
  r.push_back({663 * MHz, 698 * MHz, OperationType::mobile, AllocationType::non_federal,
               none, fs(20.0), false, false});
  r.push_back({907 * MHz + MHz / 2, 912 * MHz + MHz / 2, OperationType::fixed_and_mobile,
               AllocationType::federal_shared, fs(65.0), fs(20.0), false, false});
  r.push_back({1755 * MHz, 1760 * MHz, OperationType::mobile, AllocationType::federal_shared,
               none, fs(20.0), false, false});
  r.push_back({2155 * MHz, 2160 * MHz, OperationType::fixed, AllocationType::non_federal,
               fs(65.0), none, false, false});
  r.push_back({2390 * MHz, 2483 * MHz + MHz / 2, OperationType::fixed_and_mobile,
               AllocationType::federal_shared, fs(65.0), fs(20.0), false, false});
  r.push_back({2500 * MHz, 2690 * MHz, OperationType::fixed_and_mobile,
               AllocationType::non_federal, fs(65.0), fs(20.0), true, true});
  r.push_back({3550 * MHz, 3700 * MHz, OperationType::fixed_and_mobile,
               AllocationType::federal_shared, fs(65.0), fs(20.0), true, true});
  r.push_back({3700 * MHz, 3980 * MHz, OperationType::mobile, AllocationType::non_federal,
               none, fs(20.0), true, true});
  r.push_back({5850 * MHz, 5925 * MHz, OperationType::fixed_and_mobile,
               AllocationType::federal_shared, fs(65.0), fs(20.0), false, false});
  r.push_back({5925 * MHz, 7125 * MHz, OperationType::fixed_and_mobile,
               AllocationType::non_federal, fs(65.0), fs(20.0), false, true});
  r.push_back({27500 * MHz, 28350 * MHz, OperationType::fixed_and_mobile,
               AllocationType::non_federal, fs(65.0), fs(20.0), false, false});
  r.push_back({38600 * MHz, 40000 * MHz, OperationType::fixed_and_mobile,
               AllocationType::non_federal, fs(65.0), fs(20.0), false, false});
  return r;
}

// ---------------------------------------------------------------------------
// Emission validation
// ---------------------------------------------------------------------------

enum class StationKind { fixed_station, mobile_station };

inline const char* to_string(StationKind k) {
  return k == StationKind::fixed_station ? "fixed_station" : "mobile_station";
}

struct EmissionRequest {
  StationKind node_kind = StationKind::mobile_station;
  bool airborne = false;
  double center_freq_hz = 0.0;
  double bandwidth_hz = 0.0;
  double eirp_dbm = 0.0;
};

enum class ViolationReason {
  out_of_band,
  operation_not_permitted,
  eirp_exceeded,
  airborne_prohibited,
};

inline const char* to_string(ViolationReason r) {
  switch (r) {
    case ViolationReason::out_of_band: return "out_of_band";
    case ViolationReason::operation_not_permitted: return "operation_not_permitted";
    case ViolationReason::eirp_exceeded: return "eirp_exceeded";
    case ViolationReason::airborne_prohibited: return "airborne_prohibited";
  }
  return "?";
}

struct ValidationResult {
  std::vector<ViolationReason> violations;
  std::vector<std::string> warnings;  // advisory: coordination, shared allocation

  bool authorized() const { return violations.empty(); }
};

// The occupied band [f - bw/2, f + bw/2] must lie inside a single band
// record (edges inclusive); station kind and EIRP are checked against that
// record. Multiple reasons accumulate. Coordination and shared-allocation
// requirements come back as warnings, not violations.
inline ValidationResult validate_emission(const EmissionRequest& req, const Registry& registry) {
  ValidationResult res;
  if (!(req.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("emission bandwidth must be positive");
  }
  const double lo = req.center_freq_hz - req.bandwidth_hz / 2.0;
  const double hi = req.center_freq_hz + req.bandwidth_hz / 2.0;

  const BandRecord* band = nullptr;
  for (const auto& b : registry) {
    if (lo >= static_cast<double>(b.low_hz) && hi <= static_cast<double>(b.high_hz)) {
      band = &b;
      break;
    }
  }
  if (band == nullptr) {
    res.violations.push_back(ViolationReason::out_of_band);
    return res;
  }

  const bool fixed_ok = band->operation != OperationType::mobile;
  const bool mobile_ok = band->operation != OperationType::fixed;
  const bool kind_ok =
      req.node_kind == StationKind::fixed_station ? fixed_ok : mobile_ok;
  if (!kind_ok) {
    res.violations.push_back(ViolationReason::operation_not_permitted);
  } else {
    const auto& limit = req.node_kind == StationKind::fixed_station ? band->fs_max_eirp_dbm
                                                                    : band->ms_max_eirp_dbm;
    if (!limit.has_value()) {
      res.violations.push_back(ViolationReason::operation_not_permitted);
    } else if (req.eirp_dbm > *limit) {
      res.violations.push_back(ViolationReason::eirp_exceeded);
    }
  }
  if (req.airborne && band->airborne_prohibited) {
    res.violations.push_back(ViolationReason::airborne_prohibited);
  }
  if (band->coordination_required) {
    res.warnings.push_back("coordination_required");
  }
  if (band->allocation == AllocationType::federal_shared) {
    res.warnings.push_back("shared_allocation");
  }
  return res;
}

// Altitude above which a vehicle counts as airborne (rovers bumping over
// terrain stay below it).
inline constexpr double kAirborneAltitudeM = 0.5;

// ---------------------------------------------------------------------------
// Registry file format
// ---------------------------------------------------------------------------

// Canonical JSON serialization; serialize(parse(serialize(r))) is
// byte-identical.
inline std::string serialize_registry(const Registry& registry) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& b : registry) {
    nlohmann::ordered_json o;
    o["low_hz"] = b.low_hz;
    o["high_hz"] = b.high_hz;
    o["operation"] = to_string(b.operation);
    o["allocation"] = to_string(b.allocation);
    if (b.fs_max_eirp_dbm) {
      o["fs_max_eirp_dbm"] = *b.fs_max_eirp_dbm;
    }
    if (b.ms_max_eirp_dbm) {
      o["ms_max_eirp_dbm"] = *b.ms_max_eirp_dbm;
    }
    o["airborne_prohibited"] = b.airborne_prohibited;
    o["coordination_required"] = b.coordination_required;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

inline Registry parse_registry(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (!doc.is_array()) {
    throw std::invalid_argument("registry document must be a JSON array");
  }
  Registry out;
  for (const auto& o : doc) {
    BandRecord b;
    b.low_hz = o.at("low_hz").get<std::int64_t>();
    b.high_hz = o.at("high_hz").get<std::int64_t>();
    const std::string op = o.at("operation").get<std::string>();
    if (op == "fixed") {
      b.operation = OperationType::fixed;
    } else if (op == "mobile") {
      b.operation = OperationType::mobile;
    } else if (op == "fixed_and_mobile") {
      b.operation = OperationType::fixed_and_mobile;
    } else {
      throw std::invalid_argument("unknown operation type: " + op);
    }
    const std::string alloc = o.at("allocation").get<std::string>();
    if (alloc == "federal_shared") {
      b.allocation = AllocationType::federal_shared;
    } else if (alloc == "non_federal") {
      b.allocation = AllocationType::non_federal;
    } else {
      throw std::invalid_argument("unknown allocation type: " + alloc);
    }
    if (o.contains("fs_max_eirp_dbm")) {
      b.fs_max_eirp_dbm = o.at("fs_max_eirp_dbm").get<double>();
    }
    if (o.contains("ms_max_eirp_dbm")) {
      b.ms_max_eirp_dbm = o.at("ms_max_eirp_dbm").get<double>();
    }
    b.airborne_prohibited = o.value("airborne_prohibited", false);
    b.coordination_required = o.value("coordination_required", false);
    b.validate();
    out.push_back(b);
  }
  return out;
}

}  // namespace aerialtwin::compliance

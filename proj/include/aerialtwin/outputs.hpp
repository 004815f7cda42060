#pragma once

// Run artifacts: measurements.csv, events.jsonl, manifest.json and optional
// raw IQ dumps. Formatting is locale-independent and fully deterministic;
// rerunning the same (scenario, seed) reproduces every byte. The manifest
// deliberately carries no wall-clock timestamp.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aerialtwin/engine.hpp"
#include "aerialtwin/experiment.hpp"
#include "aerialtwin/scenario.hpp"
#include "aerialtwin/sha256.hpp"
#include "aerialtwin/version.hpp"

namespace aerialtwin::experiment {

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// RFC-4180: quote fields containing separators, quotes or newlines.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline std::string measurements_csv(const std::vector<MeasurementRecord>& records) {
  std::string out = "time,node_id,peer_node_id,lat,lon,alt,metric,value\n";
  for (const auto& r : records) {
    out += detail::fixed6(r.time_s);
    out += ',';
    out += detail::csv_field(r.node_id);
    out += ',';
    out += r.peer_node_id ? detail::csv_field(*r.peer_node_id) : std::string();
    out += ',';
    out += detail::fixed6(r.position.lat_deg);
    out += ',';
    out += detail::fixed6(r.position.lon_deg);
    out += ',';
    out += detail::fixed6(r.position.alt_m);
    out += ',';
    out += to_string(r.metric);
    out += ',';
    out += detail::fixed6(r.value);
    out += '\n';
  }
  return out;
}

inline std::string events_jsonl(const RunLog& log) {
  std::string out;
  nlohmann::ordered_json header;
  header["run_header"] = log.header;
  out += header.dump();
  out += '\n';
  for (const auto& e : log.events) {
    nlohmann::ordered_json line;
    line["time"] = e.time_s;
    line["kind"] = to_string(e.kind);
    line["payload"] = e.payload;
    out += line.dump();
    out += '\n';
  }
  return out;
}

inline std::string manifest_json(const Scenario& sc, const RunResult& result) {
  nlohmann::ordered_json m;
  m["scenario_name"] = sc.name;
  m["scenario_sha256"] = sha256::hex_digest(sc.raw_bytes);
  m["seed"] = result.seed;
  m["tool_version"] = kVersion;
  m["ticks"] = result.ticks;
  m["events"] = result.log.events.size();
  m["measurements"] = result.measurements.size();
  return m.dump(2) + "\n";
}

// Raw interleaved little-endian float32 I,Q pairs plus a JSON sidecar with
// the capture metadata.
inline void write_iq_dump(const std::filesystem::path& bin_path, const channel::IqBuffer& buf,
                          double center_freq_hz) {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) {
    throw std::system_error(errno, std::generic_category(), "cannot write " + bin_path.string());
  }
  for (const auto& s : buf.samples) {
    const float iq[2] = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
    out.write(reinterpret_cast<const char*>(iq), sizeof(iq));
  }
  nlohmann::ordered_json meta;
  meta["center_freq_hz"] = center_freq_hz;
  meta["sample_rate_hz"] = buf.sample_rate_hz;
  meta["start_time"] = buf.start_time_s;
  meta["samples"] = buf.samples.size();
  meta["format"] = "interleaved float32 I,Q little-endian";
  std::filesystem::path meta_path = bin_path;
  meta_path.replace_extension(".json");
  std::ofstream mo(meta_path, std::ios::binary);
  mo << meta.dump(2) << "\n";
}

// Writes measurements.csv, events.jsonl and manifest.json (plus IQ dumps
// when captured) into out_dir, creating it if needed.
inline void emit_outputs(const Scenario& sc, const RunResult& result,
                         const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto write = [&](const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) {
      throw std::system_error(errno, std::generic_category(), "cannot write " + p.string());
    }
    out << content;
  };
  write(out_dir / "measurements.csv", measurements_csv(result.measurements));
  write(out_dir / "events.jsonl", events_jsonl(result.log));
  write(out_dir / "manifest.json", manifest_json(sc, result));
  if (sc.iq.dump) {
    for (const auto& [node_id, buf] : result.iq_captures) {
      const NodeSpec* node = sc.find_node(node_id);
      write_iq_dump(out_dir / ("iq_" + node_id + ".bin"), buf,
                    node ? node->radio.center_freq_hz : 0.0);
    }
  }
}

}  // namespace aerialtwin::experiment

#pragma once

// Post-processing for run artifacts: pivoting measurement CSVs into
// plottable columns and rendering event logs as a readable timeline.
// Pure text-to-text transforms, no locale or wall-clock dependence.

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace aerialtwin::post {

struct CsvRow {
  std::string time;
  std::string node_id;
  std::string peer_node_id;
  std::string lat, lon, alt;
  std::string metric;
  std::string value;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace detail

inline std::vector<CsvRow> parse_measurements_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    if (first) {
      first = false;
      continue;  // header
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 8) {
      throw std::invalid_argument("malformed CSV row: " + line);
    }
    rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]});
  }
  return rows;
}

enum class GroupBy { node, peer, metric };

inline GroupBy parse_group_by(const std::string& s) {
  if (s == "node") return GroupBy::node;
  if (s == "peer") return GroupBy::peer;
  if (s == "metric") return GroupBy::metric;
  throw std::invalid_argument("unknown group_by: " + s + " (expected node, peer or metric)");
}

// Filters rows to one metric and pivots them into tab-separated columns:
// time followed by one column per group value, "nan" where a group has no
// sample at that time. Suitable for piping into any plotting tool.
inline std::string pivot(const std::vector<CsvRow>& rows, const std::string& metric,
                         GroupBy group_by) {
  std::vector<std::string> groups;
  auto group_of = [&](const CsvRow& r) -> const std::string& {
    switch (group_by) {
      case GroupBy::node: return r.node_id;
      case GroupBy::peer: return r.peer_node_id;
      case GroupBy::metric: return r.metric;
    }
    return r.node_id;
  };
  std::vector<std::string> times;                       // in first-seen order
  std::map<std::string, std::map<std::string, std::string>> cells;  // time -> group -> value

  for (const auto& r : rows) {
    if (group_by != GroupBy::metric && r.metric != metric) {
      continue;
    }
    const std::string& g = group_of(r);
    bool known = false;
    for (const auto& existing : groups) {
      known |= existing == g;
    }
    if (!known) {
      groups.push_back(g);
    }
    if (cells.find(r.time) == cells.end()) {
      times.push_back(r.time);
    }
    cells[r.time][g] = r.value;
  }

  std::string out = "time";
  for (const auto& g : groups) {
    out += '\t';
    out += g.empty() ? "(none)" : g;
  }
  out += '\n';
  for (const auto& t : times) {
    out += t;
    const auto& row = cells[t];
    for (const auto& g : groups) {
      out += '\t';
      const auto it = row.find(g);
      out += it == row.end() ? "nan" : it->second;
    }
    out += '\n';
  }
  return out;
}

// Renders events.jsonl as a chronological human-readable timeline.
// Overrides and RF violations are flagged. Throws with the line number on
// malformed input.
inline std::string replay(const std::string& jsonl) {
  std::ostringstream out;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("run_header")) {
      const auto& h = j.at("run_header");
      out << "=== run: " << h.value("name", "?") << " seed=" << h.value("seed", 0)
          << " strict=" << (h.value("strict", false) ? "yes" : "no") << " ===\n";
      continue;
    }
    if (!j.contains("time") || !j.contains("kind")) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": missing time/kind");
    }
    const double t = j.at("time").get<double>();
    const std::string kind = j.at("kind").get<std::string>();
    const bool alert = kind == "override" || kind == "rf_violation";
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%10.3f", t);
    out << (alert ? "!! " : "   ") << tbuf << "  " << kind;
    if (j.contains("payload")) {
      const auto& p = j.at("payload");
      if (p.contains("node")) {
        out << "  node=" << p.at("node").get<std::string>();
      }
      if (p.contains("kind")) {
        out << " cmd=" << p.at("kind").get<std::string>();
      }
      if (p.contains("rule")) {
        out << " rule=" << p.at("rule").get<std::string>();
      }
      if (p.contains("reason")) {
        out << " reason=" << p.at("reason").get<std::string>();
      }
      if (p.contains("reasons")) {
        out << " reasons=";
        bool first = true;
        for (const auto& r : p.at("reasons")) {
          out << (first ? "" : ",") << r.get<std::string>();
          first = false;
        }
      }
      if (p.contains("waypoint")) {
        out << " waypoint=" << p.at("waypoint").get<int>();
      }
      if (p.contains("shares")) {
        out << " shares=";
        bool first = true;
        for (const auto& [k, v] : p.at("shares").items()) {
          out << (first ? "" : ",") << k << ":" << v.get<double>();
          first = false;
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace aerialtwin::post

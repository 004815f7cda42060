// Acceptance suite for the bundled scenarios: runs every criterion at its
// stated tolerance and prints one pass/fail line per criterion. Exits with
// the number of failed criteria. Expects the scenario directory as argv[1].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aerialtwin/channel.hpp"
#include "aerialtwin/compliance.hpp"
#include "aerialtwin/engine.hpp"
#include "aerialtwin/outputs.hpp"
#include "aerialtwin/scenario.hpp"

using namespace aerialtwin;

namespace {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = true;
  std::vector<std::string> failures;
  double seconds = 0.0;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

std::string g_dir;

experiment::Scenario load(const std::string& name) {
  return experiment::load_scenario_file(g_dir + "/" + name);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Mean smoothed throughput of one UE over the last 5 s of each segment.
std::vector<double> ue1_plateaus(const experiment::RunResult& res,
                                 const std::vector<double>& segment_ends) {
  std::vector<double> out;
  for (double end : segment_ends) {
    double acc = 0.0;
    int n = 0;
    for (const auto& m : res.measurements) {
      if (m.metric == experiment::Metric::throughput_bps && m.node_id == "UE1" &&
          m.time_s >= end - 5.0 && m.time_s < end) {
        acc += m.value;
        ++n;
      }
    }
    out.push_back(n > 0 ? acc / n : 0.0);
  }
  return out;
}

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// How far a point sits outside the fence volume (0 when contained).
double outside_by(const geo::LocalFence& fence, const geo::EnuVector& p) {
  double horizontal = 0.0;
  if (!geo::detail::point_in_polygon(fence.boundary(), {p.east, p.north})) {
    horizontal = std::numeric_limits<double>::infinity();
    const auto& poly = fence.boundary();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      horizontal = std::min(horizontal, point_segment_distance(p.east, p.north, poly[j].x,
                                                               poly[j].y, poly[i].x, poly[i].y));
    }
  }
  const double vertical = std::max({0.0, fence.alt_min() - p.up, p.up - fence.alt_max()});
  return std::max(horizontal, vertical);
}

std::vector<double> g_plateaus_100prb;

// --------------------------------------------------------------------------
// Criterion 1: slicing throughput ratios at 100 PRBs
// --------------------------------------------------------------------------
CriterionResult criterion_1() {
  CriterionResult c{1, "slicing ratio reproduction, 100 PRB"};
  const Stopwatch clock;
  const auto sc = load("slicing_fig9.json");
  const auto res = experiment::run(sc);
  const std::vector<double> plateaus = ue1_plateaus(res, {15, 30, 45, 60});
  g_plateaus_100prb = plateaus;

  const std::vector<double> expected_norm = {1.0, 0.8, 0.2, 0.5};
  // Measured plateau levels from the testbed experiment this reproduces.
  const std::vector<double> reference_mbit = {170.0, 140.0, 40.0, 70.0};
  char buf[160];
  for (std::size_t i = 0; i < 4; ++i) {
    const double norm = plateaus[i] / plateaus[0];
    std::snprintf(buf, sizeof(buf), "plateau %zu normalized %.4f vs %.1f (tol 0.10)", i, norm,
                  expected_norm[i]);
    c.require(std::abs(norm - expected_norm[i]) <= 0.10, buf);
    const double rel = std::abs(reference_mbit[i] * 1e6 - plateaus[i]) / plateaus[i];
    std::snprintf(buf, sizeof(buf),
                  "reference %g Mbit/s vs simulated %.1f Mbit/s (dev %.1f%%, tol 20%%)",
                  reference_mbit[i], plateaus[i] / 1e6, rel * 100.0);
    c.require(rel <= 0.20, buf);
  }
  c.seconds = clock.seconds();
  c.require(c.seconds < 10.0, "runtime under 10 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 2: 15-PRB variant
// --------------------------------------------------------------------------
CriterionResult criterion_2() {
  CriterionResult c{2, "slicing 15-PRB variant, linearity in n_prb"};
  const Stopwatch clock;
  const auto sc = load("slicing_fig9_15prb.json");
  const auto res = experiment::run(sc);
  const std::vector<double> plateaus = ue1_plateaus(res, {15, 30, 45, 60});

  const std::vector<double> expected_norm = {1.0, 0.8, 0.2, 0.5};
  char buf[200];
  for (std::size_t i = 0; i < 4; ++i) {
    const double norm = plateaus[i] / plateaus[0];
    std::snprintf(buf, sizeof(buf), "plateau %zu normalized %.4f vs %.1f (tol 0.10)", i, norm,
                  expected_norm[i]);
    c.require(std::abs(norm - expected_norm[i]) <= 0.10, buf);
    // Ratio to the 100-PRB run: 15/100 within +-5 percentage points of the
    // ratio. Integer PRB rounding puts the 50:50 plateau at 8/50 = 0.16
    // exactly (largest remainder grants {8,7} of 15), so the band is read
    // in ratio points.
    const double ratio = plateaus[i] / g_plateaus_100prb[i];
    std::snprintf(buf, sizeof(buf), "plateau %zu ratio %.4f vs 0.15 (tol 0.05; rel dev %.1f%%)", i,
                  ratio, std::abs(ratio - 0.15) / 0.15 * 100.0);
    c.require(std::abs(ratio - 0.15) <= 0.05, buf);
  }
  c.seconds = clock.seconds();
  c.require(c.seconds < 10.0, "runtime under 10 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 3: RSRP versus altitude, closed-form agreement
// --------------------------------------------------------------------------
CriterionResult criterion_3() {
  CriterionResult c{3, "RSRP closed form and distance-doubling slope"};
  const Stopwatch clock;
  const auto sc = load("rsrp_altitudes.json");
  const auto res = experiment::run(sc);

  const auto* tx = sc.find_node("LW1");
  const geo::EnuVector tx_enu = geo::geodetic_to_enu(sc.origin, tx->position);
  const double f = tx->radio.center_freq_hz;
  const double tx_dbm = tx->radio.tx_power_dbm;
  const double re_db = 10.0 * std::log10(12.0 * tx->radio.n_prb);

  double max_err = 0.0;
  std::size_t samples = 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& m : res.measurements) {
    if (m.metric != experiment::Metric::rsrp_dbm) {
      continue;
    }
    const geo::EnuVector rx_enu = geo::geodetic_to_enu(sc.origin, m.position);
    const double d = geo::distance_3d(rx_enu, tx_enu);
    // Independent oracle: Friis from the logged geometry, isotropic gains.
    const double fspl = 20.0 * std::log10(4.0 * std::numbers::pi * d * f / 299792458.0);
    const double oracle = tx_dbm + 0.0 + 0.0 - fspl - re_db;
    max_err = std::max(max_err, std::abs(m.value - oracle));
    const double x = std::log2(d);
    sx += x;
    sy += m.value;
    sxx += x * x;
    sxy += x * m.value;
    ++samples;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu samples, max |rsrp - oracle| = %.3g dB (tol 1e-6)", samples,
                max_err);
  c.require(samples > 1000 && max_err <= 1e-6, buf);

  const double n = static_cast<double>(samples);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::snprintf(buf, sizeof(buf), "RSRP slope %.4f dB per distance doubling (want -6.02 +- 0.01)",
                slope);
  c.require(std::abs(-slope - 6.02) <= 0.01, buf);
  c.seconds = clock.seconds();
  c.require(c.seconds < 10.0, "runtime under 10 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 4: tracer/orbiter coordination
// --------------------------------------------------------------------------
CriterionResult criterion_4() {
  CriterionResult c{4, "tracer/orbiter orbits and landing"};
  const Stopwatch clock;
  const auto sc = load("tracer_orbiter.json");
  experiment::RunOptions opts;
  opts.strict = true;
  const auto res = experiment::run(sc, opts);

  const double radius = sc.orbiters.at(0).radius_m;
  std::map<double, geo::EnuVector> tracer_pos, orbiter_pos;
  for (const auto& m : res.measurements) {
    const geo::EnuVector enu = geo::geodetic_to_enu(sc.origin, m.position);
    if (m.node_id == "UAV1") {
      tracer_pos[m.time_s] = enu;
    } else if (m.node_id == "UAV2") {
      orbiter_pos[m.time_s] = enu;
    }
  }

  int windows = 0;
  char buf[160];
  for (const auto& e : res.log.events) {
    if (e.kind != experiment::EventKind::waypoint_reached ||
        e.payload.at("node").get<std::string>() != "UAV1") {
      continue;
    }
    const auto wp = e.payload.at("waypoint").get<std::size_t>();
    const double wait = sc.missions.at(0).waypoints.at(wp).wait_s;
    const double t0 = e.time_s;
    const double t1 = t0 + wait;
    double unwrapped = 0.0;
    double last_bearing = 0.0;
    bool first = true;
    double worst_radius_err = 0.0;
    for (const auto& [t, op] : orbiter_pos) {
      if (t < t0 || t > t1) {
        continue;
      }
      const auto it = tracer_pos.find(t);
      if (it == tracer_pos.end()) {
        continue;
      }
      const double rel_e = op.east - it->second.east;
      const double rel_n = op.north - it->second.north;
      const double bearing = std::atan2(rel_e, rel_n);
      if (first) {
        last_bearing = bearing;
        first = false;
      }
      double step = bearing - last_bearing;
      while (step > std::numbers::pi) step -= 2.0 * std::numbers::pi;
      while (step < -std::numbers::pi) step += 2.0 * std::numbers::pi;
      unwrapped += step;
      last_bearing = bearing;
      if (std::abs(unwrapped) >= std::numbers::pi / 2.0) {
        worst_radius_err = std::max(worst_radius_err, std::abs(std::hypot(rel_e, rel_n) - radius));
      }
    }
    ++windows;
    std::snprintf(buf, sizeof(buf), "waypoint %zu: phase unwrap %.4f rad (want 2pi +- 0.05)", wp,
                  std::abs(unwrapped));
    c.require(std::abs(std::abs(unwrapped) - 2.0 * std::numbers::pi) <= 0.05, buf);
    std::snprintf(buf, sizeof(buf),
                  "waypoint %zu: max |distance - radius| after first quarter = %.3f m (tol 0.5)",
                  wp, worst_radius_err);
    c.require(worst_radius_err <= 0.5, buf);
  }
  std::snprintf(buf, sizeof(buf), "%d orbit windows observed (want 3)", windows);
  c.require(windows == 3, buf);

  for (const char* id : {"UAV1", "UAV2"}) {
    const auto it = res.final_states.find(id);
    c.require(it != res.final_states.end(), std::string(id) + " has a final state");
    if (it != res.final_states.end()) {
      std::snprintf(buf, sizeof(buf), "%s landed and disarmed (alt %.3f, armed %d)", id,
                    it->second.position.up, it->second.armed);
      c.require(it->second.position.up <= 0.1 && !it->second.armed, buf);
    }
  }
  c.seconds = clock.seconds();
  c.require(c.seconds < 30.0, "runtime under 30 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 5: safety override containment
// --------------------------------------------------------------------------
CriterionResult criterion_5() {
  CriterionResult c{5, "geofence override containment in strict mode"};
  const Stopwatch clock;
  const auto sc = load("geofence_override.json");
  experiment::RunOptions opts;
  opts.strict = true;
  const auto res = experiment::run(sc, opts);

  int overrides = 0;
  for (const auto& e : res.log.events) {
    overrides += e.kind == experiment::EventKind::override_applied ? 1 : 0;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d supervisor override event(s) (want >= 1)", overrides);
  c.require(overrides >= 1, buf);

  const geo::LocalFence fence = sc.geofence->to_local(sc.origin);
  const double bound = 5.0 * sc.dt_s;  // v_max * dt = 0.5 m
  double worst = 0.0;
  for (const auto& m : res.measurements) {
    worst = std::max(worst, outside_by(fence, geo::geodetic_to_enu(sc.origin, m.position)));
  }
  std::snprintf(buf, sizeof(buf), "worst logged excursion %.3f m outside the fence (tol %.1f)",
                worst, bound);
  c.require(worst <= bound, buf);
  c.seconds = clock.seconds();
  c.require(c.seconds < 10.0, "runtime under 10 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 6: compliance registry and band-edge exactness
// --------------------------------------------------------------------------
CriterionResult criterion_6() {
  CriterionResult c{6, "spectrum compliance registry"};
  const Stopwatch clock;
  const auto registry = compliance::load_default_registry();

  const compliance::BandRecord* dl600 = nullptr;
  const compliance::BandRecord* b2500 = nullptr;
  const compliance::BandRecord* b3550 = nullptr;
  for (const auto& b : registry) {
    if (b.low_hz == 617000000) dl600 = &b;
    if (b.low_hz == 2500000000) b2500 = &b;
    if (b.low_hz == 3550000000) b3550 = &b;
  }
  c.require(dl600 != nullptr && dl600->high_hz == 634500000 &&
                dl600->operation == compliance::OperationType::fixed &&
                dl600->fs_max_eirp_dbm && *dl600->fs_max_eirp_dbm == 65.0 &&
                !dl600->ms_max_eirp_dbm,
            "617-634.5 MHz: fixed-only downlink with 65 dBm FS limit");
  c.require(b2500 != nullptr && b2500->airborne_prohibited,
            "2500-2690 MHz flagged airborne-prohibited");
  c.require(b3550 != nullptr && b3550->coordination_required,
            "3550-3700 MHz flagged coordination-required");
  {
    const compliance::EmissionRequest req{compliance::StationKind::mobile_station, true, 2.6e9,
                                          1e6, 10.0};
    const auto v = compliance::validate_emission(req, registry);
    c.require(!v.authorized() &&
                  std::find(v.violations.begin(), v.violations.end(),
                            compliance::ViolationReason::airborne_prohibited) != v.violations.end(),
              "airborne emission at 2.6 GHz rejected with airborne_prohibited");
  }

  // Band-edge exactness over 1000 randomized emissions per band.
  std::mt19937 rng(2024);
  long checked = 0;
  bool edges_ok = true;
  for (const auto& band : registry) {
    const double width = static_cast<double>(band.high_hz - band.low_hz);
    std::uniform_real_distribution<double> ubw(width * 1e-5, width * 0.45);
    std::uniform_real_distribution<double> upos(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double bw = ubw(rng);
      compliance::EmissionRequest req;
      req.node_kind = band.ms_max_eirp_dbm ? compliance::StationKind::mobile_station
                                           : compliance::StationKind::fixed_station;
      req.bandwidth_hz = bw;
      req.eirp_dbm = -30.0;
      const int mode = i % 3;
      if (mode == 0) {
        // Touching an edge exactly: authorized.
        const bool low_edge = (i % 2) == 0;
        req.center_freq_hz = low_edge ? static_cast<double>(band.low_hz) + bw / 2.0
                                      : static_cast<double>(band.high_hz) - bw / 2.0;
        edges_ok &= compliance::validate_emission(req, registry).authorized();
      } else if (mode == 1) {
        // Fully interior: authorized.
        const double lo = static_cast<double>(band.low_hz) + bw / 2.0;
        const double hi = static_cast<double>(band.high_hz) - bw / 2.0;
        req.center_freq_hz = lo + (hi - lo) * upos(rng);
        edges_ok &= compliance::validate_emission(req, registry).authorized();
      } else {
        // Crossing an edge by a positive amount: not authorized unless a
        // neighboring band happens to contain the shifted emission.
        const bool low_edge = (i % 2) == 0;
        const double push = std::max(1.0, bw * 1e-3) * (1.0 + upos(rng));
        req.center_freq_hz = low_edge ? static_cast<double>(band.low_hz) + bw / 2.0 - push
                                      : static_cast<double>(band.high_hz) - bw / 2.0 + push;
        bool elsewhere = false;
        for (const auto& other : registry) {
          elsewhere |= req.center_freq_hz - bw / 2.0 >= static_cast<double>(other.low_hz) &&
                       req.center_freq_hz + bw / 2.0 <= static_cast<double>(other.high_hz);
        }
        if (!elsewhere) {
          const auto v = compliance::validate_emission(req, registry);
          edges_ok &= std::find(v.violations.begin(), v.violations.end(),
                                compliance::ViolationReason::out_of_band) != v.violations.end();
        }
      }
      ++checked;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "band-edge exactness over %ld randomized emissions", checked);
  c.require(edges_ok && checked == 13000, buf);
  c.seconds = clock.seconds();
  c.require(c.seconds < 5.0, "runtime under 5 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 7: determinism of every bundled scenario
// --------------------------------------------------------------------------
CriterionResult criterion_7() {
  CriterionResult c{7, "bit-exact determinism across reruns and seeds"};
  const Stopwatch clock;
  const std::vector<std::string> scenarios = {"slicing_fig9.json",    "slicing_fig9_15prb.json",
                                              "rsrp_altitudes.json",  "tracer_orbiter.json",
                                              "geofence_override.json", "iq_capture.json"};
  auto events_body = [](const experiment::RunLog& log) {
    const std::string jsonl = experiment::events_jsonl(log);
    return jsonl.substr(jsonl.find('\n') + 1);  // drop the header line
  };

  for (const auto& name : scenarios) {
    const auto sc = load(name);
    const auto r1 = experiment::run(sc);
    const auto r2 = experiment::run(sc);
    c.require(experiment::measurements_csv(r1.measurements) ==
                  experiment::measurements_csv(r2.measurements),
              name + ": measurements.csv byte-identical across reruns");
    c.require(experiment::events_jsonl(r1.log) == experiment::events_jsonl(r2.log),
              name + ": events.jsonl byte-identical across reruns");

    experiment::RunOptions reseeded;
    reseeded.seed_override = sc.seed + 1000;
    const auto r3 = experiment::run(sc, reseeded);
    c.require(events_body(r1.log) == events_body(r3.log),
              name + ": event sequence independent of the seed");
    if (name == "iq_capture.json") {
      c.require(experiment::measurements_csv(r1.measurements) !=
                    experiment::measurements_csv(r3.measurements),
                name + ": noise-bearing measurements differ across seeds");
    } else {
      c.require(experiment::measurements_csv(r1.measurements) ==
                    experiment::measurements_csv(r3.measurements),
                name + ": noise-free measurements identical across seeds");
    }
  }
  c.seconds = clock.seconds();
  c.require(c.seconds < 60.0, "runtime under 60 s");
  return c;
}

// --------------------------------------------------------------------------
// Criterion 8: channel property suite
// --------------------------------------------------------------------------
CriterionResult criterion_8() {
  CriterionResult c{8, "channel propagation properties"};
  const Stopwatch clock;
  std::mt19937 rng(77);
  char buf[160];

  {  // Friis: 6.0206 dB per doubling within 1e-9.
    std::uniform_real_distribution<double> uf(100e6, 40e9);
    std::uniform_real_distribution<double> ud(1.0, 100e3);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double f = uf(rng);
      const double d = ud(rng);
      const double delta =
          channel::free_space_path_loss(f, 2.0 * d) - channel::free_space_path_loss(f, d);
      worst = std::max(worst, std::abs(delta - 20.0 * std::log10(2.0)));
    }
    std::snprintf(buf, sizeof(buf), "Friis doubling slope max dev %.2e dB (tol 1e-9)", worst);
    c.require(worst <= 1e-9, buf);
  }

  {  // Two-ray asymptotic slope beyond 3*d_break.
    double worst = 0.0;
    for (const double f : {915e6, 2.4e9, 3.51e9}) {
      for (const double h_tx : {5.0, 10.0, 20.0}) {
        const double h_rx = 2.0;
        const double d_break = channel::two_ray_break_distance(f, h_tx, h_rx);
        for (double d = 3.0 * d_break; d <= 24.0 * d_break; d *= 2.0) {
          const double slope = channel::two_ray_path_loss(f, 2.0 * d, h_tx, h_rx) -
                               channel::two_ray_path_loss(f, d, h_tx, h_rx);
          worst = std::max(worst, std::abs(slope - 12.04));
        }
      }
    }
    std::snprintf(buf, sizeof(buf), "two-ray slope max dev %.3f dB/doubling (tol 0.5)", worst);
    c.require(worst <= 0.5, buf);
  }

  {  // Reciprocity within 1e-12 for reciprocal patterns.
    std::uniform_real_distribution<double> up(-3000.0, 3000.0);
    std::uniform_real_distribution<double> ua(1.0, 120.0);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      channel::RadioEndpoint a, b;
      a.position = {up(rng), up(rng), ua(rng)};
      b.position = {up(rng), up(rng), ua(rng)};
      a.radio.center_freq_hz = b.radio.center_freq_hz = 3.51e9;
      if (i % 2 == 0) {
        a.radio.antenna = channel::AntennaPattern::vertical_dipole();
        b.radio.antenna = channel::AntennaPattern::vertical_dipole();
      }
      const auto fwd = channel::link_budget(a, b, channel::PropagationModel::free_space);
      const auto rev = channel::link_budget(b, a, channel::PropagationModel::free_space);
      worst = std::max(worst, std::abs(std::abs(fwd.link.gain) - std::abs(rev.link.gain)));
    }
    std::snprintf(buf, sizeof(buf), "reciprocity max |gain| dev %.2e (tol 1e-12)", worst);
    c.require(worst <= 1e-12, buf);
  }

  {  // Superposition within 1e-12 relative, and silence invisibility.
    channel::ChannelMatrix m;
    m.n = 3;
    m.entries.assign(9, channel::LinkGain{});
    m.at(0, 2) = {{0.31, -0.12}, 4e-6, 0.0};
    m.at(1, 2) = {{-0.05, 0.27}, 9e-6, 0.0};
    std::uniform_real_distribution<double> us(-1.0, 1.0);
    auto random_buffer = [&](std::size_t len) {
      channel::IqBuffer b;
      b.sample_rate_hz = 2e6;
      b.samples.resize(len);
      for (auto& s : b.samples) {
        s = {us(rng), us(rng)};
      }
      return b;
    };
    const channel::IqBuffer x0 = random_buffer(512);
    const channel::IqBuffer x1 = random_buffer(512);
    channel::IqBuffer zero;
    zero.sample_rate_hz = 2e6;
    zero.samples.assign(512, {0.0, 0.0});
    const double off = -std::numeric_limits<double>::infinity();
    const std::vector<double> floors = {off, off, off};
    const auto both = channel::propagate_iq({x0, x1, zero}, m, floors, 9);
    const auto only0 = channel::propagate_iq({x0, zero, zero}, m, floors, 9);
    const auto only1 = channel::propagate_iq({zero, x1, zero}, m, floors, 9);
    double worst = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
      const std::complex<double> sum = only0.outputs[2].samples[i] + only1.outputs[2].samples[i];
      worst = std::max(worst, std::abs(both.outputs[2].samples[i] - sum) /
                                  std::max(1.0, std::abs(sum)));
    }
    std::snprintf(buf, sizeof(buf), "superposition max rel dev %.2e (tol 1e-12)", worst);
    c.require(worst <= 1e-12, buf);
    // Suppressing the all-zero transmitter changes nothing.
    c.require(only0.silence_suppressed == 2,
              "all-zero transmitters are counted as suppressed");
    channel::ChannelMatrix muted = m;
    muted.at(1, 2).gain = {0.0, 0.0};
    const auto suppressed = channel::propagate_iq({x0, zero, zero}, m, floors, 9);
    const auto hand_muted = channel::propagate_iq({x0, zero, zero}, muted, floors, 9);
    double worst_sil = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
      worst_sil = std::max(worst_sil, std::abs(suppressed.outputs[2].samples[i] -
                                               hand_muted.outputs[2].samples[i]));
    }
    std::snprintf(buf, sizeof(buf), "silence suppression invisibility max dev %.2e (tol 1e-12)",
                  worst_sil);
    c.require(worst_sil <= 1e-12, buf);
  }

  c.seconds = clock.seconds();
  c.require(c.seconds < 10.0, "runtime under 10 s");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <scenario-dir>\n");
    return 64;
  }
  g_dir = argv[1];

  std::vector<CriterionResult> results;
  results.push_back(criterion_1());
  results.push_back(criterion_2());
  results.push_back(criterion_3());
  results.push_back(criterion_4());
  results.push_back(criterion_5());
  results.push_back(criterion_6());
  results.push_back(criterion_7());
  results.push_back(criterion_8());

  int failed = 0;
  for (const auto& c : results) {
    std::printf("[%s] criterion %d: %s (%.2f s)\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.seconds);
    if (!c.pass) {
      ++failed;
      for (const auto& f : c.failures) {
        std::printf("       !! %s\n", f.c_str());
      }
    }
  }
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed;
}

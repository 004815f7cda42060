#pragma once

// Wireless channel emulation: free-space and two-ray ground propagation,
// antenna patterns, per-link budgets, the dynamic channel matrix, and
// IQ-sample propagation with silence suppression.
//
// Power convention: sample power 1.0 corresponds to 0 dBm, so a transmitter
// at P dBm emits a waveform scaled by 10^(P/20) and link gains are pure
// channel responses with |gain| <= 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aerialtwin/geo.hpp"
#include "aerialtwin/rng.hpp"

namespace aerialtwin::channel {

using geo::EnuVector;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kMinPathDistanceM = 1.0;      // near-field clamp
inline constexpr double kDipoleNullFloorDbi = -40.0;
inline constexpr double kSilenceFloorDbfs = -120.0;
inline constexpr double kPrbBandwidthHz = 180e3;      // LTE numerology, 12 x 15 kHz

// ---------------------------------------------------------------------------
// Antenna patterns
// ---------------------------------------------------------------------------

struct AntennaPattern {
  enum class Kind { isotropic, vertical_dipole, table };

  Kind kind = Kind::isotropic;

  // Gain table in dBi over a regular azimuth x elevation grid.
  // Azimuth spans [0, 360) degrees with n_az rows; elevation spans
  // [-90, 90] degrees with n_el columns.
  std::size_t n_az = 0;
  std::size_t n_el = 0;
  std::vector<double> table_dbi;

  static AntennaPattern isotropic() { return {}; }
  static AntennaPattern vertical_dipole() {
    AntennaPattern p;
    p.kind = Kind::vertical_dipole;
    return p;
  }
  static AntennaPattern from_table(std::size_t n_az, std::size_t n_el, std::vector<double> gains) {
    if (n_az < 2 || n_el < 2 || gains.size() != n_az * n_el) {
      throw std::invalid_argument("antenna table dimensions do not match gain grid");
    }
    for (double g : gains) {
      if (!std::isfinite(g)) {
        throw std::invalid_argument("antenna table contains non-finite gain");
      }
    }
    AntennaPattern p;
    p.kind = Kind::table;
    p.n_az = n_az;
    p.n_el = n_el;
    p.table_dbi = std::move(gains);
    return p;
  }
};

// Gain toward a unit direction expressed in the antenna body frame
// (x east-ish, y north-ish, z up along the dipole axis).
inline double antenna_gain(const AntennaPattern& p, const EnuVector& direction) {
  switch (p.kind) {
    case AntennaPattern::Kind::isotropic:
      return 0.0;
    case AntennaPattern::Kind::vertical_dipole: {
      // theta measured from the dipole (vertical) axis.
      const double cos_theta = std::clamp(direction.up, -1.0, 1.0);
      const double sin2 = 1.0 - cos_theta * cos_theta;
      if (sin2 <= 0.0) {
        return kDipoleNullFloorDbi;
      }
      const double g = 10.0 * std::log10(1.64 * sin2);
      return std::max(g, kDipoleNullFloorDbi);
    }
    case AntennaPattern::Kind::table: {
      double az = std::atan2(direction.east, direction.north) / geo::kDegToRad;
      if (az < 0.0) {
        az += 360.0;
      }
      const double el = std::asin(std::clamp(direction.up, -1.0, 1.0)) / geo::kDegToRad;
      const double az_step = 360.0 / static_cast<double>(p.n_az);
      const double el_step = 180.0 / static_cast<double>(p.n_el - 1);
      const double fa = az / az_step;
      const double fe = (el + 90.0) / el_step;
      const std::size_t a0 = std::min(static_cast<std::size_t>(fa), p.n_az - 1);
      const std::size_t a1 = (a0 + 1) % p.n_az;  // azimuth wraps
      const std::size_t e0 = std::min(static_cast<std::size_t>(fe), p.n_el - 2);
      const std::size_t e1 = e0 + 1;
      const double wa = fa - static_cast<double>(a0);
      const double we = fe - static_cast<double>(e0);
      auto g = [&](std::size_t a, std::size_t e) { return p.table_dbi[a * p.n_el + e]; };
      return (1 - wa) * ((1 - we) * g(a0, e0) + we * g(a0, e1)) +
             wa * ((1 - we) * g(a1, e0) + we * g(a1, e1));
    }
  }
  return 0.0;
}

// Highest gain the pattern can present in any direction; EIRP checks use
// tx power plus this.
inline double peak_gain_dbi(const AntennaPattern& p) {
  switch (p.kind) {
    case AntennaPattern::Kind::isotropic:
      return 0.0;
    case AntennaPattern::Kind::vertical_dipole:
      return 10.0 * std::log10(1.64);
    case AntennaPattern::Kind::table:
      return *std::max_element(p.table_dbi.begin(), p.table_dbi.end());
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Path loss models
// ---------------------------------------------------------------------------

// Friis free-space loss, 20*log10(4*pi*d*f/c). Distances below 1 m are
// clamped; callers that care flag the clamp as a near-field warning.
inline double free_space_path_loss(double freq_hz, double distance_m) {
  if (!(freq_hz > 0.0)) {
    throw std::invalid_argument("frequency must be positive");
  }
  const double d = std::max(distance_m, kMinPathDistanceM);
  return 20.0 * std::log10(4.0 * std::numbers::pi * d * freq_hz / kSpeedOfLight);
}

// Coherent two-ray ground reflection: direct path plus a ground-reflected
// path with reflection coefficient `reflection` (default -1). Returns loss
// in dB relative to isotropic; with reflection = 0 it reduces exactly to
// free space over the slant distance.
inline double two_ray_path_loss(double freq_hz, double distance_2d_m, double h_tx_m, double h_rx_m,
                                std::complex<double> reflection = {-1.0, 0.0}) {
  if (!(h_tx_m > 0.0) || !(h_rx_m > 0.0) || !(distance_2d_m > 0.0)) {
    throw std::invalid_argument("two-ray geometry requires positive heights and distance");
  }
  const double lambda = kSpeedOfLight / freq_hz;
  const double k = 2.0 * std::numbers::pi / lambda;
  const double dh = h_tx_m - h_rx_m;
  const double sh = h_tx_m + h_rx_m;
  const double d1 = std::sqrt(distance_2d_m * distance_2d_m + dh * dh);
  const double d2 = std::sqrt(distance_2d_m * distance_2d_m + sh * sh);
  const std::complex<double> j{0.0, 1.0};
  const std::complex<double> field =
      std::exp(-j * (k * d1)) / d1 + reflection * std::exp(-j * (k * d2)) / d2;
  const double amplitude = (lambda / (4.0 * std::numbers::pi)) * std::abs(field);
  return -20.0 * std::log10(amplitude);
}

// Distance beyond which the two-ray response decays ~40 dB/decade.
inline double two_ray_break_distance(double freq_hz, double h_tx_m, double h_rx_m) {
  const double lambda = kSpeedOfLight / freq_hz;
  return 4.0 * std::numbers::pi * h_tx_m * h_rx_m / lambda;
}

// ---------------------------------------------------------------------------
// Radios, link budgets, channel matrix
// ---------------------------------------------------------------------------

inline constexpr double kMaxSampleRateHz = 100e6;

struct RadioConfig {
  double center_freq_hz = 3.51e9;
  double bandwidth_hz = 1.4e6;
  double sample_rate_hz = 2e6;
  double tx_power_dbm = 20.0;
  AntennaPattern antenna;
  double noise_figure_db = 7.0;
  int n_prb = 6;

  void validate() const {
    if (!(bandwidth_hz > 0.0) || bandwidth_hz > sample_rate_hz) {
      throw std::invalid_argument("radio requires 0 < bandwidth <= sample_rate");
    }
    if (sample_rate_hz > kMaxSampleRateHz) {
      throw std::invalid_argument("sample_rate exceeds the 100 MHz emulator ceiling");
    }
    if (!std::isfinite(tx_power_dbm)) {
      throw std::invalid_argument("tx_power must be finite");
    }
    if (n_prb < 1) {
      throw std::invalid_argument("n_prb must be >= 1");
    }
  }
};

enum class PropagationModel { free_space, two_ray };

// Geometry of one radio endpoint as the channel sees it.
struct RadioEndpoint {
  EnuVector position;
  double heading_rad = 0.0;
  double pitch_rad = 0.0;
  RadioConfig radio;
};

struct LinkGain {
  std::complex<double> gain{0.0, 0.0};  // linear amplitude, unit input
  double delay_s = 0.0;
  double path_loss_db = 0.0;  // diagnostic
};

struct LinkBudgetResult {
  double rx_power_dbm = 0.0;
  LinkGain link;
  bool near_field_clamped = false;
};

namespace detail {

// Direction from `from` toward `to`, rotated into `from`'s body frame
// (yaw about up, then pitch about the body east axis).
inline EnuVector body_direction(const RadioEndpoint& from, const EnuVector& to) {
  EnuVector d = to - from.position;
  const double n = d.norm();
  if (n < 1e-12) {
    return {0.0, 0.0, 1.0};
  }
  d = d * (1.0 / n);
  const double ch = std::cos(-from.heading_rad);
  const double sh = std::sin(-from.heading_rad);
  const double e = d.east * ch - d.north * sh;
  const double no = d.east * sh + d.north * ch;
  const double cp = std::cos(-from.pitch_rad);
  const double sp = std::sin(-from.pitch_rad);
  return {e, no * cp - d.up * sp, no * sp + d.up * cp};
}

}  // namespace detail

// Full budget for one directed link: rx = tx + G_tx + G_rx - path_loss.
// The complex gain carries amplitude 10^((rx-tx)/20) and phase -2*pi*f*d/c.
inline LinkBudgetResult link_budget(const RadioEndpoint& tx, const RadioEndpoint& rx,
                                    PropagationModel model,
                                    std::complex<double> reflection = {-1.0, 0.0}) {
  LinkBudgetResult out;
  const EnuVector delta = rx.position - tx.position;
  double d = delta.norm();
  if (d < kMinPathDistanceM) {
    d = kMinPathDistanceM;
    out.near_field_clamped = true;
  }
  const double f = tx.radio.center_freq_hz;

  double path_loss;
  if (model == PropagationModel::two_ray) {
    const double d2d = std::max(delta.horizontal_norm(), 1e-3);
    const double h_tx = std::max(tx.position.up, 0.1);
    const double h_rx = std::max(rx.position.up, 0.1);
    path_loss = two_ray_path_loss(f, d2d, h_tx, h_rx, reflection);
  } else {
    path_loss = free_space_path_loss(f, d);
  }

  const double g_tx = antenna_gain(tx.radio.antenna, detail::body_direction(tx, rx.position));
  const double g_rx = antenna_gain(rx.radio.antenna, detail::body_direction(rx, tx.position));

  out.rx_power_dbm = tx.radio.tx_power_dbm + g_tx + g_rx - path_loss;
  const double rel_db = out.rx_power_dbm - tx.radio.tx_power_dbm;
  double amplitude = std::pow(10.0, rel_db / 20.0);
  amplitude = std::min(amplitude, 1.0);  // passive channel
  const double phase = -2.0 * std::numbers::pi * f * d / kSpeedOfLight;
  out.link.gain = std::polar(amplitude, phase);
  out.link.delay_s = d / kSpeedOfLight;
  out.link.path_loss_db = path_loss;
  return out;
}

struct ChannelMatrix {
  std::size_t n = 0;
  double timestamp_s = 0.0;
  std::vector<LinkGain> entries;  // row-major, tx index * n + rx index

  const LinkGain& at(std::size_t tx, std::size_t rx) const { return entries[tx * n + rx]; }
  LinkGain& at(std::size_t tx, std::size_t rx) { return entries[tx * n + rx]; }
};

// Recomputes every directed pair. Entries live at fixed indices so the
// result is independent of evaluation order; muted transmitters contribute
// zero-gain rows.
inline ChannelMatrix build_channel_matrix(const std::vector<RadioEndpoint>& nodes, double t,
                                          PropagationModel model,
                                          const std::vector<bool>& muted = {}) {
  if (nodes.size() < 2) {
    throw std::invalid_argument("channel matrix needs at least 2 nodes");
  }
  ChannelMatrix m;
  m.n = nodes.size();
  m.timestamp_s = t;
  m.entries.assign(m.n * m.n, LinkGain{});
  for (std::size_t i = 0; i < m.n; ++i) {
    if (!muted.empty() && muted[i]) {
      continue;
    }
    for (std::size_t j = 0; j < m.n; ++j) {
      if (i == j) {
        continue;
      }
      m.at(i, j) = link_budget(nodes[i], nodes[j], model).link;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

struct NoiseModel {
  enum class Kind { thermal, fixed };
  Kind kind = Kind::thermal;
  double fixed_floor_dbm = -100.0;

  static NoiseModel thermal() { return {}; }
  static NoiseModel fixed(double floor_dbm) { return {Kind::fixed, floor_dbm}; }
};

inline double noise_floor(const NoiseModel& model, double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  if (model.kind == NoiseModel::Kind::fixed) {
    return model.fixed_floor_dbm;
  }
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

// ---------------------------------------------------------------------------
// Receiver-side measures
// ---------------------------------------------------------------------------

// Per-resource-element power: wideband rx power spread over 12*n_prb
// subcarriers.
inline double rsrp(double rx_power_dbm, int n_prb) {
  if (n_prb < 1) {
    throw std::invalid_argument("n_prb must be >= 1");
  }
  return rx_power_dbm - 10.0 * std::log10(12.0 * static_cast<double>(n_prb));
}

inline double snr(double rx_power_dbm, double floor_dbm) {
  return rx_power_dbm - floor_dbm;
}

// ---------------------------------------------------------------------------
// IQ propagation
// ---------------------------------------------------------------------------

struct IqBuffer {
  std::vector<std::complex<double>> samples;
  double sample_rate_hz = 0.0;
  double start_time_s = 0.0;
};

struct PropagationResult {
  std::vector<IqBuffer> outputs;
  int silence_suppressed = 0;
};

namespace detail {

inline bool is_silent(const IqBuffer& b) {
  const double floor = std::pow(10.0, kSilenceFloorDbfs / 10.0);
  for (const auto& s : b.samples) {
    if (std::norm(s) > floor) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Sums each transmitter's contribution into every receiver: output j is
// sum over i != j of gain(i,j) * input_i delayed by round(delay * fs)
// samples, plus seeded receiver noise at each receiver's floor (from
// noise_floor() over its own bandwidth and noise figure). All-silent
// transmitters are skipped and counted. Accumulation runs in fixed node
// order so floating-point sums are reproducible.
inline PropagationResult propagate_iq(const std::vector<IqBuffer>& inputs, const ChannelMatrix& m,
                                      const std::vector<double>& rx_floor_dbm, std::uint64_t seed) {
  if (inputs.size() != m.n || rx_floor_dbm.size() != m.n) {
    throw std::invalid_argument("input buffer count must match channel matrix size");
  }
  std::size_t len = 0;
  double fs = 0.0;
  for (const auto& b : inputs) {
    if (b.samples.empty()) {
      continue;
    }
    if (fs == 0.0) {
      fs = b.sample_rate_hz;
      len = b.samples.size();
    } else if (b.sample_rate_hz != fs) {
      throw std::invalid_argument("mismatched sample rates and no resampler configured");
    } else if (b.samples.size() != len) {
      throw std::invalid_argument("IQ buffers must share a common length");
    }
  }

  PropagationResult res;
  res.outputs.assign(m.n, IqBuffer{});
  std::vector<bool> silent(m.n, false);
  for (std::size_t i = 0; i < m.n; ++i) {
    if (inputs[i].samples.empty() || detail::is_silent(inputs[i])) {
      silent[i] = true;
      if (!inputs[i].samples.empty()) {
        ++res.silence_suppressed;
      }
    }
  }

  for (std::size_t j = 0; j < m.n; ++j) {
    IqBuffer& out = res.outputs[j];
    out.sample_rate_hz = fs;
    out.start_time_s = m.timestamp_s;
    out.samples.assign(len, {0.0, 0.0});
    for (std::size_t i = 0; i < m.n; ++i) {
      if (i == j || silent[i]) {
        continue;
      }
      const LinkGain& lg = m.at(i, j);
      if (std::abs(lg.gain) == 0.0) {
        continue;
      }
      const auto shift = static_cast<std::size_t>(std::llround(lg.delay_s * fs));
      const auto& x = inputs[i].samples;
      for (std::size_t k = shift; k < len; ++k) {
        out.samples[k] += lg.gain * x[k - shift];
      }
    }
    const double sigma2 = std::pow(10.0, rx_floor_dbm[j] / 10.0);
    if (sigma2 > 0.0 && len > 0) {
      rng::Generator gen(rng::substream(seed, j));
      for (std::size_t k = 0; k < len; ++k) {
        out.samples[k] += gen.complex_normal(sigma2);
      }
    }
  }
  return res;
}

// Mean sample power of a buffer expressed on the dBm reference scale.
inline double measured_power_dbm(const IqBuffer& b) {
  if (b.samples.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  double acc = 0.0;
  for (const auto& s : b.samples) {
    acc += std::norm(s);
  }
  return 10.0 * std::log10(acc / static_cast<double>(b.samples.size()));
}

}  // namespace aerialtwin::channel

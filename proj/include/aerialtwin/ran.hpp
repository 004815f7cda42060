#pragma once

// Sliced PRB scheduling with runtime reconfiguration and a link-adaptive
// throughput model. Shares map to integer PRB grants by largest-remainder
// rounding; in work-conserving mode, PRBs left over by demand-limited
// slices are redistributed among the unsatisfied ones.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "aerialtwin/channel.hpp"

namespace aerialtwin::ran {

inline constexpr std::int64_t kSaturated = -1;  // demand sentinel: take anything offered

struct SliceShare {
  std::string slice_id;
  double share = 0.0;
};

struct SliceConfig {
  std::vector<SliceShare> slices;
  bool work_conserving = true;

  void validate() const {
    if (slices.empty()) {
      throw std::invalid_argument("slice config needs at least one slice");
    }
    double sum = 0.0;
    for (const auto& s : slices) {
      if (s.share < 0.0 || s.share > 1.0) {
        throw std::invalid_argument("slice share must lie in [0,1]");
      }
      sum += s.share;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("slice shares must sum to 1");
    }
  }

  static SliceConfig unsliced() {
    return {{{"unsliced", 1.0}}, true};
  }
};

struct UeBinding {
  std::string ue_id;
  std::string slice_id;
  std::int64_t demand_bps = kSaturated;  // kSaturated or bits/s
};

struct PrbAllocation {
  double tick_time_s = 0.0;
  std::vector<int> grants;  // parallel to SliceConfig::slices
  int total_prb = 0;

  int total_granted() const { return std::accumulate(grants.begin(), grants.end(), 0); }
};

struct SliceTimeline {
  struct Entry {
    double time_s = 0.0;
    SliceConfig config;
  };
  std::vector<Entry> entries;

  void validate() const {
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& e : entries) {
      if (e.time_s <= prev) {
        throw std::invalid_argument("slice timeline times must be strictly increasing");
      }
      prev = e.time_s;
      e.config.validate();
    }
  }
};

// Config in force at time t: the latest entry with time <= t, or the
// unsliced baseline before the first entry.
inline SliceConfig apply_timeline(const SliceTimeline& tl, double t) {
  if (tl.entries.empty()) {
    throw std::invalid_argument("slice timeline is empty");
  }
  const SliceConfig* active = nullptr;
  for (const auto& e : tl.entries) {
    if (e.time_s <= t) {
      active = &e.config;
    } else {
      break;
    }
  }
  return active ? *active : SliceConfig::unsliced();
}

namespace detail {

// Largest-remainder apportionment of `total` units over `weights`;
// remainder ties break toward the lower index.
inline std::vector<int> largest_remainder(const std::vector<double>& weights, int total) {
  const std::size_t n = weights.size();
  std::vector<int> out(n, 0);
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (wsum <= 0.0 || total <= 0) {
    return out;
  }
  std::vector<double> remainder(n, 0.0);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / wsum;
    out[i] = static_cast<int>(std::floor(quota));
    remainder[i] = quota - std::floor(quota);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  const int leftover = total - assigned;
  for (int k = 0; k < leftover; ++k) {
    out[order[k]] += 1;
  }
  return out;
}

}  // namespace detail

// Grants PRBs to slices. `demands` holds per-slice PRB demand (kSaturated
// means unbounded) parallel to cfg.slices. No slice receives more than its
// demand; in work-conserving mode the leftover is re-apportioned among the
// still-unsatisfied slices by their shares, iterated to fixpoint.
inline PrbAllocation schedule_prbs(const SliceConfig& cfg, const std::vector<std::int64_t>& demands,
                                   int total_prb, double tick_time_s = 0.0) {
  if (total_prb < 1) {
    throw std::invalid_argument("total_prb must be >= 1");
  }
  if (demands.size() != cfg.slices.size()) {
    throw std::invalid_argument("demand vector must match slice count");
  }
  const std::size_t n = cfg.slices.size();
  PrbAllocation alloc;
  alloc.tick_time_s = tick_time_s;
  alloc.total_prb = total_prb;
  alloc.grants.assign(n, 0);

  auto demand_left = [&](std::size_t i) -> std::int64_t {
    if (demands[i] == kSaturated) {
      return std::numeric_limits<std::int64_t>::max();
    }
    return std::max<std::int64_t>(0, demands[i] - alloc.grants[i]);
  };

  std::vector<bool> open(n);
  for (std::size_t i = 0; i < n; ++i) {
    open[i] = demand_left(i) > 0;
  }

  int remaining = total_prb;
  bool first_pass = true;
  while (remaining > 0) {
    std::vector<double> weights(n, 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (open[i]) {
        weights[i] = cfg.slices[i].share;
        wsum += weights[i];
      }
    }
    if (wsum <= 0.0) {
      break;
    }
    const std::vector<int> round = detail::largest_remainder(weights, remaining);
    bool any_capped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!open[i]) {
        continue;
      }
      const std::int64_t left = demand_left(i);
      const int give = static_cast<int>(std::min<std::int64_t>(round[i], left));
      alloc.grants[i] += give;
      remaining -= give;
      if (demand_left(i) == 0) {
        open[i] = false;
        any_capped = true;
      }
    }
    if (!cfg.work_conserving && first_pass) {
      break;  // leftover stays idle
    }
    first_pass = false;
    if (!any_capped) {
      break;  // every open slice took its full round: fixpoint reached
    }
  }
  return alloc;
}

// ---------------------------------------------------------------------------
// Link-adaptive throughput
// ---------------------------------------------------------------------------

// Calibrated so 100 PRBs at high SNR with 2 streams gives 170 Mbit/s.
inline constexpr double kDefaultSpectralEfficiencyCap = 170e6 / (100.0 * 180e3 * 2.0);

struct LinkParams {
  int streams = 2;
  double efficiency = 0.75;  // fraction of Shannon capacity actually delivered
  double se_max = kDefaultSpectralEfficiencyCap;  // bits/s/Hz per stream
};

// Truncated-Shannon rate: n_prb * 180 kHz * min(se_max, k*log2(1+snr)) * streams.
inline double prb_throughput(double snr_db, int n_prb, const LinkParams& link = {}) {
  if (n_prb < 0) {
    throw std::invalid_argument("n_prb must be >= 0");
  }
  if (n_prb == 0) {
    return 0.0;
  }
  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double se = std::min(link.se_max, link.efficiency * std::log2(1.0 + snr_lin));
  return static_cast<double>(n_prb) * channel::kPrbBandwidthHz * se *
         static_cast<double>(link.streams);
}

// ---------------------------------------------------------------------------
// Per-UE throughput tracking
// ---------------------------------------------------------------------------

// Drives the scheduler tick by tick and models measured throughput with an
// exponential smoothing window. A slice's grant is split equally (largest
// remainder, binding order) among its UEs with outstanding demand; in the
// unsliced baseline every UE shares the single slice.
class ThroughputTracker {
 public:
  ThroughputTracker(std::vector<UeBinding> bindings, int total_prb, LinkParams link,
                    double smoothing_window_s = 1.0)
      : bindings_(std::move(bindings)),
        total_prb_(total_prb),
        link_(link),
        tau_s_(smoothing_window_s) {
    smoothed_.assign(bindings_.size(), -1.0);
  }

  // snr_db holds one entry per binding, in binding order. Returns smoothed
  // per-UE throughput for this tick, in binding order.
  std::vector<double> tick(const SliceConfig& cfg, const std::vector<double>& snr_db, double dt) {
    if (snr_db.size() != bindings_.size()) {
      throw std::invalid_argument("snr vector must match binding count");
    }
    const bool unsliced = cfg.slices.size() == 1 && cfg.slices.front().slice_id == "unsliced";

    // Per-slice PRB demand from the bound UEs.
    std::vector<std::int64_t> demands(cfg.slices.size(), 0);
    for (std::size_t u = 0; u < bindings_.size(); ++u) {
      const int s = slice_index(cfg, bindings_[u].slice_id, unsliced);
      if (s < 0) {
        continue;
      }
      if (bindings_[u].demand_bps == kSaturated) {
        demands[s] = kSaturated;
      } else if (demands[s] != kSaturated) {
        demands[s] += prb_demand(bindings_[u].demand_bps, snr_db[u]);
      }
    }

    const PrbAllocation alloc = schedule_prbs(cfg, demands, total_prb_);

    // Split each slice's grant across its UEs and convert PRBs to rate.
    std::vector<double> instant(bindings_.size(), 0.0);
    for (std::size_t s = 0; s < cfg.slices.size(); ++s) {
      std::vector<std::size_t> members;
      for (std::size_t u = 0; u < bindings_.size(); ++u) {
        if (slice_index(cfg, bindings_[u].slice_id, unsliced) == static_cast<int>(s)) {
          members.push_back(u);
        }
      }
      if (members.empty()) {
        continue;
      }
      const std::vector<int> split =
          detail::largest_remainder(std::vector<double>(members.size(), 1.0), alloc.grants[s]);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::size_t u = members[k];
        double rate = prb_throughput(snr_db[u], split[k], link_);
        if (bindings_[u].demand_bps != kSaturated) {
          rate = std::min(rate, static_cast<double>(bindings_[u].demand_bps));
        }
        instant[u] = rate;
      }
    }

    // First-order smoothing toward the instantaneous rate.
    const double alpha = tau_s_ > 0.0 ? std::min(1.0, dt / tau_s_) : 1.0;
    for (std::size_t u = 0; u < bindings_.size(); ++u) {
      if (smoothed_[u] < 0.0) {
        smoothed_[u] = instant[u];
      } else {
        smoothed_[u] += alpha * (instant[u] - smoothed_[u]);
      }
    }
    return smoothed_;
  }

  const std::vector<UeBinding>& bindings() const { return bindings_; }

 private:
  static int slice_index(const SliceConfig& cfg, const std::string& slice_id, bool unsliced) {
    if (unsliced) {
      return 0;  // baseline: everything shares the single slice
    }
    for (std::size_t i = 0; i < cfg.slices.size(); ++i) {
      if (cfg.slices[i].slice_id == slice_id) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  std::int64_t prb_demand(std::int64_t demand_bps, double snr_db) const {
    const double per_prb = prb_throughput(snr_db, 1, link_);
    if (per_prb <= 0.0) {
      return total_prb_;  // link carries nothing; ask for everything
    }
    return static_cast<std::int64_t>(
        std::ceil(static_cast<double>(demand_bps) / per_prb));
  }

  std::vector<UeBinding> bindings_;
  int total_prb_;
  LinkParams link_;
  double tau_s_;
  std::vector<double> smoothed_;
};

struct UeThroughputPoint {
  double time_s = 0.0;
  std::string ue_id;
  double throughput_bps = 0.0;
};

// Convenience driver over a whole run: resolves the timeline per tick,
// schedules, and maps grants through the throughput model at that tick's
// SNR (snr_fn(t, ue_index)).
inline std::vector<UeThroughputPoint> ue_throughput_trace(
    const SliceTimeline& tl, const std::vector<UeBinding>& bindings,
    const std::function<double(double, std::size_t)>& snr_fn, int total_prb, double dt,
    double duration_s, const LinkParams& link = {}, double smoothing_window_s = 1.0) {
  ThroughputTracker tracker(bindings, total_prb, link, smoothing_window_s);
  std::vector<UeThroughputPoint> out;
  const auto ticks = static_cast<std::size_t>(std::llround(duration_s / dt));
  std::vector<double> snr(bindings.size(), 0.0);
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t u = 0; u < bindings.size(); ++u) {
      snr[u] = snr_fn(t, u);
    }
    const SliceConfig cfg = apply_timeline(tl, t);
    const std::vector<double> thr = tracker.tick(cfg, snr, dt);
    for (std::size_t u = 0; u < bindings.size(); ++u) {
      out.push_back({t, bindings[u].ue_id, thr[u]});
    }
  }
  return out;
}

}  // namespace aerialtwin::ran

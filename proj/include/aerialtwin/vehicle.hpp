#pragma once

// Kinematic vehicle emulation: point-mass trapezoidal motion, the waypoint
// mission state machine, command filtering, geofence supervision and the
// tracer/orbiter coordination pattern.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aerialtwin/geo.hpp"

namespace aerialtwin::vehicle {

using geo::EnuVector;
using geo::LocalFence;

enum class VehicleKind { multicopter, rover };

enum class FlightMode { idle, takeoff, enroute, hold, orbit, landing, rtl, overridden };

inline const char* to_string(FlightMode m) {
  switch (m) {
    case FlightMode::idle: return "IDLE";
    case FlightMode::takeoff: return "TAKEOFF";
    case FlightMode::enroute: return "ENROUTE";
    case FlightMode::hold: return "HOLD";
    case FlightMode::orbit: return "ORBIT";
    case FlightMode::landing: return "LANDING";
    case FlightMode::rtl: return "RTL";
    case FlightMode::overridden: return "OVERRIDDEN";
  }
  return "?";
}

struct VehicleLimits {
  double v_max_h = 5.0;   // m/s
  double v_max_v = 2.0;   // m/s
  double a_max = 2.0;     // m/s^2
  VehicleKind kind = VehicleKind::multicopter;

  void validate() const {
    if (!(v_max_h > 0.0) || !(a_max > 0.0)) {
      throw std::invalid_argument("vehicle limits must be strictly positive");
    }
    if (kind == VehicleKind::rover) {
      if (v_max_v != 0.0) {
        throw std::invalid_argument("rover must have v_max_v = 0");
      }
    } else if (!(v_max_v > 0.0)) {
      throw std::invalid_argument("vehicle limits must be strictly positive");
    }
  }
};

struct VehicleState {
  EnuVector position;
  EnuVector velocity;
  double heading_rad = 0.0;  // from north, clockwise
  double pitch_rad = 0.0;    // forward pitch derived from horizontal acceleration
  bool armed = false;
  FlightMode mode = FlightMode::idle;
};

// ---------------------------------------------------------------------------
// Commands and the command filter
// ---------------------------------------------------------------------------

enum class CommandKind : std::uint8_t {
  arm,
  disarm,
  takeoff,
  goto_wp,
  set_speed,
  hold,
  orbit,
  land,
  rtl,
};

inline const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::arm: return "ARM";
    case CommandKind::disarm: return "DISARM";
    case CommandKind::takeoff: return "TAKEOFF";
    case CommandKind::goto_wp: return "GOTO";
    case CommandKind::set_speed: return "SET_SPEED";
    case CommandKind::hold: return "HOLD";
    case CommandKind::orbit: return "ORBIT";
    case CommandKind::land: return "LAND";
    case CommandKind::rtl: return "RTL";
  }
  return "?";
}

enum class Issuer { experimenter, supervisor };

struct Command {
  CommandKind kind = CommandKind::hold;
  Issuer issuer = Issuer::experimenter;

  EnuVector target;            // goto_wp
  double speed_mps = 0.0;      // goto_wp, set_speed
  double altitude_m = 0.0;     // takeoff
  double duration_s = 0.0;     // hold
  std::string center_node;     // orbit
  double radius_m = 0.0;       // orbit
  double angular_rate = 0.0;   // orbit, rad/s
  bool emergency = false;      // supervisor hold: stop within one tick

  static Command arm() { return {CommandKind::arm}; }
  static Command disarm() { return {CommandKind::disarm}; }
  static Command takeoff(double alt) {
    Command c{CommandKind::takeoff};
    c.altitude_m = alt;
    return c;
  }
  static Command goto_wp(const EnuVector& target, double speed) {
    Command c{CommandKind::goto_wp};
    c.target = target;
    c.speed_mps = speed;
    return c;
  }
  static Command set_speed(double speed) {
    Command c{CommandKind::set_speed};
    c.speed_mps = speed;
    return c;
  }
  static Command hold(double duration) {
    Command c{CommandKind::hold};
    c.duration_s = duration;
    return c;
  }
  static Command orbit(std::string center, double radius, double rate) {
    Command c{CommandKind::orbit};
    c.center_node = std::move(center);
    c.radius_m = radius;
    c.angular_rate = rate;
    return c;
  }
  static Command land() { return {CommandKind::land}; }
  static Command rtl() { return {CommandKind::rtl}; }
};

using CommandAllowlist = std::set<CommandKind>;

inline CommandAllowlist default_allowlist() {
  return {CommandKind::arm,     CommandKind::disarm, CommandKind::takeoff,
          CommandKind::goto_wp, CommandKind::set_speed, CommandKind::hold,
          CommandKind::orbit,   CommandKind::land,   CommandKind::rtl};
}

enum class RejectReason { not_allowlisted, speed_limit, altitude_limit, bad_parameter };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::not_allowlisted: return "not_allowlisted";
    case RejectReason::speed_limit: return "speed_limit";
    case RejectReason::altitude_limit: return "altitude_limit";
    case RejectReason::bad_parameter: return "bad_parameter";
  }
  return "?";
}

// A command that has passed the filter. The simulation loop only executes
// commands wrapped in this type, so nothing reaches the autopilot unchecked.
struct AcceptedCommand {
  Command cmd;
};

struct FilterResult {
  std::optional<AcceptedCommand> accepted;
  std::optional<RejectReason> reason;

  bool ok() const { return accepted.has_value(); }
};

// max_alt caps TAKEOFF altitude; pass the geofence alt_max (or +inf when no
// fence applies). Supervisor commands bypass the allowlist but not limits.
inline FilterResult filter_command(const Command& cmd, const CommandAllowlist& allowlist,
                                   const VehicleLimits& limits,
                                   double max_alt = std::numeric_limits<double>::infinity()) {
  if (cmd.issuer != Issuer::supervisor && allowlist.count(cmd.kind) == 0) {
    return {std::nullopt, RejectReason::not_allowlisted};
  }
  switch (cmd.kind) {
    case CommandKind::goto_wp:
      if (!(cmd.speed_mps > 0.0) || !std::isfinite(cmd.speed_mps) || !cmd.target.finite()) {
        return {std::nullopt, RejectReason::bad_parameter};
      }
      if (cmd.speed_mps > limits.v_max_h) {
        return {std::nullopt, RejectReason::speed_limit};
      }
      break;
    case CommandKind::set_speed:
      if (!(cmd.speed_mps > 0.0) || !std::isfinite(cmd.speed_mps)) {
        return {std::nullopt, RejectReason::bad_parameter};
      }
      if (cmd.speed_mps > limits.v_max_h) {
        return {std::nullopt, RejectReason::speed_limit};
      }
      break;
    case CommandKind::takeoff:
      if (!(cmd.altitude_m > 0.0) || !std::isfinite(cmd.altitude_m)) {
        return {std::nullopt, RejectReason::bad_parameter};
      }
      if (cmd.altitude_m > max_alt) {
        return {std::nullopt, RejectReason::altitude_limit};
      }
      break;
    case CommandKind::orbit:
      if (!(cmd.radius_m > 0.0) || !std::isfinite(cmd.angular_rate)) {
        return {std::nullopt, RejectReason::bad_parameter};
      }
      break;
    case CommandKind::hold:
      if (cmd.duration_s < 0.0 || !std::isfinite(cmd.duration_s)) {
        return {std::nullopt, RejectReason::bad_parameter};
      }
      break;
    default:
      break;
  }
  return {AcceptedCommand{cmd}, std::nullopt};
}

// ---------------------------------------------------------------------------
// Point-mass kinematics
// ---------------------------------------------------------------------------

inline constexpr double kDefaultTickSeconds = 0.1;
inline constexpr double kArrivalRadiusM = 1.0;

namespace detail {

// Component-wise clamp that preserves direction: scales the whole vector so
// the horizontal part stays within v_h and the vertical part within v_v.
inline EnuVector clamp_velocity(const EnuVector& v, double v_h, double v_v) {
  double scale = 1.0;
  const double h = v.horizontal_norm();
  if (h > v_h) {
    scale = std::min(scale, v_h / h);
  }
  const double z = std::abs(v.up);
  if (z > v_v) {
    scale = (v_v <= 0.0) ? 0.0 : std::min(scale, v_v / z);
  }
  EnuVector out = v * scale;
  if (v_v <= 0.0) {
    out.up = 0.0;
  }
  return out;
}

}  // namespace detail

struct KinematicsOptions {
  double pitch_gain = 0.0;  // rad per m/s^2 of horizontal acceleration
  // Cruise mode chases a moving carrot at the commanded speed without
  // terminal braking; used for orbit tracking where the setpoint advances
  // every tick and is never meant to be reached.
  bool cruise = false;
};

// One integration step toward `setpoint` with a trapezoidal speed profile:
// accelerate at a_max up to min(speed, v_max), brake to arrive at rest.
// Velocity integrates with the midpoint rule, so position advance per tick
// is (v_old + v_new)/2 * dt and overshoot is bounded by v*dt.
inline VehicleState step_kinematics(const VehicleState& s, const EnuVector& setpoint, double speed,
                                    const VehicleLimits& limits, double dt,
                                    const KinematicsOptions& opts = {}) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  VehicleState out = s;
  const EnuVector delta = setpoint - s.position;
  const double dist = delta.norm();
  const double v_now = s.velocity.norm();

  if (dist < 1e-9 && v_now < 1e-9) {
    out.velocity = {0.0, 0.0, 0.0};
    out.position = s.position;
    return out;  // fixed point
  }

  EnuVector v_des{0.0, 0.0, 0.0};
  if (dist >= 1e-9) {
    const EnuVector dir = delta * (1.0 / dist);
    double mag = speed;
    if (!opts.cruise) {
      const double v_brake = std::sqrt(2.0 * limits.a_max * dist);
      const double v_reach = dist / dt;  // enough to cover the gap this tick
      mag = std::min({speed, v_brake, v_reach});
    }
    v_des = detail::clamp_velocity(dir * mag, limits.v_max_h, limits.v_max_v);
  }

  EnuVector dv = v_des - s.velocity;
  const double dv_norm = dv.norm();
  const double dv_max = limits.a_max * dt;
  if (dv_norm > dv_max) {
    dv = dv * (dv_max / dv_norm);
  }
  EnuVector v_new = s.velocity + dv;
  v_new = detail::clamp_velocity(v_new, limits.v_max_h, limits.v_max_v);

  out.position = s.position + (s.velocity + v_new) * (0.5 * dt);
  out.velocity = v_new;

  // Ground plane: touchdown stops vertical motion instead of tunneling.
  if (out.position.up < 0.0) {
    out.position.up = 0.0;
    out.velocity.up = std::max(out.velocity.up, 0.0);
    v_new = out.velocity;
  }

  // Snap onto the setpoint once the residual motion is below numeric dust,
  // so holds and terminal states settle to exact rest.
  if (!opts.cruise && distance_3d(out.position, setpoint) < 1e-6 &&
      v_new.norm() <= limits.a_max * dt) {
    out.position = setpoint;
    out.velocity = {0.0, 0.0, 0.0};
  }

  const double h_speed = v_new.horizontal_norm();
  if (h_speed > 1e-6) {
    out.heading_rad = std::atan2(v_new.east, v_new.north);
  }
  const double h_acc = std::hypot(v_new.east - s.velocity.east, v_new.north - s.velocity.north) / dt;
  out.pitch_rad = opts.pitch_gain * h_acc;
  return out;
}

// Immediate stop used by supervisor overrides: velocity is zeroed over one
// tick regardless of a_max, so the vehicle travels at most v*dt/2 further.
inline VehicleState emergency_stop(const VehicleState& s, double dt) {
  VehicleState out = s;
  out.position = s.position + s.velocity * (0.5 * dt);
  out.position.up = std::max(out.position.up, 0.0);
  out.velocity = {0.0, 0.0, 0.0};
  return out;
}

// ---------------------------------------------------------------------------
// Waypoint mission state machine
// ---------------------------------------------------------------------------

struct Waypoint {
  EnuVector position;
  double speed_mps = 5.0;
  double wait_s = 0.0;
};

enum class MissionPhase { pending, arming, takeoff, enroute, hold, landing, done };

inline const char* to_string(MissionPhase p) {
  switch (p) {
    case MissionPhase::pending: return "pending";
    case MissionPhase::arming: return "arming";
    case MissionPhase::takeoff: return "takeoff";
    case MissionPhase::enroute: return "enroute";
    case MissionPhase::hold: return "hold";
    case MissionPhase::landing: return "landing";
    case MissionPhase::done: return "done";
  }
  return "?";
}

struct Mission {
  std::vector<Waypoint> waypoints;
  std::size_t current_index = 0;
  MissionPhase phase = MissionPhase::pending;
  double arrival_radius_m = kArrivalRadiusM;
  double takeoff_alt_m = -1.0;  // <0: derive from the first waypoint
  double hold_until_s = 0.0;

  void validate(const VehicleLimits& limits) const {
    if (waypoints.empty()) {
      throw std::invalid_argument("mission needs at least one waypoint");
    }
    for (const auto& wp : waypoints) {
      if (!(wp.speed_mps > 0.0) || wp.speed_mps > limits.v_max_h) {
        throw std::invalid_argument("waypoint speed exceeds v_max_h");
      }
      if (wp.wait_s < 0.0 || !wp.position.finite()) {
        throw std::invalid_argument("waypoint parameters invalid");
      }
    }
  }
};

struct FsmResult {
  Mission mission;
  std::optional<Command> command;
  std::optional<std::size_t> reached_waypoint;
};

// Deterministic mission sequencing; emits at most one command per tick.
// TAKEOFF -> ENROUTE(i) -> HOLD(wait_i) -> ENROUTE(i+1) ... -> LAND.
inline FsmResult fsm_tick(const Mission& m, const VehicleState& s, double t) {
  FsmResult r{m, std::nullopt, std::nullopt};
  Mission& next = r.mission;

  switch (m.phase) {
    case MissionPhase::pending:
      r.command = Command::arm();
      next.phase = MissionPhase::arming;
      break;

    case MissionPhase::arming: {
      double alt = m.takeoff_alt_m >= 0.0 ? m.takeoff_alt_m : m.waypoints.front().position.up;
      if (alt > 0.5) {
        Command c = Command::takeoff(alt);
        r.command = c;
        next.phase = MissionPhase::takeoff;
      } else {
        // Ground mission (or first waypoint at ground level): go direct.
        next.phase = MissionPhase::enroute;
        r.command = Command::goto_wp(m.waypoints.front().position, m.waypoints.front().speed_mps);
      }
      break;
    }

    case MissionPhase::takeoff: {
      const double alt = m.takeoff_alt_m >= 0.0 ? m.takeoff_alt_m : m.waypoints.front().position.up;
      if (std::abs(s.position.up - alt) <= m.arrival_radius_m) {
        next.phase = MissionPhase::enroute;
        r.command = Command::goto_wp(m.waypoints[m.current_index].position,
                                     m.waypoints[m.current_index].speed_mps);
      }
      break;
    }

    case MissionPhase::enroute: {
      const Waypoint& wp = m.waypoints[m.current_index];
      if (distance_3d(s.position, wp.position) <= m.arrival_radius_m) {
        r.reached_waypoint = m.current_index;
        if (wp.wait_s > 0.0) {
          next.phase = MissionPhase::hold;
          next.hold_until_s = t + wp.wait_s;
          r.command = Command::hold(wp.wait_s);
        } else if (m.current_index + 1 < m.waypoints.size()) {
          next.current_index = m.current_index + 1;
          r.command = Command::goto_wp(m.waypoints[next.current_index].position,
                                       m.waypoints[next.current_index].speed_mps);
        } else {
          next.phase = MissionPhase::landing;
          r.command = Command::land();
        }
      }
      break;
    }

    case MissionPhase::hold:
      if (t >= m.hold_until_s) {
        if (m.current_index + 1 < m.waypoints.size()) {
          next.current_index = m.current_index + 1;
          next.phase = MissionPhase::enroute;
          r.command = Command::goto_wp(m.waypoints[next.current_index].position,
                                       m.waypoints[next.current_index].speed_mps);
        } else {
          next.phase = MissionPhase::landing;
          r.command = Command::land();
        }
      }
      break;

    case MissionPhase::landing:
      if (s.position.up <= 0.05 && s.velocity.norm() < 1e-6) {
        next.phase = MissionPhase::done;
        r.command = Command::disarm();
      }
      break;

    case MissionPhase::done:
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Tracer/orbiter coordination
// ---------------------------------------------------------------------------

// Setpoint for the orbiter: on the circle of `radius` around the tracer's
// horizontal position, advanced by angular_rate*dt from the orbiter's current
// bearing, at the orbiter's own altitude. While the tracer is ENROUTE the
// setpoint instead keeps the fixed formation offset so both vehicles move
// together.
inline EnuVector orbiter_tick(const VehicleState& orbiter, const VehicleState& tracer,
                              double radius, double angular_rate, double dt,
                              const EnuVector& formation_offset = {0.0, 0.0, 0.0}) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("orbit radius must be positive");
  }
  if (tracer.mode == FlightMode::enroute) {
    EnuVector sp = tracer.position + formation_offset;
    sp.up = orbiter.position.up;
    return sp;
  }
  const double rel_e = orbiter.position.east - tracer.position.east;
  const double rel_n = orbiter.position.north - tracer.position.north;
  double bearing = 0.0;
  if (std::hypot(rel_e, rel_n) > 1e-9) {
    bearing = std::atan2(rel_e, rel_n);
  }
  const double theta = bearing + angular_rate * dt;
  return {tracer.position.east + radius * std::sin(theta),
          tracer.position.north + radius * std::cos(theta), orbiter.position.up};
}

// ---------------------------------------------------------------------------
// Geofence supervisor
// ---------------------------------------------------------------------------

struct SupervisorResult {
  std::optional<Command> override_cmd;
  std::string rule;  // machine-readable rule name for the run log

  bool clear() const { return !override_cmd.has_value(); }
};

// Watches one vehicle. Linearly extrapolates position over `lookahead`
// seconds; a predicted exit triggers HOLD (emergency stop), escalating to
// RTL if the vehicle is still predicted outside after the grace period.
// A vehicle already outside the fence gets RTL immediately. Each override
// fires once: after HOLD the supervisor either escalates or stays silent,
// and after RTL the vehicle is on its way home. The mission never resumes.
class Supervisor {
 public:
  explicit Supervisor(double lookahead_s, double grace_s = 5.0)
      : lookahead_s_(lookahead_s), grace_s_(grace_s) {
    if (lookahead_s < 0.0) {
      throw std::invalid_argument("lookahead must be >= 0");
    }
  }

  SupervisorResult check(const VehicleState& s, const LocalFence& fence, double t) {
    if (phase_ == Phase::returned) {
      return {std::nullopt, ""};
    }
    EnuVector predicted = s.position + s.velocity * lookahead_s_;
    // Vehicles cannot penetrate the ground; without this a landing descent
    // would extrapolate below the fence floor and trip a false override.
    predicted.up = std::max(predicted.up, 0.0);
    const bool outside_now = !fence.contains(s.position);
    const bool outside_predicted = !fence.contains(predicted);

    if (outside_now) {
      phase_ = Phase::returned;
      Command c = Command::rtl();
      c.issuer = Issuer::supervisor;
      return {c, "fence_breach"};
    }
    if (outside_predicted) {
      if (phase_ == Phase::monitoring) {
        phase_ = Phase::holding;
        hold_since_ = t;
        Command c = Command::hold(grace_s_);
        c.issuer = Issuer::supervisor;
        c.emergency = true;
        return {c, "fence_breach_predicted"};
      }
      if (t - hold_since_ >= grace_s_) {
        phase_ = Phase::returned;
        Command c = Command::rtl();
        c.issuer = Issuer::supervisor;
        return {c, "fence_breach_persistent"};
      }
    }
    return {std::nullopt, ""};
  }

  bool holding() const { return phase_ == Phase::holding; }

 private:
  enum class Phase { monitoring, holding, returned };

  double lookahead_s_;
  double grace_s_;
  Phase phase_ = Phase::monitoring;
  double hold_since_ = 0.0;
};

// Lookahead that guarantees containment within v_max*dt when overrides stop
// the vehicle within a tick.
inline double default_lookahead(const VehicleLimits& limits, double dt) {
  return limits.v_max_h * dt / limits.a_max + dt;
}

}  // namespace aerialtwin::vehicle

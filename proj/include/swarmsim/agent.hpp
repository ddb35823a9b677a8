#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swarmsim/env.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/sensing.hpp"

namespace swarmsim {

inline constexpr double kSpeedScaleMmPerMs = 0.0005;  // per PWM unit: 100 -> 50 mm/s
inline constexpr double kWheelBaseMm = 20.0;
inline constexpr double kBodyRadiusMm = 16.5;
inline constexpr double kTurnRateRadPerS = kPi;       // in-place turn speed
inline constexpr double kConeHalfAngleRad = 38.5 * kPi / 180.0;

struct RobotParams {
  double walk_location_ms = 7860.0;   // Cauchy location of walk durations
  double walk_scale_ms = 10725.0;     // Cauchy scale of walk durations
  double sample_interval_ms = 3778.0; // spacing between observations
  double collision_range_mm = 55.0;   // obstacle cone radius
  long long min_updates = 381;        // updates needed before deciding
  double decision_threshold = 0.9;    // posterior mass needed to commit
  double set_speed = 100.0;           // commanded wheel PWM
};

struct ActuationModel {
  double misalign_lo = -0.1;
  double misalign_hi = 0.1;
  GammaSpec speed_factor{3.1, 0.095, 0.8};
  double battery_horizon = 7.0;       // <= 0 disables decay
};

// Per-robot realized actuation draws, fixed for a whole run.
struct ActuationNoise {
  double misalign = 0.0;      // left/right asymmetry
  double speed_factor = 1.0;  // common speed multiplier
  double battery_horizon = 7.0;
};

inline ActuationNoise draw_actuation(const ActuationModel& m, Rng& rng) {
  ActuationNoise n;
  n.misalign = rng.uniform(m.misalign_lo, m.misalign_hi);
  n.speed_factor = rng.gamma(m.speed_factor.shape, m.speed_factor.scale) + m.speed_factor.shift;
  n.battery_horizon = m.battery_horizon;
  return n;
}

// Linear decay from 1 at t=0 to 1 - 1/horizon at t=t_end.
inline double battery_factor(double t_ms, double t_end_ms, double horizon = 7.0) {
  if (t_ms < 0.0 || t_ms > t_end_ms) throw std::out_of_range("battery_factor: t outside [0, t_end]");
  if (horizon <= 0.0) return 1.0;
  return 1.0 - t_ms / (horizon * t_end_ms);
}

// Noisy differential-drive wheel commands, clamped to [0, 100].
inline std::pair<double, double> wheel_speeds(double set_speed, const ActuationNoise& n,
                                              double battery) {
  const double common = n.speed_factor * battery;
  auto clamp = [](double v) { return std::min(100.0, std::max(0.0, v)); };
  return {clamp(set_speed * (1.0 - n.misalign) * common),
          clamp(set_speed * (1.0 + n.misalign) * common)};
}

inline std::pair<double, double> wheel_speeds(double set_speed, const ActuationNoise& n,
                                              double t_ms, double t_end_ms) {
  return wheel_speeds(set_speed, n, battery_factor(t_ms, t_end_ms, n.battery_horizon));
}

struct Pose {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double heading_rad = 0.0;
};

inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Euler step of the unicycle model; wheel commands are PWM values. The body
// centre is clamped one radius inside the walls, heading untouched by the
// clamp.
inline Pose step_pose(Pose p, double v_left, double v_right, double dt_ms, double arena_w_mm,
                      double arena_h_mm) {
  const double vl = v_left * kSpeedScaleMmPerMs;   // mm per ms
  const double vr = v_right * kSpeedScaleMmPerMs;
  const double v = 0.5 * (vl + vr);
  const double w = (vr - vl) / kWheelBaseMm;       // rad per ms
  p.x_mm += v * std::cos(p.heading_rad) * dt_ms;
  p.y_mm += v * std::sin(p.heading_rad) * dt_ms;
  p.heading_rad = wrap_angle(p.heading_rad + w * dt_ms);
  p.x_mm = std::min(arena_w_mm - kBodyRadiusMm, std::max(kBodyRadiusMm, p.x_mm));
  p.y_mm = std::min(arena_h_mm - kBodyRadiusMm, std::max(kBodyRadiusMm, p.y_mm));
  return p;
}

// Walk durations are Cauchy draws resampled until positive.
inline double draw_walk_duration_ms(const RobotParams& params, Rng& rng) {
  if (params.walk_scale_ms == 0.0) {
    if (params.walk_location_ms > 0.0) return params.walk_location_ms;
    throw std::invalid_argument("walk duration: degenerate non-positive location");
  }
  for (;;) {
    const double d = rng.cauchy(params.walk_location_ms, params.walk_scale_ms);
    if (d > 0.0) return d;
  }
}

// Signed turn angle; uniform magnitude, fair direction, zero treated as +1.
inline double draw_turn_angle_rad(Rng& rng) {
  const double raw = rng.uniform(-kPi, kPi);
  const double dir = raw >= 0.0 ? 1.0 : -1.0;
  return dir * std::fabs(raw);
}

namespace detail {

// Distance from a point (relative to the cone apex) to the closed cone
// sector of the given radius and half-angle around the heading.
inline double sector_distance(double dx, double dy, double heading, double radius,
                              double half_angle) {
  const double d = std::hypot(dx, dy);
  if (d == 0.0) return 0.0;
  const double fx = std::cos(heading), fy = std::sin(heading);
  const double along = dx * fx + dy * fy;
  const double bearing = std::acos(std::min(1.0, std::max(-1.0, along / d)));
  if (bearing <= half_angle) return std::max(0.0, d - radius);
  // Nearest boundary is the closer edge ray of the sector.
  const double side = dx * fy - dy * fx >= 0.0 ? -1.0 : 1.0;
  const double ex = std::cos(heading + side * half_angle);
  const double ey = std::sin(heading + side * half_angle);
  const double t = std::min(radius, std::max(0.0, dx * ex + dy * ey));
  return std::hypot(dx - t * ex, dy - t * ey);
}

}  // namespace detail

// True when a wall or another robot's body disc intrudes into the forward
// cone of the given range.
inline bool detect_obstacle(const Pose& self, std::span<const Pose> others, double range_mm,
                            double arena_w_mm, double arena_h_mm, int skip_index = -1) {
  for (int i = 0; i < static_cast<int>(others.size()); ++i) {
    if (i == skip_index) continue;
    const Pose& o = others[i];
    if (detail::sector_distance(o.x_mm - self.x_mm, o.y_mm - self.y_mm, self.heading_rad,
                                range_mm, kConeHalfAngleRad) <= kBodyRadiusMm)
      return true;
  }
  // A wall line is inside the cone iff its perpendicular distance is at most
  // the cone's reach toward it: range * cos(max(0, wall bearing - half angle)).
  const double fx = std::cos(self.heading_rad), fy = std::sin(self.heading_rad);
  auto wall_hit = [&](double nx, double ny, double dist) {
    const double cosb = std::min(1.0, std::max(-1.0, fx * nx + fy * ny));
    const double off = std::max(0.0, std::acos(cosb) - kConeHalfAngleRad);
    if (off >= kPi / 2.0) return false;
    return dist <= range_mm * std::cos(off);
  };
  if (wall_hit(-1.0, 0.0, self.x_mm)) return true;
  if (wall_hit(1.0, 0.0, arena_w_mm - self.x_mm)) return true;
  if (wall_hit(0.0, -1.0, self.y_mm)) return true;
  if (wall_hit(0.0, 1.0, arena_h_mm - self.y_mm)) return true;
  return false;
}

enum class FsmState { RandomWalk, RandomTurn, Observe };

inline std::string to_string(FsmState s) {
  switch (s) {
    case FsmState::RandomWalk: return "random_walk";
    case FsmState::RandomTurn: return "random_turn";
    case FsmState::Observe: return "observe";
  }
  return "?";
}

enum class TurnCause { WalkTimeout, Obstacle };

struct StateTransition {
  double t_ms = 0.0;
  int robot = 0;
  FsmState from = FsmState::RandomWalk;
  FsmState to = FsmState::RandomWalk;
  TurnCause cause = TurnCause::WalkTimeout;  // meaningful when to == RandomTurn
};

struct ObservationSample {
  double t_ms = 0.0;
  int robot = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  int tile_bit = 0;
  double e_hat = 0.0;
  int obs_bit = 0;
  double odometer_mm = 0.0;
};

// Mutable per-robot motion state; the decision side lives with the engine.
struct RobotMotion {
  Pose pose;
  FsmState state = FsmState::RandomWalk;
  double walk_remaining_ms = 0.0;
  double turn_remaining_rad = 0.0;
  double turn_dir = 1.0;
  TurnCause turn_cause = TurnCause::WalkTimeout;
  double observe_remaining_ms = 0.0;
  FsmState resume_state = FsmState::RandomWalk;
  double sample_timer_ms = 0.0;  // runs in every state, reset when a sample starts
  double odometer_mm = 0.0;
};

struct StepRngs {
  Rng* walk = nullptr;
  Rng* turn = nullptr;
  Rng* sense = nullptr;
};

// Advances one robot by dt. Internal events (walk deadline, turn completion,
// sample timer) are handled at their exact sub-step times, so observation
// cadence does not quantize to dt. Other robots are seen at whatever pose the
// caller currently holds in all_poses; the robot's own slot is skipped.
inline void fsm_step(int robot_id, RobotMotion& m, const RobotParams& params,
                     const ActuationNoise& noise, const SensorConfig& sensor, const TileGrid& grid,
                     std::span<const Pose> all_poses, double t_ms, double dt_ms, double t_end_ms,
                     StepRngs rngs, std::vector<StateTransition>& transitions,
                     std::vector<ObservationSample>& observations) {
  double now = t_ms;
  double remaining = dt_ms;
  const double arena_w = grid.arena_width_mm(), arena_h = grid.arena_height_mm();
  int guard = 0;
  while (remaining > 1e-9) {
    if (++guard > 10000) throw std::logic_error("fsm_step: no progress");
    if (m.state == FsmState::Observe) {
      const double slice = std::min(remaining, m.observe_remaining_ms);
      m.observe_remaining_ms -= slice;
      m.sample_timer_ms += slice;
      now += slice;
      remaining -= slice;
      if (m.observe_remaining_ms <= 1e-9) {
        transitions.push_back({now, robot_id, FsmState::Observe, m.resume_state, m.turn_cause});
        m.state = m.resume_state;
      }
      continue;
    }
    // Sample timer fires at exact spacing regardless of motion state.
    if (m.sample_timer_ms >= params.sample_interval_ms - 1e-9) {
      const int tile = tile_at(grid, m.pose.x_mm, m.pose.y_mm);
      const Observation obs = get_observation(tile, sensor, *rngs.sense);
      observations.push_back({now, robot_id, m.pose.x_mm, m.pose.y_mm, tile, obs.e_hat, obs.bit,
                              m.odometer_mm});
      transitions.push_back({now, robot_id, m.state, FsmState::Observe, m.turn_cause});
      m.resume_state = m.state;
      m.state = FsmState::Observe;
      m.observe_remaining_ms = obs.duration_ms;
      m.sample_timer_ms = 0.0;
      continue;
    }
    const double to_sample = params.sample_interval_ms - m.sample_timer_ms;
    if (m.state == FsmState::RandomWalk) {
      if (detect_obstacle(m.pose, all_poses, params.collision_range_mm, arena_w, arena_h, robot_id)) {
        transitions.push_back({now, robot_id, FsmState::RandomWalk, FsmState::RandomTurn,
                               TurnCause::Obstacle});
        const double angle = draw_turn_angle_rad(*rngs.turn);
        m.state = FsmState::RandomTurn;
        m.turn_cause = TurnCause::Obstacle;
        m.turn_dir = angle >= 0.0 ? 1.0 : -1.0;
        m.turn_remaining_rad = std::fabs(angle);
        continue;
      }
      const double slice = std::min({remaining, to_sample, m.walk_remaining_ms});
      const double battery = battery_factor(std::min(now, t_end_ms), t_end_ms, noise.battery_horizon);
      const auto [vl, vr] = wheel_speeds(params.set_speed, noise, battery);
      const Pose before = m.pose;
      m.pose = step_pose(m.pose, vl, vr, slice, arena_w, arena_h);
      m.odometer_mm += std::hypot(m.pose.x_mm - before.x_mm, m.pose.y_mm - before.y_mm);
      m.walk_remaining_ms -= slice;
      m.sample_timer_ms += slice;
      now += slice;
      remaining -= slice;
      if (m.walk_remaining_ms <= 1e-9) {
        transitions.push_back({now, robot_id, FsmState::RandomWalk, FsmState::RandomTurn,
                               TurnCause::WalkTimeout});
        const double angle = draw_turn_angle_rad(*rngs.turn);
        m.state = FsmState::RandomTurn;
        m.turn_cause = TurnCause::WalkTimeout;
        m.turn_dir = angle >= 0.0 ? 1.0 : -1.0;
        m.turn_remaining_rad = std::fabs(angle);
      }
      continue;
    }
    // RandomTurn: rotate in place; obstacle checks stay suspended until the
    // walk resumes.
    const double turn_rate = kTurnRateRadPerS / 1000.0;  // rad per ms
    const double turn_time = m.turn_remaining_rad / turn_rate;
    const double slice = std::min({remaining, to_sample, turn_time});
    m.pose.heading_rad = wrap_angle(m.pose.heading_rad + m.turn_dir * turn_rate * slice);
    m.turn_remaining_rad -= turn_rate * slice;
    m.sample_timer_ms += slice;
    now += slice;
    remaining -= slice;
    if (m.turn_remaining_rad <= 1e-12) {
      transitions.push_back({now, robot_id, FsmState::RandomTurn, FsmState::RandomWalk,
                             m.turn_cause});
      m.state = FsmState::RandomWalk;
      m.walk_remaining_ms = draw_walk_duration_ms(params, *rngs.walk);
    }
  }
}

}  // namespace swarmsim

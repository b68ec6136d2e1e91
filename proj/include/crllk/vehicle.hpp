/******************************************************************************
 * Copyright 2026 The crllk Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

/**
 * @file
 * Differential-drive lane-keeping environment: action mappings, exact-arc
 * kinematics, per-step reward and cost channels, and episode lifecycle.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "crllk/errors.hpp"
#include "crllk/rng.hpp"
#include "crllk/track.hpp"

namespace crllk {

/// Physical speed of a unit wheel command, m/s.
inline constexpr double kMaxWheelSpeed = 0.21;

enum class DiscreteMove : int { kTurnLeft = 0, kTurnRight = 1, kGoStraight = 2 };

using WheelTable = std::array<std::array<double, 2>, 3>;

/// Default (left, right) wheel commands for turn-left, turn-right, go-straight.
inline constexpr WheelTable kDefaultWheelTable = {{{0.2, 1.0}, {1.0, 0.2}, {1.0, 1.0}}};

struct EnvConfig {
  double dt = 1.0 / 30.0;
  int horizon = 512;
  double axle_length = 0.102;
  double bot_radius = 0.06;
  /// Heading-rate scale for continuous steering: omega = angle * |v| / steer_gain.
  double steer_gain = 0.5;
  double switch_beta = 0.9;
  WheelTable wheel_table = kDefaultWheelTable;
  std::vector<double> curvature_offsets = {0.1, 0.2, 0.3, 0.5, 0.8};
  double sensing_range = 0.5;
  double reset_max_deviation = 0.03;
  double reset_max_heading = 0.2;

  std::size_t observation_size() const { return 3 + curvature_offsets.size() + 2; }
};

struct DiscreteAction {
  int index = 0;
  friend bool operator==(const DiscreteAction&, const DiscreteAction&) = default;
};

struct ContinuousAction {
  double steer = 0.0;
  double speed = 0.0;
  friend bool operator==(const ContinuousAction&, const ContinuousAction&) = default;
};

using Action = std::variant<DiscreteAction, ContinuousAction>;

enum class DoneReason { kNone, kHorizon, kOffTrack };

inline const char* to_string(DoneReason r) {
  switch (r) {
    case DoneReason::kHorizon: return "horizon";
    case DoneReason::kOffTrack: return "off_track";
    default: return "none";
  }
}

using ObsVector = std::vector<double>;

struct SimState {
  Vec2 position;
  double heading = 0.0;
  int step_index = 0;
  double prev_abs_deviation = 0.0;
  /// Lane progress of `position`, cached for reward computation.
  double progress = 0.0;
  /// Linear speed applied on the last step, m/s.
  double speed = 0.0;
  std::vector<Obstacle> obstacles;
  bool done = false;
  DoneReason done_reason = DoneReason::kNone;

  friend bool operator==(const SimState& a, const SimState& b) {
    if (a.obstacles.size() != b.obstacles.size()) return false;
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
      if (!(a.obstacles[i].center == b.obstacles[i].center) ||
          a.obstacles[i].radius != b.obstacles[i].radius ||
          !(a.obstacles[i].velocity == b.obstacles[i].velocity))
        return false;
    }
    return a.position == b.position && a.heading == b.heading && a.step_index == b.step_index &&
           a.prev_abs_deviation == b.prev_abs_deviation && a.progress == b.progress &&
           a.speed == b.speed && a.done == b.done && a.done_reason == b.done_reason;
  }
};

struct StepOutcome {
  ObsVector observation;
  /// Forward arc-length progress this step, meters.
  double reward = 0.0;
  /// Deviation magnitude, decimeters.
  double cost_lane = 0.0;
  int cost_coll = 0;
  int cost_swt = 0;
  bool done = false;
  LanePose pose;
};

/// Wheel commands for a discrete action.
inline std::array<double, 2> discrete_to_wheels(int index, const WheelTable& table = kDefaultWheelTable) {
  if (index < 0 || index >= static_cast<int>(table.size()))
    throw ArgumentError("discrete action index " + std::to_string(index) + " out of range [0, 3)");
  return table[static_cast<std::size_t>(index)];
}

struct Controls {
  double steering_angle = 0.0;
  double linear_speed = 0.0;
};

inline Controls continuous_to_controls(double steer, double speed) {
  steer = std::clamp(steer, -1.0, 1.0);
  speed = std::clamp(speed, -1.0, 1.0);
  return {std::numbers::pi * steer, kMaxWheelSpeed * speed};
}

/// Body velocities (v, omega) produced by an action.
inline std::pair<double, double> action_velocities(const Action& action, const EnvConfig& cfg) {
  if (const auto* d = std::get_if<DiscreteAction>(&action)) {
    const auto [vl, vr] = discrete_to_wheels(d->index, cfg.wheel_table);
    return {kMaxWheelSpeed * 0.5 * (vl + vr), kMaxWheelSpeed * (vr - vl) / cfg.axle_length};
  }
  const auto& c = std::get<ContinuousAction>(action);
  const Controls u = continuous_to_controls(c.steer, c.speed);
  double omega = u.steering_angle * std::abs(u.linear_speed) / cfg.steer_gain;
  const double max_rate = 0.5 * std::numbers::pi / cfg.dt;
  omega = std::clamp(omega, -max_rate, max_rate);
  return {u.linear_speed, omega};
}

/// Exact unicycle integration over `dt` at constant (v, omega).
inline std::pair<Vec2, double> integrate_unicycle(Vec2 p, double heading, double v, double omega, double dt) {
  const double dtheta = omega * dt;
  if (std::abs(dtheta) < 1e-12) {
    return {p + (v * dt) * unit_from_angle(heading), wrap_angle(heading + dtheta)};
  }
  const double r = v / omega;
  const Vec2 q{p.x + r * (std::sin(heading + dtheta) - std::sin(heading)),
               p.y - r * (std::cos(heading + dtheta) - std::cos(heading))};
  return {q, wrap_angle(heading + dtheta)};
}

namespace detail {

inline void advance_obstacles(const TrackMap& track, std::vector<Obstacle>& obstacles, double dt) {
  for (auto& o : obstacles) {
    if (o.velocity.x == 0.0 && o.velocity.y == 0.0) continue;
    o.center = o.center + dt * o.velocity;
    const auto proj = track.project(o.center, 0.0);
    const double s = proj.pose.signed_deviation;
    if (std::abs(s) + o.radius > track.d_center()) {
      const Vec2 n = left_normal(track.lane_tangent(proj.pose.progress));
      const double vn = dot(o.velocity, n);
      if (vn * s > 0.0) o.velocity = o.velocity - (2.0 * vn) * n;
    }
  }
}

}  // namespace detail

inline ObsVector observe(const TrackMap& track, const EnvConfig& cfg, const SimState& state, const LanePose& pose) {
  ObsVector obs;
  obs.reserve(cfg.observation_size());
  obs.push_back(10.0 * pose.signed_deviation);
  obs.push_back(pose.heading_error);
  obs.push_back(state.speed);
  for (double off : cfg.curvature_offsets) obs.push_back(track.lane_curvature(pose.progress + off));
  double best = cfg.sensing_range;
  double bearing = 0.0;
  for (const auto& o : state.obstacles) {
    const Vec2 d = o.center - state.position;
    const double gap = std::max(0.0, norm(d) - o.radius);
    if (gap < best) {
      best = gap;
      bearing = wrap_angle(std::atan2(d.y, d.x) - state.heading);
    }
  }
  obs.push_back(best);
  obs.push_back(bearing);
  return obs;
}

/// Deterministic start state: a uniformly drawn lane position with small
/// lateral and heading perturbations, rejecting poses that touch an obstacle.
inline std::pair<SimState, ObsVector> reset(const TrackMap& track, const EnvConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  SimState state;
  state.obstacles = track.obstacles();
  for (int attempt = 0;; ++attempt) {
    const double progress = rng.uniform(0.0, track.lane_length());
    const double dev = rng.uniform(-cfg.reset_max_deviation, cfg.reset_max_deviation);
    const double herr = rng.uniform(-cfg.reset_max_heading, cfg.reset_max_heading);
    const Vec2 t = track.lane_tangent(progress);
    state.position = track.lane_point(progress) + dev * left_normal(t);
    state.heading = wrap_angle(std::atan2(t.y, t.x) + herr);
    if (collision_indicator(track, state.obstacles, state.position, cfg.bot_radius) == 0) break;
    if (attempt > 10000) throw GeometryError("reset: no collision-free start pose found");
  }
  const LanePose pose = track.project(state.position, state.heading).pose;
  state.progress = pose.progress;
  state.prev_abs_deviation = std::abs(pose.signed_deviation);
  return {state, observe(track, cfg, state, pose)};
}

inline std::pair<SimState, StepOutcome> step(const TrackMap& track, const EnvConfig& cfg, const SimState& state,
                                             const Action& action) {
  if (state.done) throw LifecycleError("step called on a finished episode");
  if (!(cfg.dt > 0.0)) throw ArgumentError("dt must be positive");
  const auto [v, omega] = action_velocities(action, cfg);

  SimState next = state;
  std::tie(next.position, next.heading) = integrate_unicycle(state.position, state.heading, v, omega, cfg.dt);
  next.speed = v;
  next.step_index = state.step_index + 1;
  detail::advance_obstacles(track, next.obstacles, cfg.dt);

  const auto proj = track.project(next.position, next.heading);
  const double abs_dev = std::abs(proj.pose.signed_deviation);

  StepOutcome out;
  out.pose = proj.pose;
  out.reward = track.progress_delta(state.progress, proj.pose.progress);
  out.cost_lane = 10.0 * abs_dev;
  out.cost_coll = collision_indicator(track, next.obstacles, next.position, cfg.bot_radius);
  out.cost_swt = lane_switch_indicator(state.prev_abs_deviation, abs_dev, track.d_center(), cfg.switch_beta);

  next.progress = proj.pose.progress;
  next.prev_abs_deviation = abs_dev;
  if (abs_dev > track.road_half_width() + cfg.bot_radius || proj.distance > track.road_half_width() + 1.0) {
    next.done = true;
    next.done_reason = DoneReason::kOffTrack;
  } else if (next.step_index >= cfg.horizon) {
    next.done = true;
    next.done_reason = DoneReason::kHorizon;
  }
  out.done = next.done;
  out.observation = observe(track, cfg, next, proj.pose);
  return {std::move(next), std::move(out)};
}

}  // namespace crllk

// Copyright 2026 The swarmform Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "swarmform/forces.hpp"
#include "swarmform/geometry.hpp"
#include "swarmform/protocol_types.hpp"

namespace swarmform {

struct Circle {
  Vec2 center;
  double radius{1.0};
};

struct AxisAlignedRect {
  Vec2 min;
  Vec2 max;
};

using Obstacle = std::variant<Circle, AxisAlignedRect>;

inline bool valid_obstacle(const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o)) return c->radius > 0.0 && c->center.finite();
  const auto& r = std::get<AxisAlignedRect>(o);
  return r.min.x < r.max.x && r.min.y < r.max.y;
}

inline constexpr double kNoHit = std::numeric_limits<double>::infinity();

/// Distance along a unit ray to the first point of a disk; 0 if the origin is inside.
inline double ray_cast(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 oc = origin - c.center;
  const double cc = oc.squared_norm() - c.radius * c.radius;
  if (cc <= 0.0) return 0.0;
  const double b = dot(oc, dir);
  if (b >= 0.0) return kNoHit;
  const double disc = b * b - cc;
  if (disc < 0.0) return kNoHit;
  // Stable form of -b - sqrt(disc).
  return cc / (-b + std::sqrt(disc));
}

/// Slab test; 0 if the origin is inside the box.
inline double ray_cast(Vec2 origin, Vec2 dir, const AxisAlignedRect& r) {
  double t_enter = 0.0;
  double t_exit = kNoHit;
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {r.min.x, r.min.y};
  const double hi[2] = {r.max.x, r.max.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return kNoHit;
      continue;
    }
    double t0 = (lo[axis] - o[axis]) / d[axis];
    double t1 = (hi[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return kNoHit;
  }
  return t_enter;
}

inline double ray_cast(Vec2 origin, Vec2 dir, const Obstacle& o) {
  return std::visit([&](const auto& shape) { return ray_cast(origin, dir, shape); }, o);
}

/// Distance from a ray origin inside the box to its boundary.
inline double ray_exit(Vec2 origin, Vec2 dir, const AxisAlignedRect& box) {
  double t = kNoHit;
  if (dir.x > 0.0) t = std::min(t, (box.max.x - origin.x) / dir.x);
  if (dir.x < 0.0) t = std::min(t, (box.min.x - origin.x) / dir.x);
  if (dir.y > 0.0) t = std::min(t, (box.max.y - origin.y) / dir.y);
  if (dir.y < 0.0) t = std::min(t, (box.min.y - origin.y) / dir.y);
  return std::max(t, 0.0);
}

/// Signed distance from a point to an obstacle surface (negative inside).
inline double surface_distance(Vec2 p, const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o)) return distance(p, c->center) - c->radius;
  const auto& r = std::get<AxisAlignedRect>(o);
  const double dx = std::max({r.min.x - p.x, 0.0, p.x - r.max.x});
  const double dy = std::max({r.min.y - p.y, 0.0, p.y - r.max.y});
  if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
  return -std::min({p.x - r.min.x, r.max.x - p.x, p.y - r.min.y, r.max.y - p.y});
}

/// Everything an ultrasonic ray can hit.
struct SensingWorld {
  std::span<const Obstacle> obstacles;
  std::span<const Vec2> bot_positions;  // other bots' centers
  double bot_radius{0.07};
  const AxisAlignedRect* arena{nullptr};  // boundary seen from inside
};

/// Five range readings at heading + kSensorAngles, measured from the bot center.
inline SensorReadings sense_ultrasonic(const Pose& pose, const SensingWorld& world, double sensor_max) {
  SensorReadings out{};
  for (std::size_t i = 0; i < kSensorAngles.size(); ++i) {
    const Vec2 dir = unit_vector(pose.heading + kSensorAngles[i]);
    double best = kNoHit;
    for (const auto& o : world.obstacles) best = std::min(best, ray_cast(pose.position, dir, o));
    for (const Vec2& b : world.bot_positions) {
      if (b == pose.position) continue;
      best = std::min(best, ray_cast(pose.position, dir, Circle{b, world.bot_radius}));
    }
    if (world.arena != nullptr) best = std::min(best, ray_exit(pose.position, dir, *world.arena));
    out[i] = SensorReading{kSensorAngles[i], best < sensor_max ? best : sensor_max};
  }
  return out;
}

/// Obstacle size from how many sensors report a detection.
inline ObstacleClass classify_obstacle(std::span<const SensorReading> readings, double sensor_max,
                                       int large_threshold = 3) {
  int hits = 0;
  for (const auto& r : readings) hits += r.distance < sensor_max ? 1 : 0;
  if (hits == 0) return ObstacleClass::kNone;
  return hits >= large_threshold ? ObstacleClass::kLarge : ObstacleClass::kSmall;
}

enum class WallSide { kLeft, kRight };

struct WallFollowParams {
  double standoff{0.35};  // desired distance to the wall, m
  double band{0.05};      // half-width of the accepted distance band, m
  double radial_gain{1.0};
  double speed{0.5};      // command magnitude, m/s
};

/// Side with more free sensors; ties go left.
inline WallSide choose_wall_side(std::span<const SensorReading> readings, double sensor_max) {
  int left = 0;
  int right = 0;
  for (const auto& r : readings) {
    if (r.distance < sensor_max) continue;
    if (r.angle > 0.0) ++left;
    if (r.angle < 0.0) ++right;
  }
  return left >= right ? WallSide::kLeft : WallSide::kRight;
}

/// Bot-frame wall-following command: tangent to the nearest detection plus a
/// radial correction that keeps the standoff inside its band.
inline Vec2 wall_follow_local(std::span<const SensorReading> readings, WallSide side, double sensor_max,
                              const WallFollowParams& p) {
  const SensorReading* nearest = nullptr;
  for (const auto& r : readings) {
    if (r.distance < sensor_max && (nearest == nullptr || r.distance < nearest->distance)) nearest = &r;
  }
  if (nearest == nullptr) return {};
  const double turn = side == WallSide::kLeft ? kPi / 2 : -kPi / 2;
  Vec2 cmd = unit_vector(nearest->angle + turn);
  const Vec2 toward = unit_vector(nearest->angle);
  if (nearest->distance < p.standoff - p.band) {
    cmd -= toward * (p.radial_gain * (p.standoff - nearest->distance));
  } else if (nearest->distance > p.standoff + p.band) {
    cmd += toward * (p.radial_gain * (nearest->distance - p.standoff));
  }
  const double len = cmd.norm();
  return len > 0.0 ? cmd * (p.speed / len) : Vec2{};
}

struct Kinematics {
  double dt{0.1};
  double v_max{0.5};
  double omega_max{kPi};
};

/// Heading-slew point model. A force turns the bot toward its direction at no
/// more than omega_max and drives it forward scaled by cos(heading error).
inline Pose integrate(const Pose& pose, Vec2 force, const Kinematics& k) {
  const double mag = force.norm();
  if (mag == 0.0 || !std::isfinite(mag)) return pose;
  const double desired = force.angle();
  const double max_turn = k.omega_max * k.dt;
  const double err = angle_diff(desired, pose.heading);
  Pose out = pose;
  out.heading = normalize_angle(pose.heading + std::clamp(err, -max_turn, max_turn));
  const double alignment = dot(unit_vector(pose.heading), force / mag);
  const double speed = std::min(mag, k.v_max) * std::max(0.0, alignment);
  out.position += unit_vector(out.heading) * (speed * k.dt);
  return out;
}

/// Turns in place toward `target_heading`.
inline Pose rotate_in_place(const Pose& pose, double target_heading, const Kinematics& k) {
  const double max_turn = k.omega_max * k.dt;
  Pose out = pose;
  out.heading = normalize_angle(pose.heading + std::clamp(angle_diff(target_heading, pose.heading), -max_turn, max_turn));
  return out;
}

}  // namespace swarmform

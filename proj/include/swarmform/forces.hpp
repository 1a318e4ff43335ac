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
#include <array>
#include <cmath>
#include <span>

#include "swarmform/geometry.hpp"
#include "swarmform/protocol_types.hpp"

namespace swarmform {

/// Gains and thresholds of the force laws. All values strictly positive.
struct ForceParams {
  double k_collision{0.05};   // force * m^2
  double r_o{0.25};           // collision activation distance, m
  double k_o{1.0};            // parent spring gain, force / m^2
  double k_goal{1.0};         // leader goal gain, force / m
  double k_target{1.0};       // gain towards the shape slot while forming, force / m
  double c_obs{0.5};          // obstacle strength per unit driving force
  double m_floor{0.2};        // minimum driving force used for obstacle strength
  double sensor_max{1.0};     // ultrasonic range, m
  double delta_sing{1e-3};    // clamp on |r_ij - r_o|
  double r_min{1e-3};         // clamp on ultrasonic distance
  double clearance{kPi / 8};  // neighbor masking half-width, rad

  bool valid() const {
    for (double v : {k_collision, r_o, k_o, k_goal, k_target, c_obs, m_floor, sensor_max, delta_sing, r_min,
                     clearance}) {
      if (!(v > 0.0) || !std::isfinite(v)) return false;
    }
    return true;
  }
};

/// Bot-frame angles of the five ultrasonic sensors.
inline constexpr std::array<double, 5> kSensorAngles{-kPi / 2, -kPi / 4, 0.0, kPi / 4, kPi / 2};

struct SensorReading {
  double angle{0.0};     // bot frame
  double distance{0.0};  // m; sensor_max when nothing is in range
};

using SensorReadings = std::array<SensorReading, kSensorAngles.size()>;

/// Pairwise repulsion from a neighbor at distance r_ij and azimuth alpha_ij.
/// Zero outside the activation radius r_o.
inline Vec2 collision_force(double r_ij, double alpha_ij, const ForceParams& p) {
  if (!(r_ij < p.r_o)) return {};
  double gap = r_ij - p.r_o;
  if (std::abs(gap) < p.delta_sing) gap = -p.delta_sing;
  return unit_vector(alpha_ij) * (-p.k_collision / (gap * gap));
}

/// Parent spring evaluated at the reference geometry captured when Ready.
inline Vec2 reference_force(double r0, double alpha0, const ForceParams& p) {
  return unit_vector(alpha0) * (p.k_o * r0 * r0);
}

/// The stored counter-force: the reference force turned through pi.
inline Vec2 reference_counter_force(double r0, double alpha0, const ForceParams& p) {
  return -reference_force(r0, alpha0, p);
}

inline Vec2 goal_force(Vec2 goal, Vec2 position, const ForceParams& p) { return (goal - position) * p.k_goal; }

/// Parent spring at the current distance and azimuth.
inline Vec2 attract_force(double r_t, double alpha_t, const ForceParams& p) {
  return unit_vector(alpha_t) * (p.k_o * r_t * r_t);
}

/// Net formation force. `counter_force` is the stored, already negated reference.
inline Vec2 net_formation_force(Vec2 f_a, Vec2 counter_force) { return f_a + counter_force; }

/// Strength of obstacle repulsion, proportional to the bot's own driving force.
inline double obstacle_strength(double driving_force_mag, const ForceParams& p) {
  return p.c_obs * std::max(driving_force_mag, p.m_floor);
}

/// True when some neighbor bearing lies within the clearance of `sensor_angle`.
inline bool sensor_masked(double sensor_angle, std::span<const double> neighbor_azimuths, const ForceParams& p) {
  return std::any_of(neighbor_azimuths.begin(), neighbor_azimuths.end(),
                     [&](double az) { return std::abs(angle_diff(az, sensor_angle)) <= p.clearance; });
}

/// Obstacle repulsion in the bot frame with explicit strength m. Readings
/// aligned with a neighbor's broadcast bearing are ignored.
inline Vec2 obstacle_force_local(std::span<const SensorReading> readings, std::span<const double> neighbor_azimuths,
                                 double m, const ForceParams& p) {
  Vec2 total;
  for (const auto& r : readings) {
    if (!(r.distance < p.sensor_max)) continue;
    if (sensor_masked(r.angle, neighbor_azimuths, p)) continue;
    const double d = std::max(r.distance, p.r_min);
    total -= unit_vector(r.angle) * (m / d);
  }
  return total;
}

/// Obstacle repulsion rotated into the world frame by `heading`.
inline Vec2 obstacle_force(std::span<const SensorReading> readings, std::span<const double> neighbor_azimuths,
                           double driving_force_mag, double heading, const ForceParams& p) {
  return rotate(obstacle_force_local(readings, neighbor_azimuths, obstacle_strength(driving_force_mag, p), p),
                heading);
}

/// Per-tick force components of one bot, all in the world frame.
struct ForceComponents {
  Vec2 collision;
  bool collision_active{false};
  Vec2 target;     // slot attraction while forming or holding
  Vec2 goal;       // leader only
  Vec2 formation;  // net formation force, followers only
  Vec2 obstacle;
  Vec2 wall;       // wall-following command
  Vec2 deflection; // redirects the part of the drive that pushes into an obstacle
};

/// Removes the component of `drive` that points against `obstacle` and
/// re-applies it along the obstacle surface, on the side of `interior`.
/// Zero when there is no obstacle force or the drive already points away.
inline Vec2 deflect_along_obstacle(Vec2 drive, Vec2 obstacle, Vec2 interior) {
  const double len = obstacle.norm();
  if (len == 0.0) return {};
  const Vec2 away = obstacle / len;
  const double into = dot(drive, away);
  if (into >= 0.0) return {};
  Vec2 tangent{-away.y, away.x};
  if (dot(tangent, interior) < 0.0) tangent = -tangent;
  return away * (-into) + tangent * (-into);
}

/// The task force of the current state and mode, before collision handling.
inline Vec2 task_force(BotState state, TransitMode mode, bool is_leader, const ForceComponents& f) {
  switch (state) {
    case BotState::kSearching:
    case BotState::kMoving:
    case BotState::kReached:
    case BotState::kReady:
      return f.target;
    case BotState::kTransit:
      if (mode == TransitMode::kStopped) return {};
      if (is_leader) return f.goal + f.obstacle + f.deflection;
      if (mode == TransitMode::kWallFollow) return f.wall + f.obstacle;
      return f.formation + f.obstacle + f.deflection;
    case BotState::kDone:
      break;
  }
  return {};
}

/// Selects and sums the components that drive the bot this tick. Collision
/// avoidance takes priority: inside r_o the repulsion replaces every task
/// component along its own direction, and only the sideways part of the task
/// survives so that two bots cannot pin each other.
inline Vec2 compose_total(BotState state, TransitMode mode, bool is_leader, const ForceComponents& f) {
  if (state == BotState::kDone || mode == TransitMode::kStopped) return {};
  const Vec2 task = task_force(state, mode, is_leader, f);
  if (!f.collision_active) return task;
  const double len = f.collision.norm();
  if (len == 0.0) return f.collision;
  const Vec2 dir = f.collision / len;
  return f.collision + (task - dir * dot(task, dir));
}

}  // namespace swarmform

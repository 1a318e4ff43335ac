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
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include "swarmform/controller.hpp"
#include "swarmform/scenario.hpp"
#include "swarmform/sensing.hpp"
#include "swarmform/shape.hpp"
#include "swarmform/trace.hpp"

namespace swarmform {

/// Per-bot data the world records beyond the CSV columns.
struct BotDiagnostics {
  std::size_t completion_count{0};  // done keys in the bot's own replica
  bool detects_obstacle{false};     // some ray's nearest hit is a scenario obstacle
  std::optional<BotId> parent;
};

struct TickSummary {
  int tick{0};
  Vec2 centroid;
  std::size_t completion_min{0};
  std::size_t completion_max{0};
};

struct RunResult {
  ShapeTable table;
  std::vector<TraceRow> rows;                     // tick-major, bot-minor
  std::vector<BotDiagnostics> diagnostics;        // parallel to rows
  std::vector<TickSummary> ticks;
  std::vector<BotMemory> final_memory;
  std::optional<int> formation_tick;              // first tick with every bot Ready or later
  std::vector<Pose> formation_poses;              // by bot, at formation_tick
  std::vector<int> formation_labels;              // by bot, at formation_tick
  std::optional<int> transit_tick;                // first tick any bot is in Transit
  std::map<BotId, BotId> transit_parents;         // from bot memories at transit_tick
  std::optional<BotId> leader;
  int ticks_total{0};
  double min_bot_clearance{std::numeric_limits<double>::infinity()};
  double min_obstacle_clearance{std::numeric_limits<double>::infinity()};
  std::vector<std::string> violations;            // illegal transitions, early barriers

  std::span<const TraceRow> tick_rows(int tick) const {
    const std::size_t n = final_memory.size();
    return std::span<const TraceRow>(rows).subspan(static_cast<std::size_t>(tick) * n, n);
  }
  std::span<const BotDiagnostics> tick_diagnostics(int tick) const {
    const std::size_t n = final_memory.size();
    return std::span<const BotDiagnostics>(diagnostics).subspan(static_cast<std::size_t>(tick) * n, n);
  }
};

struct RunOptions {
  /// Called with every inbox just before the controller runs.
  std::function<void(int tick, BotId bot, std::span<const Message> inbox)> on_inbox;
  /// Stop as soon as every bot is Ready (formation-only runs).
  bool stop_at_formation{false};
};

/// Deterministic uniform double in [0, 1).
inline double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool comm_graph_connected(std::span<const Vec2> positions, double radius) {
  if (positions.empty()) return true;
  std::vector<char> seen(positions.size(), 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 0;
  while (!q.empty()) {
    const auto i = q.front();
    q.pop();
    ++count;
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (!seen[j] && distance(positions[i], positions[j]) <= radius) {
        seen[j] = 1;
        q.push(j);
      }
    }
  }
  return count == positions.size();
}

/// Initial poses: the explicit list, or a seeded draw from the spawn region
/// that respects the minimum separation and yields a connected comm graph.
inline std::vector<Pose> initial_poses(const Scenario& s, int n) {
  if (!s.spawn) return s.poses;
  std::mt19937_64 rng(s.seed);
  const auto& region = s.spawn->region;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Pose> poses;
    std::vector<Vec2> positions;
    int tries = 0;
    while (static_cast<int>(poses.size()) < n && tries < 100000) {
      ++tries;
      const Vec2 p{region.min.x + unit_random(rng) * (region.max.x - region.min.x),
                   region.min.y + unit_random(rng) * (region.max.y - region.min.y)};
      const double heading = normalize_angle(-kPi + unit_random(rng) * 2.0 * kPi);
      const bool clear = std::all_of(positions.begin(), positions.end(),
                                     [&](Vec2 q) { return distance(p, q) >= s.spawn->min_separation; });
      if (!clear) continue;
      poses.push_back({p, heading});
      positions.push_back(p);
    }
    if (static_cast<int>(poses.size()) == n && comm_graph_connected(positions, s.comm_radius)) return poses;
  }
  throw ScenarioError("could not place bots in the spawn region");
}

/// Runs the lockstep simulation. Per tick: snapshot poses, sense, deliver the
/// previous tick's broadcasts, run every controller, integrate, record.
inline RunResult run(const Scenario& scenario, const RunOptions& options = {}) {
  RunResult result;
  result.table = validate_scenario(scenario);
  const ShapeTable& table = result.table;
  const int n = table.size();
  std::vector<Pose> poses = initial_poses(scenario, n);
  if (static_cast<int>(poses.size()) != n) throw ScenarioError("bot count does not match the shape");

  ControllerConfig cfg{&table, scenario.force, scenario.protocol, scenario.kinematics};
  std::vector<BotMemory> memory;
  for (int i = 0; i < n; ++i) {
    memory.emplace_back(i);
    // Published by the environment: the goal bearing only, never the goal itself.
    memory.back().store.merge({std::string(stig_keys::kGoalAzimuth), scenario.goal_azimuth(), 1, kEnvironmentOrigin});
  }
  std::vector<std::vector<Message>> outboxes(static_cast<std::size_t>(n));
  const AxisAlignedRect& arena = scenario.arena;
  const double r_bot = scenario.bot_radius;

  for (int tick = 0; tick < scenario.max_ticks; ++tick) {
    // (1) snapshot
    std::vector<Vec2> snapshot;
    for (const auto& p : poses) snapshot.push_back(p.position);

    // (2) sensing; other bots are visible to the rays
    std::vector<SensorReadings> readings(static_cast<std::size_t>(n));
    std::vector<char> detects(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      SensingWorld world{scenario.obstacles, snapshot, r_bot, &arena};
      readings[ui] = sense_ultrasonic(poses[ui], world, scenario.force.sensor_max);
      SensingWorld obstacles_only{scenario.obstacles, {}, r_bot, nullptr};
      const auto obstacle_hits = sense_ultrasonic(poses[ui], obstacles_only, scenario.force.sensor_max);
      for (std::size_t k = 0; k < readings[ui].size(); ++k) {
        if (obstacle_hits[k].distance < scenario.force.sensor_max &&
            obstacle_hits[k].distance <= readings[ui][k].distance) {
          detects[ui] = 1;
        }
      }
    }

    // (3) delivery of last tick's broadcasts, by ascending sender id
    std::vector<std::vector<Message>> inboxes(static_cast<std::size_t>(n));
    for (int sender = 0; sender < n; ++sender) {
      for (int receiver = 0; receiver < n; ++receiver) {
        if (sender == receiver) continue;
        if (distance(snapshot[static_cast<std::size_t>(sender)], snapshot[static_cast<std::size_t>(receiver)]) >
            scenario.comm_radius) {
          continue;
        }
        auto& inbox = inboxes[static_cast<std::size_t>(receiver)];
        const auto& out = outboxes[static_cast<std::size_t>(sender)];
        inbox.insert(inbox.end(), out.begin(), out.end());
      }
    }

    // (4) controllers
    std::vector<StepResult> steps;
    steps.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (options.on_inbox) options.on_inbox(tick, i, inboxes[ui]);
      LocalObservation obs{poses[ui], readings[ui], std::nullopt};
      if (memory[ui].roles.leader) obs.goal = scenario.goal;
      const BotState before = memory[ui].state;
      steps.push_back(controller_step(std::move(memory[ui]), obs, inboxes[ui], cfg));
      const BotState after = steps.back().memory.state;
      if (!legal_transition(before, after)) {
        result.violations.push_back("tick " + std::to_string(tick) + " bot " + std::to_string(i) + ": " +
                                    std::string(to_string(before)) + " -> " + std::string(to_string(after)));
      }
      if (after == BotState::kReady && before != BotState::kReady &&
          completion_count(steps.back().memory.store) != static_cast<std::size_t>(n)) {
        result.violations.push_back("tick " + std::to_string(tick) + " bot " + std::to_string(i) +
                                    ": Ready before the completion set was full");
      }
    }

    // (5) integrate
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto& cmd = steps[ui].command;
      Pose next = cmd.rotate_to ? rotate_in_place(poses[ui], *cmd.rotate_to, scenario.kinematics)
                                : integrate(poses[ui], cmd.force, scenario.kinematics);
      next.position.x = std::clamp(next.position.x, arena.min.x + r_bot, arena.max.x - r_bot);
      next.position.y = std::clamp(next.position.y, arena.min.y + r_bot, arena.max.y - r_bot);
      poses[ui] = next;
      memory[ui] = std::move(steps[ui].memory);
      outboxes[ui] = std::move(steps[ui].outbox);
    }

    // (6) record
    TickSummary summary{tick, {}, std::numeric_limits<std::size_t>::max(), 0};
    bool all_ready = true;
    bool all_done = true;
    bool any_transit = false;
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto& mem = memory[ui];
      const auto& st = steps[ui];
      result.rows.push_back({tick, i, poses[ui].position.x, poses[ui].position.y, poses[ui].heading, mem.state,
                             mem.label, mem.roles.primary(), st.f_net, st.f_obs, st.f_coll, mem.mode});
      const std::size_t completion = completion_count(mem.store);
      result.diagnostics.push_back({completion, detects[ui] != 0, mem.parent});
      summary.centroid += poses[ui].position / static_cast<double>(n);
      summary.completion_min = std::min(summary.completion_min, completion);
      summary.completion_max = std::max(summary.completion_max, completion);
      all_ready = all_ready && mem.state >= BotState::kReady;
      all_done = all_done && mem.state == BotState::kDone;
      any_transit = any_transit || mem.state == BotState::kTransit;
      for (const auto& o : scenario.obstacles) {
        result.min_obstacle_clearance =
            std::min(result.min_obstacle_clearance, surface_distance(poses[ui].position, o) - r_bot);
      }
      for (int j = i + 1; j < n; ++j) {
        result.min_bot_clearance = std::min(
            result.min_bot_clearance, distance(poses[ui].position, poses[static_cast<std::size_t>(j)].position) - 2 * r_bot);
      }
    }
    result.ticks.push_back(summary);
    result.ticks_total = tick + 1;
    if (all_ready && !result.formation_tick) {
      result.formation_tick = tick;
      for (int i = 0; i < n; ++i) {
        result.formation_poses.push_back(poses[static_cast<std::size_t>(i)]);
        result.formation_labels.push_back(memory[static_cast<std::size_t>(i)].label);
      }
    }
    if (any_transit && !result.transit_tick) {
      result.transit_tick = tick;
      for (const auto& mem : memory) {
        if (mem.parent) result.transit_parents[mem.id] = *mem.parent;
        if (mem.roles.leader) result.leader = mem.id;
      }
    }
    if (all_done || (options.stop_at_formation && all_ready)) break;
  }
  result.final_memory = std::move(memory);
  return result;
}

}  // namespace swarmform

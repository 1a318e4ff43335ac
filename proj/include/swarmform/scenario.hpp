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

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmform/controller.hpp"
#include "swarmform/forces.hpp"
#include "swarmform/sensing.hpp"
#include "swarmform/shape.hpp"

namespace swarmform {

/// Invalid scenario contents (maps to exit code 1 in the CLI).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written (exit code 2 in the CLI).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpawnRegion {
  AxisAlignedRect region;
  double min_separation{0.3};
};

struct Scenario {
  AxisAlignedRect arena{{-2.5, -2.5}, {2.5, 2.5}};
  std::string shape_text;              // matrix contents
  std::string shape_path;              // as written in the file, informational
  double spacing{1.0};
  std::vector<Pose> poses;             // explicit initial poses, or
  std::optional<SpawnRegion> spawn;    // seeded random spawn
  Vec2 goal;
  std::vector<Obstacle> obstacles;
  ForceParams force{};
  Kinematics kinematics{};
  double bot_radius{0.07};
  double comm_radius{3.0};
  ProtocolParams protocol{};
  int max_ticks{5000};
  std::uint64_t seed{1};

  double goal_azimuth() const { return goal.angle(); }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ScenarioError("unknown key '" + item.key() + "' in " + where);
  }
}

inline Vec2 read_vec(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ScenarioError(where + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline AxisAlignedRect read_rect(const nlohmann::json& j, const std::string& where) {
  reject_unknown(j, {"min", "max"}, where);
  if (!j.contains("min") || !j.contains("max")) throw ScenarioError(where + " needs min and max");
  return {read_vec(j.at("min"), where + ".min"), read_vec(j.at("max"), where + ".max")};
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ScenarioError(where + "." + key + " has the wrong type");
  }
}

inline nlohmann::json vec_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

}  // namespace detail

/// Parses a scenario document. Relative shape paths resolve against `base_dir`.
inline Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_opt;
  detail::reject_unknown(j, {"arena", "shape", "spawn", "goal", "obstacles", "forces", "kinematics", "comm_radius",
                             "protocol", "max_ticks", "seed"},
                         "scenario");
  Scenario s;
  if (j.contains("arena")) s.arena = detail::read_rect(j.at("arena"), "arena");

  if (!j.contains("shape")) throw ScenarioError("scenario needs a shape");
  const auto& shape = j.at("shape");
  detail::reject_unknown(shape, {"path", "matrix", "spacing"}, "shape");
  read_opt(shape, "spacing", s.spacing, "shape");
  if (shape.contains("matrix")) {
    read_opt(shape, "matrix", s.shape_text, "shape");
  } else if (shape.contains("path")) {
    read_opt(shape, "path", s.shape_path, "shape");
    const auto path = base_dir / s.shape_path;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read shape file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    s.shape_text = buf.str();
  } else {
    throw ScenarioError("shape needs a path or an inline matrix");
  }

  if (!j.contains("spawn")) throw ScenarioError("scenario needs a spawn section");
  const auto& spawn = j.at("spawn");
  detail::reject_unknown(spawn, {"poses", "region", "min_separation"}, "spawn");
  if (spawn.contains("poses")) {
    for (const auto& p : spawn.at("poses")) {
      if (!p.is_array() || (p.size() != 2 && p.size() != 3)) throw ScenarioError("spawn.poses entries are [x, y, heading?]");
      s.poses.push_back({{p[0].get<double>(), p[1].get<double>()}, p.size() == 3 ? p[2].get<double>() : 0.0});
    }
  }
  if (spawn.contains("region")) {
    SpawnRegion region{detail::read_rect(spawn.at("region"), "spawn.region")};
    read_opt(spawn, "min_separation", region.min_separation, "spawn");
    s.spawn = region;
  }
  if (s.poses.empty() == !s.spawn.has_value()) throw ScenarioError("spawn needs exactly one of poses or region");

  if (j.contains("goal")) s.goal = detail::read_vec(j.at("goal"), "goal");
  if (j.contains("obstacles")) {
    for (const auto& o : j.at("obstacles")) {
      detail::reject_unknown(o, {"circle", "rect"}, "obstacle");
      if (o.contains("circle")) {
        const auto& c = o.at("circle");
        detail::reject_unknown(c, {"center", "radius"}, "circle");
        Circle circle{detail::read_vec(c.at("center"), "circle.center"), 0.0};
        read_opt(c, "radius", circle.radius, "circle");
        s.obstacles.emplace_back(circle);
      } else if (o.contains("rect")) {
        s.obstacles.emplace_back(detail::read_rect(o.at("rect"), "rect"));
      } else {
        throw ScenarioError("obstacle needs circle or rect");
      }
    }
  }
  if (j.contains("forces")) {
    const auto& f = j.at("forces");
    detail::reject_unknown(f, {"k_collision", "r_o", "k_o", "k_goal", "k_target", "c_obs", "m_floor", "sensor_max",
                               "delta_sing", "r_min", "clearance"},
                           "forces");
    read_opt(f, "k_collision", s.force.k_collision, "forces");
    read_opt(f, "r_o", s.force.r_o, "forces");
    read_opt(f, "k_o", s.force.k_o, "forces");
    read_opt(f, "k_goal", s.force.k_goal, "forces");
    read_opt(f, "k_target", s.force.k_target, "forces");
    read_opt(f, "c_obs", s.force.c_obs, "forces");
    read_opt(f, "m_floor", s.force.m_floor, "forces");
    read_opt(f, "sensor_max", s.force.sensor_max, "forces");
    read_opt(f, "delta_sing", s.force.delta_sing, "forces");
    read_opt(f, "r_min", s.force.r_min, "forces");
    read_opt(f, "clearance", s.force.clearance, "forces");
  }
  if (j.contains("kinematics")) {
    const auto& k = j.at("kinematics");
    detail::reject_unknown(k, {"dt", "v_max", "omega_max", "bot_radius"}, "kinematics");
    read_opt(k, "dt", s.kinematics.dt, "kinematics");
    read_opt(k, "v_max", s.kinematics.v_max, "kinematics");
    read_opt(k, "omega_max", s.kinematics.omega_max, "kinematics");
    read_opt(k, "bot_radius", s.bot_radius, "kinematics");
  }
  read_opt(j, "comm_radius", s.comm_radius, "scenario");
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    detail::reject_unknown(p, {"settle_ticks", "ready_ticks", "clear_ticks", "reach_tolerance", "hold_tolerance",
                               "heading_tolerance", "yield_radius", "parent_radius", "rank_quantum", "mask_range",
                               "goal_tolerance", "large_obstacle_sensors", "wall_trigger", "wall_standoff", "wall_band",
                               "wall_radial_gain", "wall_speed"},
                           "protocol");
    auto& pr = s.protocol;
    read_opt(p, "settle_ticks", pr.settle_ticks, "protocol");
    read_opt(p, "ready_ticks", pr.ready_ticks, "protocol");
    read_opt(p, "clear_ticks", pr.clear_ticks, "protocol");
    read_opt(p, "reach_tolerance", pr.reach_tolerance, "protocol");
    read_opt(p, "hold_tolerance", pr.hold_tolerance, "protocol");
    read_opt(p, "heading_tolerance", pr.heading_tolerance, "protocol");
    read_opt(p, "yield_radius", pr.yield_radius, "protocol");
    read_opt(p, "parent_radius", pr.parent_radius, "protocol");
    read_opt(p, "rank_quantum", pr.rank_quantum, "protocol");
    read_opt(p, "mask_range", pr.mask_range, "protocol");
    read_opt(p, "goal_tolerance", pr.goal_tolerance, "protocol");
    read_opt(p, "large_obstacle_sensors", pr.large_obstacle_sensors, "protocol");
    read_opt(p, "wall_trigger", pr.wall_trigger, "protocol");
    read_opt(p, "wall_standoff", pr.wall.standoff, "protocol");
    read_opt(p, "wall_band", pr.wall.band, "protocol");
    read_opt(p, "wall_radial_gain", pr.wall.radial_gain, "protocol");
    if (p.contains("wall_speed")) {
      read_opt(p, "wall_speed", pr.wall.speed, "protocol");
    } else {
      pr.wall.speed = s.kinematics.v_max;
    }
  } else {
    s.protocol.wall.speed = s.kinematics.v_max;
  }
  read_opt(j, "max_ticks", s.max_ticks, "scenario");
  read_opt(j, "seed", s.seed, "scenario");
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

/// Checks cross-field invariants and returns the compiled shape table.
inline ShapeTable validate_scenario(const Scenario& s) {
  ShapeMatrix matrix;
  try {
    matrix = parse_shape_matrix(s.shape_text);
  } catch (const ShapeError& e) {
    throw ScenarioError(std::string("shape: ") + e.what());
  }
  if (!(s.spacing > 0.0)) throw ScenarioError("spacing must be positive");
  if (!(s.arena.min.x < s.arena.max.x && s.arena.min.y < s.arena.max.y)) throw ScenarioError("arena is empty");
  if (!s.force.valid()) throw ScenarioError("force parameters must be strictly positive");
  if (!(s.kinematics.dt > 0.0 && s.kinematics.v_max > 0.0 && s.kinematics.omega_max > 0.0)) {
    throw ScenarioError("kinematics must be strictly positive");
  }
  if (!(s.bot_radius > 0.0 && s.comm_radius > 0.0)) throw ScenarioError("radii must be positive");
  if (s.max_ticks <= 0) throw ScenarioError("max_ticks must be positive");
  for (const auto& o : s.obstacles) {
    if (!valid_obstacle(o)) throw ScenarioError("obstacle has non-positive extent");
  }
  if (!s.poses.empty() && static_cast<int>(s.poses.size()) != matrix.size()) {
    throw ScenarioError("scenario has " + std::to_string(s.poses.size()) + " bots but the shape needs " +
                        std::to_string(matrix.size()));
  }
  if (s.spawn) {
    const auto& r = s.spawn->region;
    if (!(r.min.x < r.max.x && r.min.y < r.max.y)) throw ScenarioError("spawn region is empty");
  }
  return build_shape_table(matrix, s.spacing);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using detail::vec_json;
  nlohmann::json j;
  j["arena"] = {{"min", vec_json(s.arena.min)}, {"max", vec_json(s.arena.max)}};
  j["shape"] = {{"matrix", s.shape_text}, {"spacing", s.spacing}};
  if (s.spawn) {
    j["spawn"] = {{"region", {{"min", vec_json(s.spawn->region.min)}, {"max", vec_json(s.spawn->region.max)}}},
                  {"min_separation", s.spawn->min_separation}};
  } else {
    auto poses = nlohmann::json::array();
    for (const auto& p : s.poses) poses.push_back({p.position.x, p.position.y, p.heading});
    j["spawn"] = {{"poses", poses}};
  }
  j["goal"] = vec_json(s.goal);
  auto obstacles = nlohmann::json::array();
  for (const auto& o : s.obstacles) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      obstacles.push_back({{"circle", {{"center", vec_json(c->center)}, {"radius", c->radius}}}});
    } else {
      const auto& r = std::get<AxisAlignedRect>(o);
      obstacles.push_back({{"rect", {{"min", vec_json(r.min)}, {"max", vec_json(r.max)}}}});
    }
  }
  j["obstacles"] = obstacles;
  const auto& f = s.force;
  j["forces"] = {{"k_collision", f.k_collision}, {"r_o", f.r_o},         {"k_o", f.k_o},
                 {"k_goal", f.k_goal},           {"k_target", f.k_target}, {"c_obs", f.c_obs},
                 {"m_floor", f.m_floor},         {"sensor_max", f.sensor_max}, {"delta_sing", f.delta_sing},
                 {"r_min", f.r_min},             {"clearance", f.clearance}};
  j["kinematics"] = {{"dt", s.kinematics.dt}, {"v_max", s.kinematics.v_max}, {"omega_max", s.kinematics.omega_max},
                     {"bot_radius", s.bot_radius}};
  j["comm_radius"] = s.comm_radius;
  const auto& p = s.protocol;
  j["protocol"] = {{"settle_ticks", p.settle_ticks},
                   {"ready_ticks", p.ready_ticks},
                   {"clear_ticks", p.clear_ticks},
                   {"reach_tolerance", p.reach_tolerance},
                   {"hold_tolerance", p.hold_tolerance},
                   {"heading_tolerance", p.heading_tolerance},
                   {"yield_radius", p.yield_radius},
                   {"parent_radius", p.parent_radius},
                   {"rank_quantum", p.rank_quantum},
                   {"mask_range", p.mask_range},
                   {"goal_tolerance", p.goal_tolerance},
                   {"large_obstacle_sensors", p.large_obstacle_sensors},
                   {"wall_trigger", p.wall_trigger},
                   {"wall_standoff", p.wall.standoff},
                   {"wall_band", p.wall.band},
                   {"wall_radial_gain", p.wall.radial_gain},
                   {"wall_speed", p.wall.speed}};
  j["max_ticks"] = s.max_ticks;
  j["seed"] = s.seed;
  return j;
}

}  // namespace swarmform

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
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "swarmform/forces.hpp"
#include "swarmform/geometry.hpp"
#include "swarmform/messages.hpp"
#include "swarmform/protocol_types.hpp"
#include "swarmform/sensing.hpp"
#include "swarmform/shape.hpp"
#include "swarmform/stigmergy.hpp"

namespace swarmform {

/// Protocol timing and tolerances shared by every bot.
struct ProtocolParams {
  int settle_ticks{0};        // seed-election window W; 0 selects 2 * n
  int ready_ticks{100};       // T_ready
  int clear_ticks{10};        // H, consecutive clear ticks before leaving wall-following
  double reach_tolerance{0.01};    // fraction of spacing
  double hold_tolerance{0.02};     // fraction of spacing; re-servo threshold once reached
  double heading_tolerance{0.05};  // rad
  double yield_radius{0.9};        // fraction of spacing
  double parent_radius{1.5};       // fraction of spacing
  double rank_quantum{0.5};        // fraction of spacing used to bucket longitudinal rank
  double mask_range{1.1};          // m; neighbors farther than this never mask a sensor
  double goal_tolerance{0.05};     // m
  int large_obstacle_sensors{3};
  double wall_trigger{0.6};        // m; a forward detection nearer than this blocks the path
  WallFollowParams wall{};

  int settle_window(int n) const { return settle_ticks > 0 ? settle_ticks : 2 * n; }
};

/// Boundary and leadership roles. A bot may hold several (n = 1 holds all).
struct Roles {
  bool leader{false};
  bool leftmost{false};
  bool rightmost{false};

  Role primary() const {
    if (leader) return Role::kLeader;
    if (leftmost) return Role::kLeftmost;
    if (rightmost) return Role::kRightmost;
    return Role::kNone;
  }
  friend bool operator==(const Roles&, const Roles&) = default;
};

/// One bot's complete protocol state.
struct BotMemory {
  BotId id{0};
  BotState state{BotState::kSearching};
  int label{-1};
  std::vector<int> label_list;
  std::map<int, int> offer_parent;  // offered label -> label of the bot that offered it
  int slot_parent_label{-1};        // whose shape-table row places this bot
  std::optional<Vec2> target;
  std::optional<BotId> parent;      // formation parent, from Ready on
  Roles roles;
  Vec2 counter_force;               // stored reference force, already turned by pi
  Vec2 reference_offset;            // parent position minus own position when the parent was chosen
  Vec2 last_parent_position;
  StigmergyStore store;
  TransitMode mode{TransitMode::kNone};
  WallSide wall_side{WallSide::kLeft};
  double best_distance{std::numeric_limits<double>::infinity()};
  BotId best_id{0};
  bool done_published{false};
  bool rank_published{false};
  int ticks{0};        // ticks since start
  int ready_timer{0};  // ticks spent in Ready
  int clear_timer{0};  // consecutive clear ticks while wall-following
  std::vector<Vec2> obstacle_hits;  // world-frame echo points of the last unmasked detection
  int hits_age{0};                  // ticks since obstacle_hits was refreshed

  explicit BotMemory(BotId bot_id = 0) : id(bot_id), store(bot_id), best_id(bot_id) {}
};

/// A neighbor as reconstructed from its last Status broadcast.
struct NeighborStatus {
  BotId id{0};
  Vec2 position;
  double heading{0.0};
  int label{-1};
  BotState state{BotState::kSearching};
  double origin_distance{0.0};
  double best_distance{0.0};
  BotId best_id{0};
  double distance{0.0};  // from self
  double azimuth{0.0};   // world-frame bearing from self
};

/// What a bot perceives this tick. The goal is present only for the leader.
struct LocalObservation {
  Pose pose;
  SensorReadings readings{};
  std::optional<Vec2> goal;
};

struct MotionCommand {
  Vec2 force;
  std::optional<double> rotate_to;  // pure rotation when set
};

struct StepResult {
  BotMemory memory;
  std::vector<Message> outbox;
  MotionCommand command;
  ForceComponents forces;
  double f_net{0.0};
  double f_obs{0.0};
  double f_coll{0.0};
};

struct ControllerConfig {
  const ShapeTable* table{nullptr};
  ForceParams force{};
  ProtocolParams protocol{};
  Kinematics kinematics{};
};

// ---------------------------------------------------------------------------
// Individual protocol operations
// ---------------------------------------------------------------------------

/// Folds heard seed candidates into the flooded minimum and, once the settle
/// window has closed, makes this bot the seed if it is the global minimum.
/// Returns true when this bot became the seed.
inline bool elect_seed(BotMemory& mem, double own_distance, std::span<const NeighborStatus> neighbors,
                       int settle_window) {
  if (mem.state != BotState::kSearching) return false;
  auto best = std::make_tuple(mem.best_distance, mem.best_id);
  best = std::min(best, std::make_tuple(own_distance, mem.id));
  for (const auto& nb : neighbors) {
    best = std::min(best, std::make_tuple(nb.best_distance, nb.best_id));
    best = std::min(best, std::make_tuple(nb.origin_distance, nb.id));
  }
  std::tie(mem.best_distance, mem.best_id) = best;
  if (mem.ticks < settle_window || mem.best_id != mem.id) return false;
  const bool seed_taken = std::any_of(neighbors.begin(), neighbors.end(), [](const NeighborStatus& nb) {
    return nb.state != BotState::kSearching && nb.label == 0;
  });
  if (seed_taken) return false;
  mem.label = 0;
  mem.state = BotState::kMoving;
  mem.slot_parent_label = -1;
  return true;
}

/// Labels claimed by heard bots that are past Searching.
inline std::vector<int> claimed_labels(std::span<const NeighborStatus> neighbors) {
  std::vector<int> out;
  for (const auto& nb : neighbors) {
    if (nb.state != BotState::kSearching && nb.label >= 0) out.push_back(nb.label);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Appends offered labels, strikes claimed ones to -1 and takes the last
/// remaining label. Offers must already be in delivery order.
inline bool collect_labels(BotMemory& mem, std::span<const LabelOfferMsg> offers, std::span<const int> claimed) {
  if (mem.state != BotState::kSearching) return false;
  for (const auto& offer : offers) {
    for (int label : offer.labels) {
      if (std::find(mem.label_list.begin(), mem.label_list.end(), label) != mem.label_list.end()) continue;
      mem.label_list.push_back(label);
      mem.offer_parent.try_emplace(label, offer.offerer_label);
    }
  }
  for (int& entry : mem.label_list) {
    if (entry >= 0 && std::binary_search(claimed.begin(), claimed.end(), entry)) entry = -1;
  }
  auto last = std::find_if(mem.label_list.rbegin(), mem.label_list.rend(), [](int v) { return v >= 0; });
  if (last == mem.label_list.rend()) return false;
  mem.label = *last;
  auto parent = mem.offer_parent.find(mem.label);
  mem.slot_parent_label = parent != mem.offer_parent.end() ? parent->second : -1;
  mem.state = BotState::kMoving;
  mem.target.reset();
  return true;
}

/// Unclaimed shape-table neighbors of the bot's own slot. Only settled bots
/// offer, so every placement chain ends at the seed.
inline LabelOfferMsg offer_labels(const BotMemory& mem, const ShapeTable& table, std::span<const int> claimed) {
  LabelOfferMsg offer{mem.label, {}};
  if (mem.label < 0) return offer;
  if (mem.state != BotState::kReached && mem.state != BotState::kReady) return offer;
  for (const auto& ref : table.row(mem.label)) {
    if (!std::binary_search(claimed.begin(), claimed.end(), ref.label)) offer.labels.push_back(ref.label);
  }
  return offer;
}

enum class ConflictOutcome { kKeep, kRevert };

/// Highest id among the claimants of one label keeps it.
inline ConflictOutcome resolve_conflict(BotMemory& mem, std::span<const BotId> claimants) {
  const bool outranked =
      std::any_of(claimants.begin(), claimants.end(), [&](BotId other) { return other > mem.id; });
  if (!outranked) return ConflictOutcome::kKeep;
  for (int& entry : mem.label_list) {
    if (entry == mem.label) entry = -1;
  }
  mem.label = -1;
  mem.slot_parent_label = -1;
  mem.target.reset();
  mem.state = BotState::kSearching;
  return ConflictOutcome::kRevert;
}

/// Slot of `label` as placed by the bot holding `parent_label` at `parent_position`.
inline std::optional<Vec2> target_position(Vec2 parent_position, int parent_label, int label, const ShapeTable& table) {
  if (parent_label < 0 || parent_label >= table.size()) return std::nullopt;
  const NeighborRef* ref = table.find(parent_label, label);
  if (ref == nullptr) return parent_position + table.offset(parent_label, label);
  return parent_position + polar(ref->distance, ref->angle);
}

/// Alignment and completion step of a Reached bot. Returns a heading to turn
/// to, or nothing when aligned (after which the completion key is published
/// and the barrier is checked).
inline std::optional<double> align_and_complete(BotMemory& mem, double heading, std::size_t n,
                                                double heading_tolerance) {
  if (mem.state != BotState::kReached) return std::nullopt;
  const auto reference = mem.store.get(stig_keys::kReferenceHeading);
  if (!reference) return std::nullopt;
  if (std::abs(angle_diff(heading, *reference)) > heading_tolerance) return *reference;
  if (!mem.done_published) {
    mem.store.put(stig_keys::for_bot(stig_keys::kDone, mem.id), 1.0);
    mem.done_published = true;
  }
  if (barrier_reached(mem.store, n)) {
    mem.state = BotState::kReady;
    mem.ready_timer = 0;
  }
  return std::nullopt;
}

/// Projections of a position on the goal axis and on the axis to its right.
struct RankCoordinates {
  double longitudinal{0.0};
  double lateral{0.0};
};

inline RankCoordinates rank_coordinates(Vec2 position, double goal_azimuth) {
  const Vec2 forward = unit_vector(goal_azimuth);
  const Vec2 right{std::sin(goal_azimuth), -std::cos(goal_azimuth)};
  return {dot(position, forward), dot(position, right)};
}

/// Total order used for leadership and parent choice: bucketed distance
/// behind the front-most bot (smaller is better), then higher id.
struct RankKey {
  long bucket{0};
  BotId id{0};
  friend bool operator<(const RankKey& a, const RankKey& b) {
    if (a.bucket != b.bucket) return a.bucket > b.bucket;
    return a.id < b.id;
  }
};

inline long rank_bucket(double longitudinal, double front, double quantum) {
  return std::lround((front - longitudinal) / quantum);
}

/// Roles from the converged longitudinal and lateral tables.
inline Roles assign_roles_and_leader(BotId self, std::span<const std::pair<BotId, double>> longitudinal,
                                     std::span<const std::pair<BotId, double>> lateral, double quantum) {
  Roles roles;
  if (longitudinal.empty() || lateral.empty()) return roles;
  double front = longitudinal.front().second;
  for (const auto& [id, lon] : longitudinal) front = std::max(front, lon);
  RankKey best{rank_bucket(longitudinal.front().second, front, quantum), longitudinal.front().first};
  for (const auto& [id, lon] : longitudinal) best = std::max(best, RankKey{rank_bucket(lon, front, quantum), id});
  roles.leader = best.id == self;

  auto extreme = [&](bool want_min) {
    auto pick = lateral.front();
    for (const auto& entry : lateral) {
      const bool better = want_min ? entry.second < pick.second : entry.second > pick.second;
      if (better || (entry.second == pick.second && entry.first > pick.first)) pick = entry;
    }
    return pick.first;
  };
  roles.leftmost = extreme(true) == self;
  roles.rightmost = extreme(false) == self;
  return roles;
}

/// Follows parent links from `start`; true if `needle` is on the chain.
inline bool chain_contains(const std::map<BotId, BotId>& parents, BotId start, BotId needle) {
  BotId cur = start;
  for (std::size_t steps = 0; steps <= parents.size(); ++steps) {
    if (cur == needle) return true;
    auto it = parents.find(cur);
    if (it == parents.end()) return false;
    cur = it->second;
  }
  return true;  // a loop is never a valid chain
}

struct ParentCandidate {
  BotId id{0};
  double longitudinal{0.0};
  double distance{0.0};
};

/// Picks the formation parent: ahead of self in rank order, preferring the
/// front-most, then the nearest, then the lowest id, skipping any candidate
/// whose ancestor chain already passes through self.
inline std::optional<BotId> choose_parent(BotId self, double self_longitudinal, double front,
                                          std::span<const ParentCandidate> candidates,
                                          const std::map<BotId, BotId>& parents, double quantum, double radius) {
  const RankKey mine{rank_bucket(self_longitudinal, front, quantum), self};
  std::vector<std::pair<RankKey, ParentCandidate>> ahead;
  for (const auto& c : candidates) {
    const RankKey key{rank_bucket(c.longitudinal, front, quantum), c.id};
    if (mine < key) ahead.emplace_back(key, c);
  }
  auto order = [](const auto& a, const auto& b) {
    return std::make_tuple(a.first.bucket, a.second.distance, a.second.id) <
           std::make_tuple(b.first.bucket, b.second.distance, b.second.id);
  };
  std::sort(ahead.begin(), ahead.end(), order);
  for (bool restrict_radius : {true, false}) {
    for (const auto& [key, c] : ahead) {
      if (restrict_radius && c.distance > radius) continue;
      if (chain_contains(parents, c.id, self)) continue;
      return c.id;
    }
  }
  return std::nullopt;
}

/// Transit behavior from the leader's arrival flag and the obstacle class.
/// `forward_blocked` is true when a forward sensor sees the obstacle close by.
/// Both avoidance modes persist until the obstacle has been gone for
/// `clear_ticks` ticks.
inline TransitMode transit_mode(BotMemory& mem, ObstacleClass cls, bool forward_blocked,
                                std::span<const SensorReading> readings, double sensor_max, int clear_ticks) {
  if (mem.store.contains(stig_keys::kGoalReached)) {
    mem.state = BotState::kDone;
    mem.mode = TransitMode::kStopped;
    return mem.mode;
  }
  if (mem.mode == TransitMode::kWallFollow) {
    mem.clear_timer = forward_blocked ? 0 : mem.clear_timer + 1;
    if (mem.clear_timer < clear_ticks) return mem.mode;
  }
  if (mem.mode == TransitMode::kShrinkAvoid && cls != ObstacleClass::kLarge) {
    mem.clear_timer = cls == ObstacleClass::kNone ? mem.clear_timer + 1 : 0;
    if (mem.clear_timer < clear_ticks) return mem.mode;
  }
  switch (cls) {
    case ObstacleClass::kNone: mem.mode = TransitMode::kFormationHold; break;
    case ObstacleClass::kLarge:
      mem.mode = TransitMode::kShrinkAvoid;
      mem.clear_timer = 0;
      break;
    case ObstacleClass::kSmall:
      if (forward_blocked && mem.mode != TransitMode::kWallFollow) {
        mem.mode = TransitMode::kWallFollow;
        mem.wall_side = choose_wall_side(readings, sensor_max);
        mem.clear_timer = 0;
      } else {
        mem.mode = TransitMode::kFormationHold;
      }
      break;
  }
  return mem.mode;
}

// ---------------------------------------------------------------------------
// Full per-tick transition
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<NeighborStatus> neighbor_statuses(const Pose& self, std::span<const Message> inbox) {
  std::vector<NeighborStatus> out;
  for (const auto& msg : inbox) {
    const auto* s = std::get_if<StatusMsg>(&msg.body);
    if (s == nullptr) continue;
    const Vec2 rel = s->pose.position - self.position;
    out.push_back({msg.sender, s->pose.position, s->pose.heading, s->label, s->state, s->origin_distance,
                   s->best_distance, s->best_id, rel.norm(), rel.angle()});
  }
  return out;
}

inline const NeighborStatus* find_neighbor(std::span<const NeighborStatus> nbs, BotId id) {
  for (const auto& nb : nbs) {
    if (nb.id == id) return &nb;
  }
  return nullptr;
}

/// The bot currently holding `label`, preferring settled holders, then the higher id.
inline const NeighborStatus* holder_of(std::span<const NeighborStatus> nbs, int label) {
  const NeighborStatus* best = nullptr;
  for (const auto& nb : nbs) {
    if (nb.label != label || nb.state == BotState::kSearching) continue;
    if (best == nullptr) {
      best = &nb;
      continue;
    }
    const bool settled = nb.state >= BotState::kReached;
    const bool best_settled = best->state >= BotState::kReached;
    if (std::make_tuple(settled, nb.id) > std::make_tuple(best_settled, best->id)) best = &nb;
  }
  return best;
}

inline std::map<BotId, BotId> parents_table(const StigmergyStore& store) {
  std::map<BotId, BotId> out;
  for (const auto& [id, parent] : store.collect(stig_keys::kParent)) out[id] = static_cast<BotId>(parent);
  return out;
}

}  // namespace detail

/// One lockstep tick of a bot: (memory, observation, inbox) to (memory, outbox, command).
inline StepResult controller_step(BotMemory mem, const LocalObservation& obs, std::span<const Message> inbox,
                                  const ControllerConfig& cfg) {
  const ShapeTable& table = *cfg.table;
  const ForceParams& fp = cfg.force;
  const ProtocolParams& pp = cfg.protocol;
  const auto n = static_cast<std::size_t>(table.size());
  const double spacing = table.spacing();
  const Pose& pose = obs.pose;

  // Inbox: statuses, offers, stigmergy deltas. Already sorted by sender.
  const auto neighbors = detail::neighbor_statuses(pose, inbox);
  std::vector<LabelOfferMsg> offers;
  for (const auto& msg : inbox) {
    if (const auto* o = std::get_if<LabelOfferMsg>(&msg.body)) offers.push_back(*o);
    if (const auto* d = std::get_if<StigmergyMsg>(&msg.body)) mem.store.merge(d->delta);
  }
  const auto claimed = claimed_labels(neighbors);

  StepResult out;
  MotionCommand cmd;
  ForceComponents forces;

  // Collision avoidance is evaluated in every state.
  for (const auto& nb : neighbors) {
    if (nb.distance < fp.r_o) {
      forces.collision += collision_force(nb.distance, nb.azimuth, fp);
      forces.collision_active = true;
    }
  }

  auto slot_force = [&](Vec2 target) { return (target - pose.position) * fp.k_target; };
  auto refresh_target = [&]() {
    if (mem.label == 0) return;
    if (const auto* parent = detail::holder_of(neighbors, mem.slot_parent_label)) {
      mem.target = target_position(parent->position, mem.slot_parent_label, mem.label, table);
    }
  };

  // ---- Searching --------------------------------------------------------
  if (mem.state == BotState::kSearching) {
    const bool became_seed = elect_seed(mem, pose.position.norm(), neighbors, pp.settle_window(static_cast<int>(n)));
    if (became_seed) {
      // The seed's slot is the shared origin; the shape grows around it.
      mem.target = Vec2{};
      mem.store.put(std::string(stig_keys::kReferenceHeading), pose.heading);
    } else if (mem.ticks >= pp.settle_window(static_cast<int>(n))) {
      collect_labels(mem, offers, claimed);
    }
    if (mem.state == BotState::kSearching && mem.ticks >= pp.settle_window(static_cast<int>(n))) {
      // Give way to bots that are forming the shape; drift home if none is heard.
      const double yield = pp.yield_radius * spacing;
      bool hears_shape = false;
      for (const auto& nb : neighbors) {
        if (nb.state == BotState::kSearching) continue;
        hears_shape = true;
        if (nb.distance < yield && nb.distance > 0.0) {
          forces.target -= unit_vector(nb.azimuth) * (fp.k_target * (yield - nb.distance));
        }
      }
      if (!hears_shape) forces.target = -pose.position * fp.k_target;
    }
  }

  // ---- Moving -----------------------------------------------------------
  if (mem.state == BotState::kMoving) {
    std::vector<BotId> claimants;
    bool lost_to_settled = false;
    for (const auto& nb : neighbors) {
      if (nb.label != mem.label || nb.state == BotState::kSearching) continue;
      if (nb.state >= BotState::kReached) lost_to_settled = true;
      claimants.push_back(nb.id);
    }
    if (lost_to_settled) claimants.push_back(std::numeric_limits<BotId>::max());
    if (!claimants.empty() && resolve_conflict(mem, claimants) == ConflictOutcome::kRevert) {
      // Back to searching; this tick's offers are reconsidered next tick.
    } else {
      refresh_target();
      if (mem.target) {
        forces.target = slot_force(*mem.target);
        if (distance(pose.position, *mem.target) <= pp.reach_tolerance * spacing) mem.state = BotState::kReached;
      }
    }
  }

  // ---- Reached / Ready: hold the slot --------------------------------------
  bool holding = false;
  if (mem.state == BotState::kReached || mem.state == BotState::kReady) {
    refresh_target();
    if (mem.target && distance(pose.position, *mem.target) > pp.hold_tolerance * spacing) {
      forces.target = slot_force(*mem.target);
      holding = true;
    }
  }

  if (mem.state == BotState::kReached && !holding) {
    if (auto turn = align_and_complete(mem, pose.heading, n, pp.heading_tolerance)) cmd.rotate_to = *turn;
  }

  // ---- Ready: ranks, roles, parents, timeout --------------------------------
  if (mem.state == BotState::kReady) {
    const auto goal_azimuth = mem.store.get(stig_keys::kGoalAzimuth).value_or(0.0);
    if (!mem.rank_published) {
      const auto rc = rank_coordinates(pose.position, goal_azimuth);
      mem.store.put(stig_keys::for_bot(stig_keys::kLongitudinal, mem.id), rc.longitudinal);
      mem.store.put(stig_keys::for_bot(stig_keys::kLateral, mem.id), rc.lateral);
      mem.rank_published = true;
    }
    const auto lon = mem.store.collect(stig_keys::kLongitudinal);
    const auto lat = mem.store.collect(stig_keys::kLateral);
    const double quantum = pp.rank_quantum * spacing;
    if (lon.size() == n && lat.size() == n) {
      mem.roles = assign_roles_and_leader(mem.id, lon, lat, quantum);
      if (!mem.roles.leader && !mem.parent) {
        double front = lon.front().second;
        double mine = 0.0;
        std::map<BotId, double> lon_of;
        for (const auto& [id, v] : lon) {
          front = std::max(front, v);
          lon_of[id] = v;
          if (id == mem.id) mine = v;
        }
        std::vector<ParentCandidate> candidates;
        for (const auto& nb : neighbors) {
          auto it = lon_of.find(nb.id);
          if (it != lon_of.end()) candidates.push_back({nb.id, it->second, nb.distance});
        }
        const auto parents = detail::parents_table(mem.store);
        if (auto parent = choose_parent(mem.id, mine, front, candidates, parents, quantum, pp.parent_radius * spacing)) {
          const auto* nb = detail::find_neighbor(neighbors, *parent);
          mem.parent = *parent;
          mem.store.put(stig_keys::for_bot(stig_keys::kParent, mem.id), static_cast<double>(*parent));
          mem.reference_offset = nb->position - pose.position;
          mem.last_parent_position = nb->position;
          mem.counter_force = reference_counter_force(nb->distance, nb->azimuth, fp);
        }
      }
    }
    if (!holding && std::abs(angle_diff(pose.heading, goal_azimuth)) > pp.heading_tolerance) {
      cmd.rotate_to = goal_azimuth;
    }
    ++mem.ready_timer;
    bool parent_left = false;
    if (mem.parent) {
      const auto* parent = detail::find_neighbor(neighbors, *mem.parent);
      parent_left = parent != nullptr && parent->state == BotState::kTransit;
    }
    if ((mem.ready_timer >= pp.ready_ticks || parent_left) && (mem.roles.leader || mem.parent)) {
      mem.state = BotState::kTransit;
      mem.mode = TransitMode::kFormationHold;
      cmd.rotate_to.reset();
    }
  }

  // ---- Transit ----------------------------------------------------------------
  double driving = 0.0;
  if (mem.state == BotState::kTransit) {
    // Neighbors close enough to be what a sensor is seeing mask that sensor.
    std::vector<double> masks;
    for (const auto& nb : neighbors) {
      if (nb.distance <= pp.mask_range) masks.push_back(angle_diff(nb.azimuth, pose.heading));
    }
    SensorReadings unmasked = obs.readings;
    bool forward_blocked = false;
    for (auto& r : unmasked) {
      if (r.distance < fp.sensor_max && sensor_masked(r.angle, masks, fp)) r.distance = fp.sensor_max;
      if (r.distance < pp.wall_trigger && std::abs(r.angle) < kPi / 2 - 1e-9) forward_blocked = true;
    }
    const auto cls = classify_obstacle(unmasked, fp.sensor_max, pp.large_obstacle_sensors);

    if (mem.roles.leader) {
      if (obs.goal) {
        forces.goal = goal_force(*obs.goal, pose.position, fp);
        if (distance(*obs.goal, pose.position) <= pp.goal_tolerance) {
          mem.store.put(std::string(stig_keys::kGoalReached), 1.0);
        }
      }
      driving = forces.goal.norm();
      if (mem.store.contains(stig_keys::kGoalReached)) {
        mem.state = BotState::kDone;
        mem.mode = TransitMode::kStopped;
      } else {
        mem.mode = cls == ObstacleClass::kNone ? TransitMode::kFormationHold : TransitMode::kShrinkAvoid;
      }
    } else {
      if (const auto* parent = detail::find_neighbor(neighbors, *mem.parent)) mem.last_parent_position = parent->position;
      const Vec2 to_parent = mem.last_parent_position - pose.position;
      const Vec2 f_a = attract_force(to_parent.norm(), to_parent.angle(), fp);
      forces.formation = net_formation_force(f_a, mem.counter_force);
      transit_mode(mem, cls, forward_blocked, unmasked, fp.sensor_max, pp.clear_ticks);
      if (mem.mode == TransitMode::kWallFollow) {
        forces.wall = rotate(wall_follow_local(unmasked, mem.wall_side, fp.sensor_max, pp.wall), pose.heading);
        driving = forces.wall.norm();
      } else {
        driving = forces.formation.norm();
      }
    }
    if (mem.state == BotState::kTransit) {
      // Echoes are remembered briefly so that turning away does not erase them.
      std::vector<Vec2> hits;
      for (const auto& r : unmasked) {
        if (r.distance < fp.sensor_max) hits.push_back(pose.position + unit_vector(pose.heading + r.angle) * r.distance);
      }
      if (!hits.empty()) {
        mem.obstacle_hits = std::move(hits);
        mem.hits_age = 0;
      } else if (++mem.hits_age > pp.clear_ticks) {
        mem.obstacle_hits.clear();
      }
      std::vector<SensorReading> echoes;
      for (const Vec2& h : mem.obstacle_hits) {
        const Vec2 d = h - pose.position;
        echoes.push_back({angle_diff(d.angle(), pose.heading), d.norm()});
      }
      forces.obstacle = obstacle_force(echoes, {}, driving, pose.heading, fp);
      if (mem.mode != TransitMode::kWallFollow) {
        Vec2 interior;
        for (const auto& nb : neighbors) interior += nb.position - pose.position;
        const Vec2 drive = mem.roles.leader ? forces.goal : forces.formation;
        forces.deflection = deflect_along_obstacle(drive, forces.obstacle, interior);
      }
    }
  }

  if (mem.state == BotState::kDone) {
    mem.mode = TransitMode::kStopped;
    forces = ForceComponents{};
    cmd.rotate_to.reset();
  }

  cmd.force = compose_total(mem.state, mem.mode, mem.roles.leader, forces);
  if (forces.collision_active) cmd.rotate_to.reset();

  // Trace magnitudes.
  if (mem.state == BotState::kTransit) {
    out.f_net = mem.roles.leader ? forces.goal.norm() : forces.formation.norm();
  } else if (mem.state == BotState::kReady && mem.parent) {
    if (const auto* parent = detail::find_neighbor(neighbors, *mem.parent)) {
      const Vec2 to_parent = parent->position - pose.position;
      out.f_net = net_formation_force(attract_force(to_parent.norm(), to_parent.angle(), fp), mem.counter_force).norm();
    }
  }
  out.f_obs = forces.obstacle.norm();
  out.f_coll = forces.collision.norm();

  // Outbox.
  StatusMsg status{pose, mem.label, mem.state, pose.position.norm(), mem.best_distance, mem.best_id};
  out.outbox.push_back({mem.id, status});
  if (mem.label >= 0) {
    auto offer = offer_labels(mem, table, claimed);
    if (!offer.labels.empty()) out.outbox.push_back({mem.id, std::move(offer)});
  }
  for (auto& delta : mem.store.digest()) out.outbox.push_back({mem.id, StigmergyMsg{std::move(delta)}});

  ++mem.ticks;
  out.command = cmd;
  out.forces = forces;
  out.memory = std::move(mem);
  return out;
}

}  // namespace swarmform

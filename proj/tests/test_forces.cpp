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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "force_properties.hpp"
#include "swarmform/forces.hpp"

namespace swarmform {
namespace {

ForceParams unit_params() {
  ForceParams p;
  p.k_collision = 1.0;
  p.r_o = 1.0;
  p.k_o = 1.0;
  p.k_goal = 1.0;
  return p;
}

void expect_vec(Vec2 got, Vec2 want, double tol = 1e-12) {
  EXPECT_NEAR(got.x, want.x, tol);
  EXPECT_NEAR(got.y, want.y, tol);
}

TEST(CollisionForce, Examples) {
  const auto p = unit_params();
  expect_vec(collision_force(0.5, 0.0, p), {-4.0, 0.0});
  expect_vec(collision_force(0.5, kPi / 2, p), {0.0, -4.0});
  EXPECT_EQ(collision_force(1.0, 0.3, p), Vec2{});
  EXPECT_EQ(collision_force(1.7, 0.3, p), Vec2{});
}

TEST(CollisionForce, SingularGapIsClamped) {
  auto p = unit_params();
  const Vec2 f = collision_force(1.0 - 1e-9, 0.0, p);
  EXPECT_TRUE(f.finite());
  EXPECT_NEAR(f.x, -1.0 / (p.delta_sing * p.delta_sing), 1e-6);
}

TEST(ReferenceForce, Examples) {
  const auto p = unit_params();
  expect_vec(reference_force(1.0, 0.0, p), {1.0, 0.0});
  expect_vec(reference_counter_force(1.0, 0.0, p), {-1.0, 0.0});
  expect_vec(reference_force(2.0, 0.0, p), {4.0, 0.0});
  expect_vec(reference_force(1.0, kPi, p), {-1.0, 0.0});
}

TEST(GoalForce, Examples) {
  auto p = unit_params();
  expect_vec(goal_force({3.0, -2.0}, {3.0, -2.0}, p), {0.0, 0.0});
  p.k_goal = 2.0;
  expect_vec(goal_force({1.0, 0.0}, {0.0, 0.0}, p), {2.0, 0.0});
  const Vec2 a = goal_force({1.5, 0.2}, {-0.7, 3.0}, p);
  const Vec2 b = goal_force({-0.7, 3.0}, {1.5, 0.2}, p);
  expect_vec(a, -b);
}

TEST(AttractForce, Examples) {
  const auto p = unit_params();
  EXPECT_EQ(attract_force(0.8, 0.4, p), reference_force(0.8, 0.4, p));
  expect_vec(attract_force(0.0, 1.0, p), {0.0, 0.0});
  expect_vec(attract_force(1.5, kPi / 4, p), {2.25 / std::sqrt(2.0), 2.25 / std::sqrt(2.0)});
  EXPECT_NEAR(attract_force(1.5, kPi / 4, p).x, 1.59099, 1e-5);
}

TEST(NetFormationForce, Examples) {
  const auto p = unit_params();
  const Vec2 counter = reference_counter_force(1.0, 0.0, p);
  expect_vec(net_formation_force(attract_force(1.0, 0.0, p), counter), {0.0, 0.0});
  expect_vec(net_formation_force(attract_force(1.1, 0.0, p), counter), {0.21, 0.0});
  EXPECT_NEAR(net_formation_force(attract_force(1.0, kPi, p), counter).norm(), 2.0, 1e-12);
}

TEST(ObstacleForce, Examples) {
  const auto p = ForceParams{};
  SensorReadings clear{};
  for (std::size_t i = 0; i < clear.size(); ++i) clear[i] = {kSensorAngles[i], p.sensor_max};
  expect_vec(obstacle_force_local(clear, {}, 1.0, p), {0.0, 0.0});

  SensorReadings ahead = clear;
  ahead[2].distance = 0.5;
  expect_vec(obstacle_force_local(ahead, {}, 1.0, p), {-2.0, 0.0});

  SensorReadings diagonal = clear;
  diagonal[3].distance = 0.4;
  const std::vector<double> neighbor{kPi / 4};
  expect_vec(obstacle_force_local(diagonal, neighbor, 1.0, p), {0.0, 0.0});
}

TEST(ObstacleForce, ZeroDistanceIsClamped) {
  const auto p = ForceParams{};
  SensorReadings r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = {kSensorAngles[i], p.sensor_max};
  r[2].distance = 0.0;
  const Vec2 f = obstacle_force_local(r, {}, 1.0, p);
  EXPECT_TRUE(f.finite());
  EXPECT_NEAR(f.x, -1.0 / p.r_min, 1e-6);
}

TEST(ObstacleForce, StrengthFollowsDrivingForceWithFloor) {
  ForceParams p;
  EXPECT_DOUBLE_EQ(obstacle_strength(4.0, p), p.c_obs * 4.0);
  EXPECT_DOUBLE_EQ(obstacle_strength(0.0, p), p.c_obs * p.m_floor);
}

TEST(ObstacleForce, RotatesIntoWorldFrame) {
  const auto p = ForceParams{};
  SensorReadings r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = {kSensorAngles[i], p.sensor_max};
  r[2].distance = 0.5;
  // Facing +y, an echo dead ahead pushes towards -y.
  const Vec2 f = obstacle_force(r, {}, 2.0, kPi / 2, p);
  expect_vec(f, {0.0, -obstacle_strength(2.0, p) / 0.5});
}

TEST(ComposeTotal, CollisionOverridesTask) {
  const auto p = ForceParams{};
  ForceComponents f;
  f.collision = collision_force(0.5 * p.r_o, 0.0, p) + collision_force(0.6 * p.r_o, 0.0, p);
  f.collision_active = true;
  f.formation = {3.0, 0.0};  // straight into the neighbors
  f.obstacle = {0.5, 0.0};
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kFormationHold, false, f), f.collision);
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kFormationHold, true, f), f.collision);
}

TEST(ComposeTotal, CollisionKeepsSidewaysTaskPart) {
  const auto p = ForceParams{};
  ForceComponents f;
  f.collision = collision_force(0.5 * p.r_o, 0.0, p);
  f.collision_active = true;
  f.formation = {2.0, 0.7};
  const Vec2 total = compose_total(BotState::kTransit, TransitMode::kFormationHold, false, f);
  // Along the repulsion the output is the repulsion alone.
  EXPECT_DOUBLE_EQ(total.x, f.collision.x);
  EXPECT_DOUBLE_EQ(total.y, 0.7);
}

TEST(ComposeTotal, DoneAndStoppedAreZero) {
  ForceComponents f;
  f.collision = {-3.0, 0.0};
  f.collision_active = true;
  f.formation = {1.0, 1.0};
  EXPECT_EQ(compose_total(BotState::kDone, TransitMode::kStopped, false, f), Vec2{});
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kStopped, true, f), Vec2{});
}

TEST(ComposeTotal, SelectsComponentsByStateAndMode) {
  ForceComponents f;
  f.target = {1.0, 0.0};
  f.goal = {0.0, 2.0};
  f.formation = {0.0, 0.0};
  f.obstacle = {-0.5, 0.0};
  f.wall = {0.0, -1.0};
  EXPECT_EQ(compose_total(BotState::kMoving, TransitMode::kNone, false, f), f.target);
  EXPECT_EQ(compose_total(BotState::kReady, TransitMode::kNone, false, f), f.target);
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kFormationHold, true, f), f.goal + f.obstacle);
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kShrinkAvoid, false, f), f.formation + f.obstacle);
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kWallFollow, false, f), f.wall + f.obstacle);
  // A follower at its reference offset with nothing around is at rest.
  ForceComponents rest;
  EXPECT_EQ(compose_total(BotState::kTransit, TransitMode::kFormationHold, false, rest), Vec2{});
}

TEST(Deflection, RedirectsOnlyTheIntoComponent) {
  const Vec2 obstacle{-1.0, 0.0};  // wall on the +x side
  EXPECT_EQ(deflect_along_obstacle({-1.0, 0.3}, obstacle, {0.0, 1.0}), Vec2{});
  EXPECT_EQ(deflect_along_obstacle({1.0, 0.0}, Vec2{}, {0.0, 1.0}), Vec2{});
  const Vec2 d = deflect_along_obstacle({2.0, 0.0}, obstacle, {0.0, 1.0});
  expect_vec(d, {-2.0, 2.0});
  const Vec2 other_side = deflect_along_obstacle({2.0, 0.0}, obstacle, {0.0, -1.0});
  expect_vec(other_side, {-2.0, -2.0});
}

TEST(ForceProperty, CollisionPointsAway) {
  std::mt19937_64 rng(31);
  const auto r = testing::collision_points_away(rng, 2000);
  EXPECT_EQ(r.cases, 2000);
  EXPECT_EQ(r.failures, 0);
}

TEST(ForceProperty, FormationZeroAtReference) {
  std::mt19937_64 rng(32);
  const auto r = testing::formation_zero_at_reference(rng, 2000);
  EXPECT_EQ(r.failures, 0);
}

TEST(ForceProperty, MaskingIsExact) {
  std::mt19937_64 rng(33);
  const auto r = testing::masking_is_exact(rng, 2000);
  EXPECT_EQ(r.failures, 0);
}

TEST(ForceProperty, ObstacleLinearInStrength) {
  std::mt19937_64 rng(34);
  const auto r = testing::obstacle_linear_in_m(rng, 2000);
  EXPECT_EQ(r.failures, 0);
}

TEST(ForceProperty, GoalLinearInGain) {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 1000; ++i) {
    ForceParams p;
    p.k_goal = testing::uniform(rng, 0.01, 5.0);
    const Vec2 goal{testing::uniform(rng, -9, 9), testing::uniform(rng, -9, 9)};
    const Vec2 pos{testing::uniform(rng, -9, 9), testing::uniform(rng, -9, 9)};
    const double c = testing::uniform(rng, 0.0, 4.0);
    ForceParams q = p;
    q.k_goal = c * p.k_goal;
    const Vec2 a = goal_force(goal, pos, q);
    const Vec2 b = goal_force(goal, pos, p) * c;
    EXPECT_NEAR(a.x, b.x, 1e-12 * (1.0 + a.norm()));
    EXPECT_NEAR(a.y, b.y, 1e-12 * (1.0 + a.norm()));
  }
}

}  // namespace
}  // namespace swarmform

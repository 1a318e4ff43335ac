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

#include <array>
#include <optional>
#include <string_view>

namespace swarmform {

enum class BotState { kSearching, kMoving, kReached, kReady, kTransit, kDone };
enum class Role { kNone, kLeftmost, kRightmost, kLeader };
enum class TransitMode { kNone, kFormationHold, kShrinkAvoid, kWallFollow, kStopped };
enum class ObstacleClass { kNone, kLarge, kSmall };

inline constexpr std::array<std::string_view, 6> kStateNames{"searching", "moving", "reached",
                                                            "ready",     "transit", "done"};
inline constexpr std::array<std::string_view, 4> kRoleNames{"none", "leftmost", "rightmost", "leader"};
inline constexpr std::array<std::string_view, 5> kModeNames{"none", "formation_hold", "shrink_avoid",
                                                           "wall_follow", "stopped"};

inline std::string_view to_string(BotState s) { return kStateNames[static_cast<std::size_t>(s)]; }
inline std::string_view to_string(Role r) { return kRoleNames[static_cast<std::size_t>(r)]; }
inline std::string_view to_string(TransitMode m) { return kModeNames[static_cast<std::size_t>(m)]; }

template <typename E, std::size_t N>
std::optional<E> enum_from_string(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

inline std::optional<BotState> parse_state(std::string_view s) { return enum_from_string<BotState>(kStateNames, s); }
inline std::optional<Role> parse_role(std::string_view s) { return enum_from_string<Role>(kRoleNames, s); }
inline std::optional<TransitMode> parse_mode(std::string_view s) { return enum_from_string<TransitMode>(kModeNames, s); }

/// Lifecycle order is Searching, Moving, Reached, Ready, Transit, Done. Any
/// forward move (several steps may happen within one tick) is legal, and
/// Moving -> Searching is the only regression.
inline bool legal_transition(BotState from, BotState to) {
  if (from == BotState::kMoving && to == BotState::kSearching) return true;
  return static_cast<int>(to) >= static_cast<int>(from);
}

}  // namespace swarmform

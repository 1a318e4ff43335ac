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

#include <variant>
#include <vector>

#include "swarmform/geometry.hpp"
#include "swarmform/protocol_types.hpp"
#include "swarmform/stigmergy.hpp"

namespace swarmform {

/// Periodic self-report. Position and heading are in the arena frame, which
/// every bot shares through its odometry relative to the origin.
struct StatusMsg {
  Pose pose;
  int label{-1};
  BotState state{BotState::kSearching};
  double origin_distance{0.0};
  // Best seed candidate heard so far, flooded until the settle window closes.
  double best_distance{0.0};
  BotId best_id{0};
};

/// Labels adjacent to the sender's slot that are still unclaimed.
struct LabelOfferMsg {
  int offerer_label{-1};
  std::vector<int> labels;
};

struct StigmergyMsg {
  StigmergyDelta delta;
};

struct Message {
  BotId sender{0};
  std::variant<StatusMsg, LabelOfferMsg, StigmergyMsg> body;
};

}  // namespace swarmform

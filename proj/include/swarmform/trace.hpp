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

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "swarmform/protocol_types.hpp"
#include "swarmform/scenario.hpp"
#include "swarmform/stigmergy.hpp"

namespace swarmform {

/// One bot at one tick, exactly the columns of trace.csv.
struct TraceRow {
  int tick{0};
  BotId bot{0};
  double x{0.0};
  double y{0.0};
  double heading{0.0};
  BotState state{BotState::kSearching};
  int label{-1};
  Role role{Role::kNone};
  double f_net{0.0};
  double f_obs{0.0};
  double f_coll{0.0};
  TransitMode mode{TransitMode::kNone};
};

inline constexpr std::string_view kTraceHeader = "tick,bot,x,y,heading,state,label,role,f_net,f_obs,f_coll,mode";

inline std::string format_9g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void append_trace_row(std::string& out, const TraceRow& r) {
  out += std::to_string(r.tick);
  out += ',';
  out += std::to_string(r.bot);
  for (double v : {r.x, r.y, r.heading}) {
    out += ',';
    out += format_9g(v);
  }
  out += ',';
  out += to_string(r.state);
  out += ',';
  out += std::to_string(r.label);
  out += ',';
  out += to_string(r.role);
  for (double v : {r.f_net, r.f_obs, r.f_coll}) {
    out += ',';
    out += format_9g(v);
  }
  out += ',';
  out += to_string(r.mode);
  out += '\n';
}

inline std::string write_trace_csv(const std::vector<TraceRow>& rows) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : rows) append_trace_row(out, r);
  return out;
}

inline std::vector<TraceRow> parse_trace_csv(std::string_view text) {
  std::vector<TraceRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ScenarioError("trace.csv has an unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw ScenarioError("trace.csv line " + std::to_string(line_no) + " has " +
                                            std::to_string(f.size()) + " fields");
    try {
      TraceRow r;
      r.tick = std::stoi(f[0]);
      r.bot = std::stoi(f[1]);
      r.x = std::stod(f[2]);
      r.y = std::stod(f[3]);
      r.heading = std::stod(f[4]);
      auto state = parse_state(f[5]);
      r.label = std::stoi(f[6]);
      auto role = parse_role(f[7]);
      r.f_net = std::stod(f[8]);
      r.f_obs = std::stod(f[9]);
      r.f_coll = std::stod(f[10]);
      auto mode = parse_mode(f[11]);
      if (!state || !role || !mode) throw std::invalid_argument("enum");
      r.state = *state;
      r.role = *role;
      r.mode = *mode;
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ScenarioError("trace.csv line " + std::to_string(line_no) + " is malformed");
    }
  }
  return rows;
}

}  // namespace swarmform

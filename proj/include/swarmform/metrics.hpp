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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmform/shape.hpp"
#include "swarmform/trace.hpp"
#include "swarmform/world.hpp"

namespace swarmform {

enum class SeriesKind { kResidualForce, kFormationError, kStigmergySize };

inline std::string_view to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::kResidualForce: return "residual_force";
    case SeriesKind::kFormationError: return "formation_error";
    case SeriesKind::kStigmergySize: return "stigmergy_size";
  }
  return "";
}

struct SeriesPoint {
  int tick{0};
  double abscissa{0.0};
  double value{0.0};
};

struct MetricsSeries {
  SeriesKind kind{SeriesKind::kResidualForce};
  std::vector<SeriesPoint> points;
};

/// Rows grouped by tick. Input must be tick-major as written by the simulator.
inline std::vector<std::span<const TraceRow>> split_ticks(std::span<const TraceRow> rows) {
  std::vector<std::span<const TraceRow>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i == rows.size() || rows[i].tick != rows[begin].tick) {
      out.push_back(rows.subspan(begin, i - begin));
      begin = i;
    }
  }
  return out;
}

inline bool in_transit(std::span<const TraceRow> tick) {
  return std::any_of(tick.begin(), tick.end(), [](const TraceRow& r) { return r.state == BotState::kTransit; });
}

inline double centroid_projection(std::span<const TraceRow> tick, double goal_azimuth) {
  Vec2 c;
  for (const auto& r : tick) c += Vec2{r.x, r.y};
  c = c / static_cast<double>(tick.size());
  return dot(c, unit_vector(goal_azimuth));
}

/// Sum of |F_net| over the swarm at every transit tick, against the centroid's
/// position along the goal direction.
inline MetricsSeries residual_force_series(std::span<const TraceRow> rows, double goal_azimuth) {
  MetricsSeries s{SeriesKind::kResidualForce, {}};
  for (auto tick : split_ticks(rows)) {
    if (!in_transit(tick)) continue;
    double total = 0.0;
    for (const auto& r : tick) total += r.f_net;
    s.points.push_back({tick.front().tick, centroid_projection(tick, goal_azimuth), total});
  }
  return s;
}

/// Per-bot deviation of the parent offset from its shape reference at one tick.
/// Bots without a parent get no entry.
inline std::map<BotId, double> formation_error_by_bot(std::span<const TraceRow> tick, const ShapeTable& table,
                                                      const std::map<BotId, BotId>& parents) {
  std::map<BotId, const TraceRow*> by_bot;
  for (const auto& r : tick) by_bot[r.bot] = &r;
  std::map<BotId, double> out;
  for (const auto& [child, parent] : parents) {
    auto c = by_bot.find(child);
    auto p = by_bot.find(parent);
    if (c == by_bot.end() || p == by_bot.end()) continue;
    const TraceRow& cr = *c->second;
    const TraceRow& pr = *p->second;
    if (cr.label < 0 || pr.label < 0 || cr.label >= table.size() || pr.label >= table.size()) continue;
    const Vec2 actual = Vec2{cr.x, cr.y} - Vec2{pr.x, pr.y};
    const Vec2 reference = table.offset(pr.label, cr.label);
    out[child] = (actual - reference).norm();
  }
  return out;
}

/// Mean formation error over non-leader bots, per transit tick.
inline MetricsSeries formation_error_series(std::span<const TraceRow> rows, const ShapeTable& table,
                                            const std::map<BotId, BotId>& parents, double goal_azimuth) {
  MetricsSeries s{SeriesKind::kFormationError, {}};
  for (auto tick : split_ticks(rows)) {
    if (!in_transit(tick)) continue;
    const auto errors = formation_error_by_bot(tick, table, parents);
    if (errors.empty()) continue;
    double sum = 0.0;
    for (const auto& [id, e] : errors) sum += e;
    s.points.push_back({tick.front().tick, centroid_projection(tick, goal_azimuth), sum / static_cast<double>(errors.size())});
  }
  return s;
}

/// Smallest completion-set size over all replicas, per tick.
inline MetricsSeries stigmergy_size_series(std::span<const TickSummary> ticks) {
  MetricsSeries s{SeriesKind::kStigmergySize, {}};
  for (const auto& t : ticks) s.points.push_back({t.tick, static_cast<double>(t.tick), static_cast<double>(t.completion_min)});
  return s;
}

inline constexpr std::string_view kMetricsHeader = "kind,abscissa,value";

inline std::string write_metrics_csv(std::span<const MetricsSeries> series) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += to_string(s.kind);
      out += ',';
      out += format_9g(p.abscissa);
      out += ',';
      out += format_9g(p.value);
      out += '\n';
    }
  }
  return out;
}

inline std::string write_parents_csv(const std::map<BotId, BotId>& parents) {
  std::string out = "bot,parent\n";
  for (const auto& [bot, parent] : parents) out += std::to_string(bot) + ',' + std::to_string(parent) + '\n';
  return out;
}

inline std::map<BotId, BotId> parse_parents_csv(std::string_view text) {
  std::map<BotId, BotId> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "bot,parent") throw ScenarioError("parents.csv has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ScenarioError("parents.csv line is malformed: " + line);
    try {
      out[std::stoi(line.substr(0, comma))] = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ScenarioError("parents.csv line is malformed: " + line);
    }
  }
  return out;
}

/// Series written to metrics.csv; the formation error needs the shape and parents.
inline std::vector<MetricsSeries> standard_metrics(std::span<const TraceRow> rows, double goal_azimuth,
                                                   const ShapeTable* table, const std::map<BotId, BotId>* parents) {
  std::vector<MetricsSeries> out{residual_force_series(rows, goal_azimuth)};
  if (table != nullptr && parents != nullptr) out.push_back(formation_error_series(rows, *table, *parents, goal_azimuth));
  return out;
}

inline double series_peak(const MetricsSeries& s) {
  double peak = 0.0;
  for (const auto& p : s.points) peak = std::max(peak, p.value);
  return peak;
}

inline nlohmann::json run_summary(const RunResult& r, double peak_residual_force) {
  nlohmann::json j;
  nlohmann::json states = nlohmann::json::object();
  for (const auto& mem : r.final_memory) states[std::to_string(mem.id)] = std::string(to_string(mem.state));
  j["final_states"] = states;
  j["ticks_to_formation"] = r.formation_tick ? nlohmann::json(*r.formation_tick) : nlohmann::json(nullptr);
  j["ticks_total"] = r.ticks_total;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["min_bot_clearance"] = finite_or_null(r.min_bot_clearance);
  j["min_obstacle_clearance"] = finite_or_null(r.min_obstacle_clearance);
  j["peak_residual_force"] = peak_residual_force;
  return j;
}

}  // namespace swarmform

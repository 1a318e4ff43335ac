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

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "swarmform/cli.hpp"

namespace swarmform {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios{SWARMFORM_SCENARIO_DIR};

std::vector<TraceRow> line_tick(int tick, std::vector<Vec2> positions, BotState state = BotState::kTransit) {
  std::vector<TraceRow> rows;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    TraceRow r;
    r.tick = tick;
    r.bot = static_cast<BotId>(i);
    r.x = positions[i].x;
    r.y = positions[i].y;
    r.state = state;
    r.label = static_cast<int>(i);
    r.f_net = 0.5 * static_cast<double>(i);
    rows.push_back(r);
  }
  return rows;
}

const ShapeTable& line_table() {
  static const ShapeTable t = build_shape_table(parse_shape_matrix("0 1 2 3 4"), 1.0);
  return t;
}

const std::map<BotId, BotId> kLineParents{{1, 0}, {2, 1}, {3, 2}, {4, 3}};

TEST(FormationError, PerfectFormationIsZero) {
  const auto rows = line_tick(0, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  const auto s = formation_error_series(rows, line_table(), kLineParents, 0.0);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_NEAR(s.points[0].value, 0.0, 1e-15);
}

TEST(FormationError, OneDisplacedFollowerOfFour) {
  const auto rows = line_tick(0, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0.2}});
  const auto s = formation_error_series(rows, line_table(), kLineParents, 0.0);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_NEAR(s.points[0].value, 0.05, 1e-12);
  const auto by_bot = formation_error_by_bot(rows, line_table(), kLineParents);
  EXPECT_NEAR(by_bot.at(4), 0.2, 1e-12);
  EXPECT_EQ(by_bot.count(0), 0u);
}

TEST(FormationError, EmptyTraceGivesEmptySeries) {
  EXPECT_TRUE(formation_error_series({}, line_table(), kLineParents, 0.0).points.empty());
}

TEST(ResidualForce, SumsTransitTicksOnly) {
  auto rows = line_tick(0, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, BotState::kReady);
  const auto moving = line_tick(1, {{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  rows.insert(rows.end(), moving.begin(), moving.end());
  const auto s = residual_force_series(rows, 0.0);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].tick, 1);
  EXPECT_DOUBLE_EQ(s.points[0].value, 0.5 * (0 + 1 + 2 + 3 + 4));
  EXPECT_DOUBLE_EQ(s.points[0].abscissa, 3.0);
  EXPECT_TRUE(residual_force_series({}, 0.0).points.empty());
  EXPECT_DOUBLE_EQ(series_peak(s), 5.0);
}

TEST(MetricsCsv, HeaderAndRows) {
  MetricsSeries s{SeriesKind::kFormationError, {{0, 1.5, 0.25}}};
  EXPECT_EQ(write_metrics_csv(std::span<const MetricsSeries>(&s, 1)), "kind,abscissa,value\nformation_error,1.5,0.25\n");
}

TEST(ParentsCsv, RoundTrip) {
  EXPECT_EQ(parse_parents_csv(write_parents_csv(kLineParents)), kLineParents);
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("swarmform_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, DumpTableOfTriangle) {
  const auto r = cli({"dump-table", "--shape", (kScenarios / "triangle.shape").string(), "--spacing", "1.0"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n0,2,1.570796327,1.0\n"), std::string::npos) << r.out;
}

TEST(Cli, ValidateAcceptsShippedScenarios) {
  for (const char* name : {"triangle.json", "wedge.json", "wedge_transit.json", "wedge_large_obstacle.json",
                           "wedge_small_obstacle.json"}) {
    const auto r = cli({"validate", "--scenario", (kScenarios / name).string()});
    EXPECT_EQ(r.code, 0) << name << ": " << r.err;
  }
}

TEST(Cli, ValidateRejectsDisconnectedShape) {
  const auto dir = fresh_dir("disconnected");
  write_text_file(dir / "s.json", R"({"shape": {"matrix": "0 -1 1"}, "spawn": {"poses": [[0, 0], [1, 1]]}})");
  const auto r = cli({"validate", "--scenario", (dir / "s.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("connected"), std::string::npos) << r.err;
}

TEST(Cli, ValidateRejectsUnknownKeys) {
  const auto dir = fresh_dir("unknown_key");
  write_text_file(dir / "s.json", R"({"shape": {"matrix": "0"}, "spawn": {"poses": [[0, 0]]}, "speed": 3})");
  EXPECT_EQ(cli({"validate", "--scenario", (dir / "s.json").string()}).code, 1);
}

TEST(Cli, MissingFileIsIoError) {
  EXPECT_EQ(cli({"validate", "--scenario", "/nonexistent/s.json"}).code, 2);
  EXPECT_EQ(cli({"dump-table", "--shape", "/nonexistent/x.shape", "--spacing", "1"}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"run", "--scenario", "x.json"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, RunWritesArtifactsAndMetricsRecompute) {
  const auto dir = fresh_dir("run");
  const std::string scenario = (kScenarios / "triangle.json").string();
  const auto r = cli({"run", "--scenario", scenario, "--out", (dir / "a").string(), "--max-ticks", "1500"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"trace.csv", "metrics.csv", "summary.json", "parents.csv", "stigmergy.csv", "scenario.json"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  }
  const std::string trace = read_text_file(dir / "a" / "trace.csv");
  EXPECT_EQ(trace.substr(0, kTraceHeader.size()), kTraceHeader);
  const std::string metrics = read_text_file(dir / "a" / "metrics.csv");
  EXPECT_NE(metrics.find("residual_force,"), std::string::npos);
  EXPECT_NE(metrics.find("formation_error,"), std::string::npos);

  const auto summary = nlohmann::json::parse(read_text_file(dir / "a" / "summary.json"));
  for (const char* key : {"final_states", "ticks_to_formation", "ticks_total", "min_bot_clearance",
                          "min_obstacle_clearance", "peak_residual_force"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
  const int ticks = summary["ticks_total"].get<int>();
  EXPECT_LE(ticks, 1500);
  EXPECT_NE(trace.find("\n" + std::to_string(ticks - 1) + ",0,"), std::string::npos);
  EXPECT_EQ(trace.find("\n" + std::to_string(ticks) + ",0,"), std::string::npos);

  const auto m = cli({"metrics", "--trace", (dir / "a" / "trace.csv").string()});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(m.out, metrics);
  const auto m2 = cli({"metrics", "--trace", (dir / "a" / "trace.csv").string(), "--scenario", scenario, "--parents",
                       (dir / "a" / "parents.csv").string(), "--out", (dir / "m.csv").string()});
  ASSERT_EQ(m2.code, 0) << m2.err;
  EXPECT_EQ(read_text_file(dir / "m.csv"), metrics);

  const auto again = cli({"run", "--scenario", scenario, "--out", (dir / "b").string(), "--max-ticks", "1500"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_text_file(dir / "b" / "trace.csv"), trace);

  const auto seeded = cli({"run", "--scenario", scenario, "--out", (dir / "c").string(), "--max-ticks", "1500",
                           "--seed", "9"});
  ASSERT_EQ(seeded.code, 0);
  EXPECT_NE(read_text_file(dir / "c" / "trace.csv"), trace);
  fs::remove_all(dir);
}

TEST(Trace, CsvRoundTrip) {
  auto s = load_scenario(kScenarios / "triangle.json");
  s.max_ticks = 50;
  const auto rows = run(s).rows;
  const std::string text = write_trace_csv(rows);
  EXPECT_EQ(write_trace_csv(parse_trace_csv(text)), text);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

}  // namespace
}  // namespace swarmform

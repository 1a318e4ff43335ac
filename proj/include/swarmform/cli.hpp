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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmform/metrics.hpp"
#include "swarmform/scenario.hpp"
#include "swarmform/shape.hpp"
#include "swarmform/trace.hpp"
#include "swarmform/world.hpp"

namespace swarmform {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

/// Everything `run` writes, as file contents.
struct RunArtifacts {
  std::string trace;
  std::string metrics;
  std::string summary;
  std::string parents;
  std::string stigmergy;
  std::string scenario;
};

/// Metrics CSV from trace text, as the `metrics` subcommand computes it.
inline std::string recompute_metrics(std::string_view trace_text, const Scenario& scenario,
                                     const std::map<BotId, BotId>& parents) {
  const ShapeTable table = validate_scenario(scenario);
  const auto rows = parse_trace_csv(trace_text);
  return write_metrics_csv(standard_metrics(rows, scenario.goal_azimuth(), &table, &parents));
}

inline RunArtifacts run_artifacts(const Scenario& scenario) {
  validate_scenario(scenario);
  const RunResult r = run(scenario);
  RunArtifacts a;
  a.trace = write_trace_csv(r.rows);
  // Metrics come from the serialized trace so that `metrics` reproduces them exactly.
  const auto rows = parse_trace_csv(a.trace);
  const auto series = standard_metrics(rows, scenario.goal_azimuth(), &r.table, &r.transit_parents);
  a.metrics = write_metrics_csv(series);
  a.summary = run_summary(r, series_peak(series.front())).dump(2) + "\n";
  a.parents = write_parents_csv(r.transit_parents);
  const MetricsSeries stig = stigmergy_size_series(r.ticks);
  a.stigmergy = write_metrics_csv(std::span<const MetricsSeries>(&stig, 1));
  a.scenario = scenario_to_json(scenario).dump(2) + "\n";
  return a;
}

inline void write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "trace.csv", a.trace);
  write_text_file(dir / "metrics.csv", a.metrics);
  write_text_file(dir / "summary.json", a.summary);
  write_text_file(dir / "parents.csv", a.parents);
  write_text_file(dir / "stigmergy.csv", a.stigmergy);
  write_text_file(dir / "scenario.json", a.scenario);
}

/// Entry point of the swarmform command line. `args` excludes the program
/// name. Returns 0 on success, 1 on invalid input, 2 on I/O failure.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Swarm shape formation and transit simulator", "swarmform"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_ticks;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace, metrics and summary");
  run_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--max-ticks", max_ticks, "Override the tick limit")->check(CLI::PositiveNumber);

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and its shape");
  validate_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();

  std::string shape_path;
  double spacing = 1.0;
  auto* dump_cmd = app.add_subcommand("dump-table", "Print the shape table of a shape matrix");
  dump_cmd->add_option("--shape", shape_path, "Shape matrix file")->required();
  dump_cmd->add_option("--spacing", spacing, "Grid spacing in metres")->required();

  std::string trace_path;
  std::string parents_path;
  std::string metrics_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics.csv from a trace");
  metrics_cmd->add_option("--trace", trace_path, "trace.csv written by run")->required();
  metrics_cmd->add_option("--scenario", scenario_path, "Scenario (default: scenario.json next to the trace)");
  metrics_cmd->add_option("--parents", parents_path, "Parent table (default: parents.csv next to the trace)");
  metrics_cmd->add_option("--out", metrics_out, "Write here instead of standard output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      Scenario s = load_scenario(scenario_path);
      if (seed) s.seed = *seed;
      if (max_ticks) s.max_ticks = *max_ticks;
      const RunArtifacts a = run_artifacts(s);
      write_artifacts(a, out_dir);
      out << "wrote " << out_dir << "\n";
    } else if (*validate_cmd) {
      const Scenario s = load_scenario(scenario_path);
      const ShapeTable table = validate_scenario(s);
      out << "ok: " << table.size() << " labels, spacing " << format_real(s.spacing) << "\n";
    } else if (*dump_cmd) {
      const std::string text = read_text_file(shape_path);
      if (!(spacing > 0.0)) throw ScenarioError("spacing must be positive");
      out << dump_shape_table(build_shape_table(parse_shape_matrix(text), spacing));
    } else if (*metrics_cmd) {
      const std::filesystem::path trace_file(trace_path);
      const auto dir = trace_file.parent_path();
      const std::filesystem::path sc = scenario_path.empty() ? dir / "scenario.json" : std::filesystem::path(scenario_path);
      const std::filesystem::path pc = parents_path.empty() ? dir / "parents.csv" : std::filesystem::path(parents_path);
      const Scenario s = load_scenario(sc);
      const auto parents = parse_parents_csv(read_text_file(pc));
      const std::string csv = recompute_metrics(read_text_file(trace_file), s, parents);
      if (metrics_out.empty()) {
        out << csv;
      } else {
        write_text_file(metrics_out, csv);
      }
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    err << "invalid shape: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace swarmform

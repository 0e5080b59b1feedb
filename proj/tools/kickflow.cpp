// Copyright 2026 The kickflow Authors
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

// kickflow: command-line driver for the experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kickflow/config.hpp"
#include "kickflow/experiments.hpp"
#include "kickflow/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kickflow;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

/// Loads the config and applies the KICKFLOW_SEED override.
RunConfig load_with_env(const std::string& path, bool* overridden = nullptr) {
  RunConfig c = load_config(path);
  if (const char* env = std::getenv("KICKFLOW_SEED")) {
    std::size_t used = 0;
    unsigned long long seed = 0;
    try {
      seed = std::stoull(env, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || env[used] != '\0')
      throw ConfigError("KICKFLOW_SEED", "expected a nonnegative integer, got '" + std::string(env) + "'");
    std::cerr << "kickflow: KICKFLOW_SEED=" << seed << " overrides run.master_seed ("
              << c.run.master_seed << ")\n";
    c.run.master_seed = seed;
    if (overridden) *overridden = true;
  }
  return c;
}

int cmd_run(const std::string& config_path, const std::string& out_override, int jobs) {
  bool seed_override = false;
  RunConfig c = load_with_env(config_path, &seed_override);
  if (!out_override.empty()) c.output_dir = out_override;
  const std::string stamp = utc_timestamp();
  Json manifest;
  manifest["config_path"] = config_path;
  manifest["config_hash"] = config_hash(c);
  manifest["master_seed"] = c.run.master_seed;
  manifest["seed_from_env"] = seed_override;
  manifest["jobs"] = jobs;
  manifest["timestamp"] = stamp;
  manifest["reports"] = Json::array();
  bool all_passed = true;
  for (const auto& name : c.experiments) {
    const Report r = run_experiment(name, c, jobs);
    const auto files = write_report(r, c.output_dir, stamp);
    for (const auto& w : r.warnings) std::cerr << "kickflow: warning: " << name << ": " << w << "\n";
    for (const auto& check : r.checks)
      std::cout << (check.passed ? "PASS " : "FAIL ") << name << ": " << check.name << " ("
                << check.detail << ")\n";
    std::cout << "wrote " << files.json.string() << "\n";
    manifest["reports"].push_back({{"experiment", name},
                                   {"passed", r.passed()},
                                   {"rows_hash", rows_hash(r)},
                                   {"wall_seconds", r.wall_seconds},
                                   {"json", files.json.filename().string()},
                                   {"csv", files.csv.filename().string()},
                                   {"text", files.text.filename().string()}});
    all_passed = all_passed && r.passed();
  }
  manifest["passed"] = all_passed;
  detail::write_file(fs::path(c.output_dir) / ("manifest-" + stamp + "-" + config_hash(c) + ".json"),
                     manifest.dump(2) + "\n");
  return all_passed ? kExitOk : kExitFailed;
}

int cmd_dump_potential(const std::string& config_path, const std::string& out_path) {
  const RunConfig c = load_with_env(config_path);
  const auto& run = c.run;
  std::int64_t first = std::min<std::int64_t>(run.m, 0);
  std::int64_t last = std::max<std::int64_t>({run.n, run.horizon, 1});
  for (auto n : run.horizons) last = std::max(last, n);
  for (auto n : run.n_list) last = std::max(last, n);
  for (const auto& a : run.anchors) first = std::min(first, a.n);
  const Grid grid = c.grid.make();
  std::vector<Grid> frames{grid, grid.with_frame(run.velocity)};
  for (double v : run.velocities) frames.push_back(grid.with_frame(v));
  const auto field = detail::realize(c, run.seeds.front(), 0, {first, last}, frames);
  const std::string body = dump_coefficients(field).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << body;
  }
  return kExitOk;
}

int cmd_list() {
  for (const auto& e : experiment_registry()) std::cout << e.name << "\t" << e.theorem << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kickflow: directed polymers and kicked Burgers experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dump_out;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "run the experiments selected in a config");
  run->add_option("-c,--config", config_path, "config JSON")->required();
  run->add_option("-o,--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* dump = app.add_subcommand("dump-potential", "write the potential coefficients as JSON");
  dump->add_option("-c,--config", config_path, "config JSON")->required();
  dump->add_option("-o,--out", dump_out, "output file (default stdout)");

  auto* list = app.add_subcommand("list", "list experiments and what each checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs);
    if (*dump) return cmd_dump_potential(config_path, dump_out);
    if (*list) return cmd_list();
  } catch (const ConfigError& e) {
    std::cerr << "kickflow: config error: " << e.what() << "\n";
    return kExitError;
  } catch (const EmptySliceError& e) {
    std::cerr << "kickflow: numeric failure: " << e.what()
              << " (boundary leak " << e.boundary_leak() << ")\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "kickflow: error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

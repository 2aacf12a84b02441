// Copyright 2026 The riskcert Authors
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

// riskcert: certified collision-probability bounds for uncertain obstacles.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "riskcert/cli.hpp"

namespace {

using riskcert::cli::RunConfig;

struct RawFlags {
  std::string method = "two-shot";
  std::string tol = "1e-6";
  std::string alphas = "1";
  std::string links = "4";
  std::string obstacles = "1";
};

void add_common(CLI::App* cmd, RunConfig& c, RawFlags& raw) {
  cmd->add_option("--scene", c.scene_path, "Scene JSON file");
  cmd->add_option("--method", raw.method, "one-shot or two-shot");
  cmd->add_option("--tol", raw.tol,
                  "Bisection tolerance on epsilon (bench: comma list)");
  cmd->add_option("--samples", c.samples, "Monte Carlo samples per obstacle");
  cmd->add_option("--seed", c.seed, "Monte Carlo seed");
  cmd->add_option("--threads", c.threads, "Worker threads");
  cmd->add_option("--out", c.out_path, "Write the report to this file");
  cmd->add_flag("--csv", c.csv, "CSV instead of a table");
}

void finish(RunConfig& c, const RawFlags& raw) {
  using riskcert::cli::UsageError;
  const auto method = riskcert::cli::parse_method(raw.method);
  if (!method) throw UsageError("--method must be one-shot or two-shot");
  c.method = *method;
  const auto tols = riskcert::cli::parse_doubles(raw.tol, "--tol");
  if (c.command == "bench") {
    c.tols = tols;
  } else if (tols.size() != 1) {
    throw UsageError("--tol takes a single value for " + c.command);
  }
  c.eps_tol = tols.front();
  c.alphas = riskcert::cli::parse_doubles(raw.alphas, "--alphas");
  c.links = riskcert::cli::parse_ints(raw.links, "--links");
  c.obstacles = riskcert::cli::parse_ints(raw.obstacles, "--obstacles");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified collision-probability bounds for uncertain obstacles"};
  app.require_subcommand(1);
  RunConfig config;
  RawFlags raw;

  CLI::App* certify = app.add_subcommand("certify", "Bound each obstacle's risk");
  CLI::App* oracle = app.add_subcommand("oracle", "Monte Carlo estimates");
  CLI::App* sweep = app.add_subcommand("sweep", "Scale covariances and compare");
  CLI::App* bench = app.add_subcommand("bench", "Time queries on ring scenes");
  for (CLI::App* cmd : {certify, oracle, sweep, bench}) add_common(cmd, config, raw);
  sweep->add_option("--alphas", raw.alphas, "Covariance scale factors");
  bench->add_option("--links", raw.links, "Link counts");
  bench->add_option("--obstacles", raw.obstacles, "Obstacle counts");
  bench->add_option("--repeat", config.repeat, "Passes per configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : riskcert::cli::kExitUsage;
  }
  config.command = app.get_subcommands().front()->get_name();
  try {
    finish(config, raw);
  } catch (const riskcert::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return riskcert::cli::kExitUsage;
  }
  return riskcert::cli::run(config, std::cout, std::cerr);
}

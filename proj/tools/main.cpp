/*
 * Copyright 2026 The aslsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "aslsim/experiment.hpp"
#include "aslsim/selftest.hpp"

namespace {

constexpr int kUsageError = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string model_path;
  std::int64_t seed = -1;  // negative: keep the config's seed
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_model) {
  cmd->add_option("-c,--config", args.config_path, "sweep configuration file");
  cmd->add_option("-o,--out", args.out_path, "output path")->required();
  cmd->add_option("-s,--seed", args.seed, "override the config seed");
  if (with_model) {
    cmd->add_option("-m,--model", args.model_path,
                    "use this split model instead of training");
  }
}

aslsim::ExperimentConfig resolve_config(const CLI::App& app, const CommonArgs& args) {
  if (args.config_path.empty()) {
    std::cerr << "error: a config file is required (--config)\n\n" << app.help();
    std::exit(kUsageError);
  }
  aslsim::ExperimentConfig cfg = aslsim::load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.model_path.empty()) cfg.model_path = args.model_path;
  return cfg;
}

void print_manifest(const aslsim::ExperimentConfig& cfg) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(aslsim::config_hash(cfg)));
  std::cout << "seed: " << cfg.seed << "\n"
            << "config hash: " << hash << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // LF endings stay LF
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

int run_train(const CLI::App& app, CommonArgs& args, int agents_override) {
  aslsim::ExperimentConfig cfg = resolve_config(app, args);
  cfg.model_path.clear();  // always train fresh here
  const int agents = agents_override > 0 ? agents_override : cfg.agents_grid.front();
  print_manifest(cfg);
  std::cout << "training for " << agents << " agents...\n";
  const aslsim::ModelBundle bundle = aslsim::prepare_model(cfg, agents);
  aslsim::save_split(bundle.split, args.out_path);
  std::cout << "test accuracy (centralized): " << bundle.centralized_accuracy << "\n"
            << "wrote " << args.out_path << "\n";
  return 0;
}

int run_sweep(const CLI::App& app, CommonArgs& args, bool scalability) {
  const aslsim::ExperimentConfig cfg = resolve_config(app, args);
  print_manifest(cfg);
  const std::string csv = scalability ? aslsim::run_scalability_sweep(cfg)
                                      : aslsim::run_accuracy_sweep(cfg);
  write_file(args.out_path, csv);
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Split-inference uplink simulator: analog over-the-air aggregation vs "
      "an orthogonal digital baseline"};
  app.require_subcommand(1);

  CommonArgs train_args;
  int train_agents = 0;
  CLI::App* train = app.add_subcommand("train", "train and save a split model");
  add_common(train, train_args, /*with_model=*/false);
  train->add_option("-a,--agents", train_agents, "agent count (default: first in config)");

  CommonArgs accuracy_args;
  CLI::App* accuracy =
      app.add_subcommand("accuracy", "test accuracy across the snr grid (CSV)");
  add_common(accuracy, accuracy_args, /*with_model=*/true);

  CommonArgs scalability_args;
  CLI::App* scalability = app.add_subcommand(
      "scalability", "completed tasks under channel-use budgets (CSV)");
  add_common(scalability, scalability_args, /*with_model=*/false);

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (train->parsed()) return run_train(app, train_args, train_agents);
    if (accuracy->parsed()) return run_sweep(app, accuracy_args, false);
    if (scalability->parsed()) return run_sweep(app, scalability_args, true);
    if (selftest->parsed()) return aslsim::run_selftest(std::cout) ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kUsageError;
}

// Copyright 2026 The mixpsro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mixpsro: run, search, compare and evaluate PSRO experiments.
//
//   mixpsro run <config> [--out DIR] [--workers N] [--resume] [--until E]
//   mixpsro hparam-search <config> [--opponents RUN_DIR] [--out FILE]
//   mixpsro compare <run_dir>... [--out FILE]
//   mixpsro eval <checkpoint> --eval-set <run_dir> [--eval-size K] [--episodes N]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixpsro/cli.hpp"

namespace {

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) mixpsro::fail(mixpsro::ErrorCode::kPrecondition, "cannot write " + path);
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PSRO, Mixed-Oracles and Mixed-Opponents experiments"};
  app.require_subcommand(1);

  mixpsro::RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("config", run_opts.config_path, "Config file")->required();
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--workers", run_opts.workers, "Worker threads (overrides config)");
  run->add_flag("--resume", run_opts.resume, "Continue from the output directory's checkpoint");
  run->add_option("--until", run_opts.until, "Stop after this epoch");

  mixpsro::HParamSearchOptions hps_opts;
  std::string hps_out;
  auto* hps = app.add_subcommand("hparam-search", "Search oracle hyperparameters");
  hps->add_option("config", hps_opts.config_path, "Config file")->required();
  hps->add_option("--opponents", hps_opts.opponents, "Run directory supplying opponents");
  hps->add_option("--out", hps_out, "Write the result JSON here");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Merge regret curves of several runs");
  compare->add_option("runs", compare_dirs, "Run directories")->required();
  compare->add_option("--out", compare_out, "Write the table here");

  mixpsro::EvalOptions eval_opts;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Proxy regret against held-out policies");
  eval->add_option("checkpoint", eval_opts.checkpoint, "Run directory or checkpoint")->required();
  eval->add_option("--eval-set", eval_opts.eval_set, "Run supplying held-out policies")
      ->required();
  eval->add_option("--eval-size", eval_opts.eval_size, "Held-out policies per player");
  eval->add_option("--episodes", eval_opts.episodes, "Episodes per matchup");
  eval->add_option("--seed", eval_opts.seed, "Evaluation seed");
  eval->add_option("--out", eval_out, "Write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mixpsro::kExitOk : mixpsro::kExitConfig;
  }

  try {
    if (*run) {
      const auto dir = mixpsro::run_command(run_opts, std::cout);
      std::cout << "wrote " << dir.string() << "\n";
    } else if (*hps) {
      with_output(hps_out, [&](std::ostream& out) {
        mixpsro::hparam_search_command(hps_opts, out, std::cerr);
      });
    } else if (*compare) {
      with_output(compare_out,
                  [&](std::ostream& out) { mixpsro::compare_command(compare_dirs, out); });
    } else if (*eval) {
      with_output(eval_out, [&](std::ostream& out) { mixpsro::eval_command(eval_opts, out); });
    }
  } catch (const mixpsro::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mixpsro::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mixpsro::kExitRuntime;
  }
  return mixpsro::kExitOk;
}

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

// Subcommand implementations behind the mixpsro command-line tool.
//
// A run directory holds:
//   regret_curve.tsv   per-epoch regrets against cumulative counters
//   game.json          final empirical game
//   record.json        per-epoch solutions and counters
//   checkpoint/        resumable run state

#ifndef MIXPSRO_CLI_HPP_
#define MIXPSRO_CLI_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixpsro/config.hpp"
#include "mixpsro/engine.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/evaluation.hpp"
#include "mixpsro/hparam_search.hpp"

namespace mixpsro {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr const char* kOutputRootVar = "MIXPSRO_OUTPUT_ROOT";

inline int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kConfigError ? kExitConfig : kExitRuntime;
}

// Explicit --out wins; otherwise $MIXPSRO_OUTPUT_ROOT (or ./runs) joined with
// the config file's stem.
inline std::filesystem::path resolve_output_dir(const std::string& explicit_out,
                                                const std::string& config_path) {
  if (!explicit_out.empty()) return explicit_out;
  const char* root = std::getenv(kOutputRootVar);
  const std::filesystem::path base = root != nullptr && *root != '\0' ? root : "runs";
  return base / std::filesystem::path(config_path).stem();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kPrecondition, "cannot write " + path.string());
  out << text;
}

inline std::string epoch_summary(const RunRecord& run) {
  const auto& r = run.epochs.back();
  std::ostringstream s;
  s << "epoch " << r.epoch << " algorithm=" << to_string(run.config.algorithm)
    << " strategies=" << run.game.num_strategies(0) << " cells=" << r.cells_simulated
    << " timesteps=" << r.cumulative_training_steps << " episodes=" << r.cumulative_episodes
    << " sum_regret=" << std::setprecision(6) << r.sum_regret << " (" << r.regret_measure
    << ")";
  return s.str();
}

inline void write_run_outputs(const RunRecord& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "regret_curve.tsv", regret_curve_text(run));
  save_json_file((dir / "game.json").string(), run.game);
  json epochs = json::array();
  for (const auto& r : run.epochs) epochs.push_back(r);
  save_json_file((dir / "record.json").string(),
                 {{"config", serialize_run_config(run.config)},
                  {"environment", run.env->name()},
                  {"stopped_early", run.stopped_early},
                  {"epochs", epochs}});
  checkpoint(run, dir / "checkpoint");
}

struct RunOptions {
  std::string config_path;
  std::string out;
  int workers = 0;  // 0 keeps the config value
  bool resume = false;
  std::uint64_t until = 0;  // 0 runs to the configured epoch count
};

// Executes one configured run; checkpoints and exports after every epoch.
inline std::filesystem::path run_command(const RunOptions& opts, std::ostream& log) {
  const auto dir = resolve_output_dir(opts.out, opts.config_path);
  RunRecord run;
  if (opts.resume) {
    run = resume(dir / "checkpoint");
    if (opts.workers > 0) run.config.workers = opts.workers;
  } else {
    RunConfig config = load_run_config(opts.config_path);
    if (opts.workers > 0) config.workers = opts.workers;
    run = start_run(config);
    log << epoch_summary(run) << "\n";
    write_run_outputs(run, dir);
  }
  continue_run(run, opts.until, [&](const RunRecord& r) {
    log << epoch_summary(r) << "\n";
    write_run_outputs(r, dir);
  });
  write_run_outputs(run, dir);
  return dir;
}

struct RunSummary {
  std::string algorithm;
  std::string env;
  std::string label;
  std::vector<std::uint64_t> epochs;
  std::vector<std::uint64_t> timesteps;
  std::vector<double> sum_regret;
};

inline RunSummary load_run_summary(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "checkpoint" / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    fail(ErrorCode::kCorruptCheckpoint, "no run found in " + dir.string());
  }
  const json manifest = load_json_file(manifest_path.string());
  RunSummary s;
  try {
    s.algorithm = manifest.at("config").at("engine").at("algorithm").get<std::string>();
    s.env = manifest.at("env_name").get<std::string>();
    for (const auto& r : manifest.at("epochs")) {
      s.epochs.push_back(r.at("epoch").get<std::uint64_t>());
      s.timesteps.push_back(r.at("cumulative_training_steps").get<std::uint64_t>());
      s.sum_regret.push_back(r.at("sum_regret").get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptCheckpoint, dir.string() + ": " + e.what());
  }
  s.label = dir.filename().string();
  if (s.label.empty()) s.label = dir.parent_path().filename().string();
  return s;
}

// Long-format table: algorithm, run, axis (epoch | timesteps), x, sum_regret.
inline void compare_command(const std::vector<std::string>& run_dirs, std::ostream& out) {
  require(run_dirs.size() >= 2, ErrorCode::kPrecondition,
          "compare needs at least two run directories");
  std::vector<RunSummary> runs;
  for (const auto& d : run_dirs) runs.push_back(load_run_summary(d));
  for (const auto& r : runs) {
    if (r.env != runs.front().env) {
      fail(ErrorCode::kEnvironmentMismatch,
           "run " + r.label + " uses " + r.env + " but " + runs.front().label + " uses " +
               runs.front().env);
    }
  }
  out << "algorithm\trun\taxis\tx\tsum_regret\n";
  char buf[64];
  for (const auto& r : runs) {
    for (std::size_t k = 0; k < r.epochs.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.sum_regret[k]);
      out << r.algorithm << "\t" << r.label << "\tepoch\t" << r.epochs[k] << "\t" << buf << "\n";
    }
    for (std::size_t k = 0; k < r.epochs.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.sum_regret[k]);
      out << r.algorithm << "\t" << r.label << "\ttimesteps\t" << r.timesteps[k] << "\t" << buf
          << "\n";
    }
  }
}

// Ids of policies from different runs must not collide in the matchup cache.
inline std::uint64_t eval_id(std::uint64_t source, PolicyHandle h) {
  return (source << 40) | h.value;
}

// Samples `size` policies per player, with replacement, from the final
// solution support of a finished run.
inline std::vector<std::vector<EvalPolicy>> held_out_policies(const RunRecord& source,
                                                              std::size_t size,
                                                              std::uint64_t seed) {
  std::vector<std::vector<EvalPolicy>> out;
  Rng rng = make_rng(derive_seed(seed, {tag("held-out")}));
  for (int p = 0; p < source.game.n_players(); ++p) {
    std::vector<EvalPolicy> row;
    const auto& w = source.solution.mixtures[static_cast<std::size_t>(p)].weights;
    for (std::size_t k = 0; k < size; ++k) {
      const auto idx = sample_index(w, rng);
      const auto h = source.game.strategies(p)[idx];
      row.push_back({eval_id(1, h), source.store.get(h), "eval" + std::to_string(h.value)});
    }
    out.push_back(std::move(row));
  }
  return out;
}

struct EvalOptions {
  std::string checkpoint;
  std::string eval_set;
  std::size_t eval_size = 6;
  std::uint64_t episodes = 30;
  std::uint64_t seed = 0;
};

// Proxy regret of every epoch's solution against the run's final policy sets
// united with held-out policies. Writes one row per epoch.
inline void eval_command(const EvalOptions& opts, std::ostream& out) {
  require(opts.eval_size >= 1, ErrorCode::kConfigError, "--eval-size must be >= 1");
  require(opts.episodes >= 1, ErrorCode::kConfigError, "--episodes must be >= 1");
  auto as_checkpoint = [](const std::filesystem::path& p) {
    return std::filesystem::exists(p / "manifest.json") ? p : p / "checkpoint";
  };
  const RunRecord run = resume(as_checkpoint(opts.checkpoint));
  const RunRecord source = resume(as_checkpoint(opts.eval_set));
  if (run.env->name() != source.env->name()) {
    fail(ErrorCode::kEnvironmentMismatch,
         "checkpoint uses " + run.env->name() + " but eval set uses " + source.env->name());
  }
  const auto held_out = held_out_policies(source, opts.eval_size, opts.seed);
  const int n = run.game.n_players();
  std::vector<std::vector<EvalPolicy>> psro(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    for (const auto& h : run.game.strategies(p)) {
      psro[static_cast<std::size_t>(p)].push_back(
          {eval_id(0, h), run.store.get(h), "psro" + std::to_string(h.value)});
    }
  }
  MatchupEvaluator evaluator(run.env, opts.episodes, derive_seed(opts.seed, {tag("eval")}));
  out << "epoch\tcumulative_timesteps";
  for (int p = 0; p < n; ++p) out << "\tproxy_regret_p" << p;
  out << "\tsum_regret\n";
  char buf[64];
  for (const auto& rec : run.epochs) {
    std::vector<PolicyMixture> sigma;
    for (int p = 0; p < n; ++p) {
      const auto& w = rec.solution.mixtures[static_cast<std::size_t>(p)].weights;
      PolicyMixture m;
      m.weights = w;
      for (std::size_t k = 0; k < w.size(); ++k) {
        m.policies.push_back(psro[static_cast<std::size_t>(p)][k]);
      }
      sigma.push_back(std::move(m));
    }
    const auto r = proxy_regret(evaluator, sigma, psro, held_out);
    out << rec.epoch << "\t" << rec.cumulative_training_steps;
    for (double v : r) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "\t" << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", sum_regret(r));
    out << "\t" << buf << "\n";
  }
}

struct HParamSearchOptions {
  std::string config_path;
  std::string opponents;  // optional run directory or checkpoint
};

// Runs the search described by the config's "hparam_search" section and
// prints the result as JSON.
inline void hparam_search_command(const HParamSearchOptions& opts, std::ostream& out,
                                  std::ostream& log) {
  json raw;
  try {
    raw = load_json_file(opts.config_path);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  const RunConfig config = parse_run_config(raw);
  const auto spec = parse_hparam_search_spec(
      raw.contains("hparam_search") ? raw.at("hparam_search") : json::object(),
      config.pure_hparams);
  const auto env = make_environment(config.env);
  std::vector<std::shared_ptr<const Policy>> opponents;
  if (opts.opponents.empty()) {
    log << "building opponent pool with " << spec.phase_one_epochs << " PSRO epochs\n";
    opponents = phase_one_opponents(spec, config, env);
  } else {
    const std::filesystem::path p = opts.opponents;
    const RunRecord source =
        resume(std::filesystem::exists(p / "manifest.json") ? p : p / "checkpoint");
    const auto held = held_out_policies(source, spec.opponent_count, spec.seed);
    for (const auto& e : held.at(static_cast<std::size_t>(1 % env->num_players()))) {
      opponents.push_back(e.policy);
    }
  }
  const auto result = hparam_search(spec, *env, opponents);
  log << "pure-hparams: candidate " << result.pure_index << " score "
      << result.pure_scores[result.pure_index] << "\n";
  log << "mix-hparams: candidate " << result.mix_index << " score "
      << result.mix_scores[result.mix_index] << "\n";
  out << to_json(result).dump(1) << "\n";
}

}  // namespace mixpsro

#endif  // MIXPSRO_CLI_HPP_

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

// Run configuration, hyperparameter presets and environment construction.
//
// Configs are JSON documents with one section per subsystem:
//
//   {
//     "engine":      {"algorithm": "psro", "epochs": 4, "episodes_per_cell": 30,
//                     "seed": 1, "workers": 1, "payoff_mode": "simulate",
//                     "oracle": "tabular", "early_stop_tolerance": null},
//     "environment": {"spec": "rps"},
//     "solver":      {"name": "nash", "tolerance": 1e-8, ...},
//     "oracle":      {"pure_hparams": {"preset": "pure-hparams", ...},
//                     "mix_hparams":  {"preset": "mix-hparams", ...}},
//     "evaluation":  {"episodes": 30}
//   }
//
// Every field is optional. Hyperparameter blocks start from the named preset
// for the environment and then apply any explicit fields on top.

#ifndef MIXPSRO_CONFIG_HPP_
#define MIXPSRO_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/leduc.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/meta_solvers.hpp"
#include "mixpsro/value_oracle.hpp"

namespace mixpsro {

enum class Algorithm { kPsro, kMixedOracles, kMixedOpponents };
enum class PayoffMode { kSimulate, kAnalytic };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPsro: return "psro";
    case Algorithm::kMixedOracles: return "mixed-oracles";
    case Algorithm::kMixedOpponents: return "mixed-opponents";
  }
  return "psro";
}

inline std::string to_string(PayoffMode m) {
  return m == PayoffMode::kAnalytic ? "analytic" : "simulate";
}

// Leduc hyperparameters from the published search tables.
inline OracleHParams published_leduc_hparams(const std::string& preset) {
  OracleHParams h;
  h.discount = 1.0;
  h.exploration_timesteps = 300;
  h.min_replay_size = 100;
  if (preset == "pure-hparams") {
    h.batch_size = 32;
    h.replay_capacity = 10000;
    h.learning_rate = 1e-3;
    h.total_timesteps = 3000;
  } else if (preset == "mix-hparams") {
    h.batch_size = 64;
    h.replay_capacity = 3000;
    h.learning_rate = 1e-4;
    h.total_timesteps = 100000;
  } else {
    fail(ErrorCode::kConfigError, "unknown preset '" + preset + "'");
  }
  return h;
}

inline std::string environment_family(const std::string& spec) {
  if (spec == "leduc") return "leduc";
  return "matrix";
}

// Named presets. Leduc uses the published table values; matrix games use
// small budgets that the tabular learner saturates.
inline OracleHParams hparam_preset(const std::string& env_spec, const std::string& preset) {
  if (preset != "pure-hparams" && preset != "mix-hparams") {
    fail(ErrorCode::kConfigError, "unknown hparam preset '" + preset + "'");
  }
  if (environment_family(env_spec) == "leduc") return published_leduc_hparams(preset);
  const bool mix = preset == "mix-hparams";
  OracleHParams h;
  h.learning_rate = 0.1;
  h.discount = 0.0;
  h.total_timesteps = mix ? 4000 : 2000;
  h.exploration_timesteps = mix ? 2000 : 1000;
  return h;
}

struct RunConfig {
  Algorithm algorithm = Algorithm::kPsro;
  std::string env = "rps";
  std::string solver = "nash";
  SolverOptions solver_options;
  std::string oracle = "tabular";
  std::uint64_t epochs = 4;
  std::uint64_t episodes_per_cell = 30;
  PayoffMode payoff_mode = PayoffMode::kSimulate;
  OracleHParams pure_hparams = hparam_preset("rps", "pure-hparams");
  OracleHParams mix_hparams = hparam_preset("rps", "mix-hparams");
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<double> early_stop_tolerance;
  std::uint64_t eval_episodes = 30;

  bool operator==(const RunConfig&) const = default;

  void validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
      fail(ErrorCode::kConfigError, field + ": " + why);
    };
    if (epochs < 1) bad("engine.epochs", "must be >= 1");
    if (episodes_per_cell < 1) bad("engine.episodes_per_cell", "must be >= 1");
    if (workers < 1) bad("engine.workers", "must be >= 1");
    if (eval_episodes < 1) bad("evaluation.episodes", "must be >= 1");
    if (!is_solver_name(solver)) bad("solver.name", "unknown solver '" + solver + "'");
    if (oracle != "tabular" && oracle != "exact") {
      bad("engine.oracle", "unknown oracle '" + oracle + "'");
    }
    const bool matrix = environment_family(env) == "matrix";
    if (oracle == "exact" && !matrix) bad("engine.oracle", "exact oracle needs a matrix game");
    if (payoff_mode == PayoffMode::kAnalytic && !matrix) {
      bad("engine.payoff_mode", "analytic payoffs need a matrix game");
    }
    if (env != "rps" && env != "leduc" && env.rfind("matrix:", 0) != 0) {
      bad("environment.spec", "expected rps, leduc or matrix:<file>, got '" + env + "'");
    }
    pure_hparams.validate("oracle.pure_hparams");
    mix_hparams.validate("oracle.mix_hparams");
  }
};

namespace detail {

inline void check_keys(const json& j, const std::string& section,
                       const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(ErrorCode::kConfigError, section + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(ErrorCode::kConfigError, section + "." + k + ": unknown field");
  }
}

template <typename T>
T field(const json& j, const std::string& section, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfigError,
         section + "." + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

inline OracleHParams parse_hparams(const json& j, const std::string& section,
                                   const std::string& env, const std::string& default_preset) {
  check_keys(j, section,
             {"preset", "learning_rate", "discount", "total_timesteps",
              "exploration_timesteps", "epsilon_start", "epsilon_end", "batch_size",
              "replay_capacity", "min_replay_size"});
  const auto preset = field<std::string>(j, section, "preset", default_preset);
  OracleHParams h;
  try {
    h = hparam_preset(env, preset);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, section + ".preset: " + e.what());
  }
  h.learning_rate = field(j, section, "learning_rate", h.learning_rate);
  h.discount = field(j, section, "discount", h.discount);
  h.total_timesteps = field(j, section, "total_timesteps", h.total_timesteps);
  h.exploration_timesteps = field(j, section, "exploration_timesteps", h.exploration_timesteps);
  h.epsilon_start = field(j, section, "epsilon_start", h.epsilon_start);
  h.epsilon_end = field(j, section, "epsilon_end", h.epsilon_end);
  h.batch_size = field(j, section, "batch_size", h.batch_size);
  h.replay_capacity = field(j, section, "replay_capacity", h.replay_capacity);
  h.min_replay_size = field(j, section, "min_replay_size", h.min_replay_size);
  return h;
}

}  // namespace detail

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "psro") return Algorithm::kPsro;
  if (s == "mixed-oracles") return Algorithm::kMixedOracles;
  if (s == "mixed-opponents") return Algorithm::kMixedOpponents;
  fail(ErrorCode::kConfigError, "engine.algorithm: unknown algorithm '" + s + "'");
}

inline RunConfig parse_run_config(const json& j) {
  using detail::field;
  detail::check_keys(j, "config",
                     {"engine", "environment", "solver", "oracle", "evaluation",
                      "hparam_search"});
  RunConfig c;
  const json empty = json::object();
  const json& env = j.contains("environment") ? j.at("environment") : empty;
  detail::check_keys(env, "environment", {"spec"});
  c.env = field<std::string>(env, "environment", "spec", c.env);

  const json& eng = j.contains("engine") ? j.at("engine") : empty;
  detail::check_keys(eng, "engine",
                     {"algorithm", "epochs", "episodes_per_cell", "seed", "workers",
                      "payoff_mode", "oracle", "early_stop_tolerance"});
  c.algorithm = algorithm_from_string(field<std::string>(eng, "engine", "algorithm", "psro"));
  c.epochs = field(eng, "engine", "epochs", c.epochs);
  c.episodes_per_cell = field(eng, "engine", "episodes_per_cell", c.episodes_per_cell);
  c.seed = field(eng, "engine", "seed", c.seed);
  c.workers = field(eng, "engine", "workers", c.workers);
  const auto mode = field<std::string>(eng, "engine", "payoff_mode", "simulate");
  if (mode == "simulate") {
    c.payoff_mode = PayoffMode::kSimulate;
  } else if (mode == "analytic") {
    c.payoff_mode = PayoffMode::kAnalytic;
  } else {
    fail(ErrorCode::kConfigError, "engine.payoff_mode: unknown mode '" + mode + "'");
  }
  c.oracle = field(eng, "engine", "oracle", c.oracle);
  if (eng.contains("early_stop_tolerance") && !eng.at("early_stop_tolerance").is_null()) {
    c.early_stop_tolerance = field(eng, "engine", "early_stop_tolerance", 0.0);
  }

  const json& sol = j.contains("solver") ? j.at("solver") : empty;
  detail::check_keys(sol, "solver",
                     {"name", "tolerance", "replicator_steps", "replicator_step_size"});
  c.solver = field(sol, "solver", "name", c.solver);
  c.solver_options.tolerance = field(sol, "solver", "tolerance", c.solver_options.tolerance);
  c.solver_options.replicator_steps =
      field(sol, "solver", "replicator_steps", c.solver_options.replicator_steps);
  c.solver_options.replicator_step_size =
      field(sol, "solver", "replicator_step_size", c.solver_options.replicator_step_size);

  const json& orc = j.contains("oracle") ? j.at("oracle") : empty;
  detail::check_keys(orc, "oracle", {"pure_hparams", "mix_hparams"});
  c.pure_hparams = detail::parse_hparams(orc.contains("pure_hparams") ? orc.at("pure_hparams") : empty,
                                         "oracle.pure_hparams", c.env, "pure-hparams");
  c.mix_hparams = detail::parse_hparams(orc.contains("mix_hparams") ? orc.at("mix_hparams") : empty,
                                        "oracle.mix_hparams", c.env, "mix-hparams");

  const json& ev = j.contains("evaluation") ? j.at("evaluation") : empty;
  detail::check_keys(ev, "evaluation", {"episodes"});
  c.eval_episodes = field(ev, "evaluation", "episodes", c.eval_episodes);

  c.validate();
  return c;
}

inline json serialize_run_config(const RunConfig& c) {
  json eng{{"algorithm", to_string(c.algorithm)},
           {"epochs", c.epochs},
           {"episodes_per_cell", c.episodes_per_cell},
           {"seed", c.seed},
           {"workers", c.workers},
           {"payoff_mode", to_string(c.payoff_mode)},
           {"oracle", c.oracle},
           {"early_stop_tolerance", nullptr}};
  if (c.early_stop_tolerance) eng["early_stop_tolerance"] = *c.early_stop_tolerance;
  return {{"engine", eng},
          {"environment", {{"spec", c.env}}},
          {"solver",
           {{"name", c.solver},
            {"tolerance", c.solver_options.tolerance},
            {"replicator_steps", c.solver_options.replicator_steps},
            {"replicator_step_size", c.solver_options.replicator_step_size}}},
          {"oracle", {{"pure_hparams", c.pure_hparams}, {"mix_hparams", c.mix_hparams}}},
          {"evaluation", {{"episodes", c.eval_episodes}}}};
}

inline RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = load_json_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  // Matrix files are resolved relative to the config file.
  if (j.contains("environment") && j["environment"].is_object() &&
      j["environment"].contains("spec") && j["environment"]["spec"].is_string()) {
    const auto spec = j["environment"]["spec"].get<std::string>();
    if (spec.rfind("matrix:", 0) == 0) {
      const std::filesystem::path file = spec.substr(7);
      if (file.is_relative()) {
        j["environment"]["spec"] =
            "matrix:" + (std::filesystem::path(path).parent_path() / file).lexically_normal().string();
      }
    }
  }
  return parse_run_config(j);
}

// "rps" | "leduc" | "matrix:<file>".
inline std::shared_ptr<const Environment> make_environment(const std::string& spec) {
  if (spec == "rps") return make_rps();
  if (spec == "leduc") return std::make_shared<LeducEnv>();
  if (spec.rfind("matrix:", 0) == 0) return MatrixGameEnv::load(spec.substr(7));
  fail(ErrorCode::kConfigError, "environment.spec: unknown environment '" + spec + "'");
}

}  // namespace mixpsro

#endif  // MIXPSRO_CONFIG_HPP_

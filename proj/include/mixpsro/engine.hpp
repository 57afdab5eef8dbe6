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

// Epoch loops for PSRO, Mixed-Oracles and Mixed-Opponents, empirical-game
// expansion, and run checkpoints.
//
// A run starts at epoch 0 with one uniform-random policy per player and the
// uniform solution. Epoch e >= 1 trains one new policy per player against the
// solution of epoch e-1, extends the empirical game by the newly reachable
// profiles, solves it and logs regrets. Every random stream is derived from
// the root seed and the (epoch, player, purpose) or cell it serves, so the
// trajectory does not depend on the worker count.

#ifndef MIXPSRO_ENGINE_HPP_
#define MIXPSRO_ENGINE_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixpsro/config.hpp"
#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/evaluation.hpp"
#include "mixpsro/game_model.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/meta_solvers.hpp"
#include "mixpsro/parallel.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/q_mixing.hpp"
#include "mixpsro/rng.hpp"
#include "mixpsro/simulate.hpp"
#include "mixpsro/value_oracle.hpp"

namespace mixpsro {

// Owns every policy of a run, addressed by handle. Handles are issued in
// insertion order starting at 0.
class PolicyStore {
 public:
  PolicyHandle add(std::shared_ptr<const Policy> policy) {
    const PolicyHandle h{next_++};
    policies_.emplace(h, std::move(policy));
    return h;
  }

  void put(PolicyHandle h, std::shared_ptr<const Policy> policy) {
    policies_[h] = std::move(policy);
    next_ = std::max(next_, h.value + 1);
  }

  const std::shared_ptr<const Policy>& get(PolicyHandle h) const {
    auto it = policies_.find(h);
    if (it == policies_.end()) {
      fail(ErrorCode::kMissingEntry, "no policy with handle " + std::to_string(h.value));
    }
    return it->second;
  }

  std::size_t size() const { return policies_.size(); }
  const std::map<PolicyHandle, std::shared_ptr<const Policy>>& all() const {
    return policies_;
  }

 private:
  std::map<PolicyHandle, std::shared_ptr<const Policy>> policies_;
  std::uint64_t next_ = 0;
};

struct ExpansionStats {
  std::uint64_t cells = 0;
  std::uint64_t episodes = 0;
};

// Fills exactly the missing profiles of `game`, in missing_profiles() order.
// Simulated cells use `episodes_per_cell` episodes seeded from the profile's
// handles; analytic cells (matrix games only) are exact and consume no
// episodes.
inline ExpansionStats expand_enfg(EmpiricalGame& game, const PolicyStore& store,
                                  const Environment& env, std::uint64_t episodes_per_cell,
                                  std::uint64_t seed, PayoffMode mode = PayoffMode::kSimulate,
                                  int workers = 1) {
  require(episodes_per_cell >= 1, ErrorCode::kPrecondition, "episodes_per_cell must be >= 1");
  const auto* matrix = dynamic_cast<const MatrixGameEnv*>(&env);
  if (mode == PayoffMode::kAnalytic && matrix == nullptr) {
    fail(ErrorCode::kWrongEnvironment, "analytic payoffs need a matrix game, got " + env.name());
  }
  const auto missing = game.missing_profiles();
  std::vector<std::vector<double>> results(missing.size());
  parallel_for(missing.size(), workers, [&](std::size_t c) {
    const auto& profile = missing[c];
    std::vector<const Policy*> agents;
    std::vector<std::uint64_t> path{tag("cell")};
    for (int p = 0; p < game.n_players(); ++p) {
      const auto h = game.strategies(p).at(profile.index[static_cast<std::size_t>(p)]);
      agents.push_back(store.get(h).get());
      path.push_back(h.value);
    }
    if (mode == PayoffMode::kAnalytic) {
      std::vector<std::vector<double>> dists;
      for (int s = 0; s < game.n_players(); ++s) {
        dists.push_back(agents[static_cast<std::size_t>(s)]->action_probabilities(
            MatrixGameEnv::observation_for(s), matrix->legal_for(s)));
      }
      results[c] = matrix->expected_returns(dists);
    } else {
      results[c] = estimate_payoffs(env, agents, episodes_per_cell, derive_seed(seed, path));
    }
  });
  ExpansionStats stats;
  for (std::size_t c = 0; c < missing.size(); ++c) {
    const std::uint64_t count = mode == PayoffMode::kAnalytic ? 1 : episodes_per_cell;
    game.record(missing[c], results[c], count);
    ++stats.cells;
    if (mode == PayoffMode::kSimulate) stats.episodes += episodes_per_cell;
  }
  return stats;
}

struct EpochRecord {
  std::uint64_t epoch = 0;
  // Solution the new policies were trained against (epoch - 1's solution).
  std::vector<MixedStrategy> targeted;
  SolutionProfile solution;
  std::vector<PolicyHandle> new_policies;
  std::vector<std::uint64_t> training_steps;
  std::uint64_t cumulative_training_steps = 0;
  std::uint64_t cells_simulated = 0;
  std::uint64_t cumulative_episodes = 0;
  // Regret of the solution inside the empirical game.
  std::vector<double> enfg_regrets;
  // "exact" regrets over the underlying matrix game's pure actions, or the
  // empirical-game regrets again when the game has no exact form.
  std::vector<double> regrets;
  double sum_regret = 0.0;
  std::string regret_measure;

  bool operator==(const EpochRecord&) const = default;
};

inline void to_json(json& j, const EpochRecord& r) {
  std::vector<std::uint64_t> handles;
  for (const auto& h : r.new_policies) handles.push_back(h.value);
  j = json{{"epoch", r.epoch},
           {"targeted", r.targeted},
           {"solution", r.solution},
           {"new_policies", handles},
           {"training_steps", r.training_steps},
           {"cumulative_training_steps", r.cumulative_training_steps},
           {"cells_simulated", r.cells_simulated},
           {"cumulative_episodes", r.cumulative_episodes},
           {"enfg_regrets", r.enfg_regrets},
           {"regrets", r.regrets},
           {"sum_regret", r.sum_regret},
           {"regret_measure", r.regret_measure}};
}

inline void from_json(const json& j, EpochRecord& r) {
  j.at("epoch").get_to(r.epoch);
  j.at("targeted").get_to(r.targeted);
  j.at("solution").get_to(r.solution);
  r.new_policies.clear();
  for (const auto& h : j.at("new_policies")) r.new_policies.push_back({h.get<std::uint64_t>()});
  j.at("training_steps").get_to(r.training_steps);
  j.at("cumulative_training_steps").get_to(r.cumulative_training_steps);
  j.at("cells_simulated").get_to(r.cells_simulated);
  j.at("cumulative_episodes").get_to(r.cumulative_episodes);
  j.at("enfg_regrets").get_to(r.enfg_regrets);
  j.at("regrets").get_to(r.regrets);
  j.at("sum_regret").get_to(r.sum_regret);
  j.at("regret_measure").get_to(r.regret_measure);
}

struct RunRecord {
  RunConfig config;
  std::shared_ptr<const Environment> env;
  EmpiricalGame game;
  PolicyStore store;
  // Mixed-Oracles response library: library[i][j] answers opponent strategy j.
  std::vector<std::vector<PolicyHandle>> library;
  SolutionProfile solution;
  std::vector<EpochRecord> epochs;
  std::uint64_t cumulative_training_steps = 0;
  std::uint64_t cumulative_episodes = 0;
  std::uint64_t next_epoch = 0;
  bool stopped_early = false;

  std::vector<std::shared_ptr<const Policy>> policies(int player) const {
    std::vector<std::shared_ptr<const Policy>> out;
    for (const auto& h : game.strategies(player)) out.push_back(store.get(h));
    return out;
  }
  std::vector<std::shared_ptr<const Policy>> responses(int player) const {
    std::vector<std::shared_ptr<const Policy>> out;
    for (const auto& h : library.at(static_cast<std::size_t>(player))) {
      out.push_back(store.get(h));
    }
    return out;
  }
  bool done() const { return stopped_early || next_epoch > config.epochs; }
};

// Marginal action distribution of every player under a solution over the
// run's policies. Matrix games only.
inline std::vector<std::vector<double>> solution_action_distributions(
    const RunRecord& run, const MatrixGameEnv& env, const std::vector<MixedStrategy>& sigma) {
  std::vector<std::vector<double>> dists;
  for (int p = 0; p < run.game.n_players(); ++p) {
    OpponentSlot slot{run.policies(p), sigma[static_cast<std::size_t>(p)].weights};
    dists.push_back(slot_action_distribution(env, p, slot));
  }
  return dists;
}

// Regret of each player over its pure actions in the underlying matrix game.
inline std::vector<double> matrix_game_regrets(const MatrixGameEnv& env,
                                               const std::vector<std::vector<double>>& dists) {
  const auto base = env.expected_returns(dists);
  std::vector<double> out;
  for (int p = 0; p < env.num_players(); ++p) {
    const auto br = exact_best_response(env, p, dists);
    out.push_back(br.value - base[static_cast<std::size_t>(p)]);
  }
  return out;
}

namespace detail {

inline void log_epoch(RunRecord& run, EpochRecord rec) {
  rec.solution = run.solution;
  rec.cumulative_training_steps = run.cumulative_training_steps;
  rec.cumulative_episodes = run.cumulative_episodes;
  rec.enfg_regrets = empirical_regrets(run.game, run.solution.mixtures);
  if (const auto* m = dynamic_cast<const MatrixGameEnv*>(run.env.get())) {
    rec.regrets = matrix_game_regrets(*m, solution_action_distributions(run, *m,
                                                                        run.solution.mixtures));
    rec.regret_measure = "exact";
  } else {
    rec.regrets = rec.enfg_regrets;
    rec.regret_measure = "empirical";
  }
  rec.sum_regret = sum_regret(rec.regrets);
  run.epochs.push_back(std::move(rec));
}

inline std::uint64_t train_seed(const RunRecord& run, std::uint64_t epoch, int player) {
  return derive_seed(run.config.seed,
                     {tag("train"), epoch, static_cast<std::uint64_t>(player)});
}

}  // namespace detail

// Builds the environment, the initial policies, the complete 1x...x1 game and
// the uniform epoch-0 solution. `initial` replaces the uniform-random starting
// policy per player when given.
inline RunRecord start_run(const RunConfig& config,
                           std::shared_ptr<const Environment> env = nullptr,
                           const std::vector<std::shared_ptr<const Policy>>& initial = {}) {
  config.validate();
  if (env == nullptr) env = make_environment(config.env);
  const int n = env->num_players();
  if (config.algorithm == Algorithm::kMixedOracles && n != 2) {
    fail(ErrorCode::kPlayerCountUnsupported,
         "mixed-oracles needs 2 players, environment has " + std::to_string(n));
  }
  RunRecord run;
  run.config = config;
  run.env = env;
  run.game = EmpiricalGame(n);
  run.library.assign(static_cast<std::size_t>(n), {});
  require(initial.empty() || initial.size() == static_cast<std::size_t>(n),
          ErrorCode::kPrecondition, "need one initial policy per player");
  for (int p = 0; p < n; ++p) {
    std::shared_ptr<const Policy> first =
        initial.empty() ? ValuePolicy::uniform_random(env->num_actions(p))
                        : initial[static_cast<std::size_t>(p)];
    run.game.add_policy(p, run.store.add(std::move(first)));
  }
  const auto stats = expand_enfg(run.game, run.store, *env, config.episodes_per_cell,
                                 derive_seed(config.seed, {tag("enfg")}), config.payoff_mode,
                                 config.workers);
  run.cumulative_episodes += stats.episodes;
  run.solution = solve_uniform(run.game);
  EpochRecord rec;
  rec.epoch = 0;
  rec.training_steps.assign(static_cast<std::size_t>(n), 0);
  rec.cells_simulated = stats.cells;
  for (int p = 0; p < n; ++p) rec.new_policies.push_back(run.game.strategies(p).front());
  detail::log_epoch(run, std::move(rec));
  run.next_epoch = 1;
  return run;
}

// Runs epoch run.next_epoch.
inline void run_epoch(RunRecord& run) {
  require(!run.done(), ErrorCode::kPrecondition, "run already finished");
  const auto& cfg = run.config;
  const Environment& env = *run.env;
  const int n = env.num_players();
  const std::uint64_t e = run.next_epoch;
  const auto sigma = run.solution.mixtures;
  const auto oracle = make_oracle(cfg.oracle);

  std::vector<std::shared_ptr<const Policy>> fresh(static_cast<std::size_t>(n));
  std::vector<std::shared_ptr<const Policy>> responses(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> steps(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t i) {
    const int learner = static_cast<int>(i);
    Rng rng = make_rng(detail::train_seed(run, e, learner));
    TrainingTarget target{learner, std::vector<OpponentSlot>(static_cast<std::size_t>(n))};
    switch (cfg.algorithm) {
      case Algorithm::kPsro: {
        for (int j = 0; j < n; ++j) {
          if (j == learner) continue;
          target.opponents[static_cast<std::size_t>(j)] =
              OpponentSlot{run.policies(j), sigma[static_cast<std::size_t>(j)].weights};
        }
        auto r = oracle->train(env, target, cfg.mix_hparams, rng);
        fresh[i] = r.policy;
        steps[i] = r.steps;
        break;
      }
      case Algorithm::kMixedOracles: {
        const int opp = 1 - learner;
        target.opponents[static_cast<std::size_t>(opp)] =
            OpponentSlot::fixed(run.store.get(run.game.strategies(opp).back()));
        auto r = oracle->train(env, target, cfg.pure_hparams, rng);
        responses[i] = r.policy;
        steps[i] = r.steps;
        auto library = run.responses(learner);
        library.push_back(r.policy);
        fresh[i] = combine_responses(library, sigma[static_cast<std::size_t>(opp)]);
        break;
      }
      case Algorithm::kMixedOpponents: {
        for (int j = 0; j < n; ++j) {
          if (j == learner) continue;
          target.opponents[static_cast<std::size_t>(j)] = OpponentSlot::fixed(
              combine_opponents(run.policies(j), sigma[static_cast<std::size_t>(j)]));
        }
        auto r = oracle->train(env, target, cfg.pure_hparams, rng);
        fresh[i] = r.policy;
        steps[i] = r.steps;
        break;
      }
    }
  });

  EpochRecord rec;
  rec.epoch = e;
  rec.targeted = sigma;
  rec.training_steps = steps;
  for (int p = 0; p < n; ++p) {
    const auto i = static_cast<std::size_t>(p);
    if (responses[i]) run.library[i].push_back(run.store.add(responses[i]));
  }
  for (int p = 0; p < n; ++p) {
    const auto h = run.store.add(fresh[static_cast<std::size_t>(p)]);
    run.game.add_policy(p, h);
    rec.new_policies.push_back(h);
    run.cumulative_training_steps += steps[static_cast<std::size_t>(p)];
  }
  run.game.set_epoch(static_cast<int>(e));
  const auto stats = expand_enfg(run.game, run.store, env, cfg.episodes_per_cell,
                                 derive_seed(cfg.seed, {tag("enfg")}), cfg.payoff_mode,
                                 cfg.workers);
  run.cumulative_episodes += stats.episodes;
  rec.cells_simulated = stats.cells;
  run.solution = solve_by_name(cfg.solver, run.game, cfg.solver_options);
  detail::log_epoch(run, std::move(rec));
  ++run.next_epoch;
  if (cfg.early_stop_tolerance &&
      sum_regret(run.epochs.back().enfg_regrets) < *cfg.early_stop_tolerance) {
    run.stopped_early = true;
  }
}

using EpochCallback = std::function<void(const RunRecord&)>;

// Continues until epoch `until` (default: the configured epoch count) or an
// early stop.
inline void continue_run(RunRecord& run, std::uint64_t until = 0,
                         const EpochCallback& on_epoch = {}) {
  if (until == 0) until = run.config.epochs;
  while (!run.done() && run.next_epoch <= until) {
    run_epoch(run);
    if (on_epoch) on_epoch(run);
  }
}

inline RunRecord run_algorithm(const RunConfig& config,
                               std::shared_ptr<const Environment> env = nullptr,
                               const EpochCallback& on_epoch = {}) {
  RunRecord run = start_run(config, std::move(env));
  if (on_epoch) on_epoch(run);
  continue_run(run, 0, on_epoch);
  return run;
}

inline RunRecord run_psro(RunConfig config, std::shared_ptr<const Environment> env = nullptr) {
  config.algorithm = Algorithm::kPsro;
  return run_algorithm(config, std::move(env));
}

inline RunRecord run_mixed_oracles(RunConfig config,
                                   std::shared_ptr<const Environment> env = nullptr) {
  config.algorithm = Algorithm::kMixedOracles;
  return run_algorithm(config, std::move(env));
}

inline RunRecord run_mixed_opponents(RunConfig config,
                                     std::shared_ptr<const Environment> env = nullptr) {
  config.algorithm = Algorithm::kMixedOpponents;
  return run_algorithm(config, std::move(env));
}

// Tab-separated regret curve, one row per epoch.
inline void write_regret_curve(const RunRecord& run, std::ostream& out) {
  const int n = run.game.n_players();
  out << "# algorithm=" << to_string(run.config.algorithm) << " env=" << run.config.env
      << " solver=" << run.config.solver << " seed=" << run.config.seed << " regret="
      << (run.epochs.empty() ? "none" : run.epochs.front().regret_measure) << "\n";
  out << "epoch\tcumulative_timesteps\tcumulative_episodes";
  for (int p = 0; p < n; ++p) out << "\tregret_p" << p;
  out << "\tsum_regret\n";
  char buf[64];
  for (const auto& r : run.epochs) {
    out << r.epoch << "\t" << r.cumulative_training_steps << "\t" << r.cumulative_episodes;
    for (double v : r.regrets) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "\t" << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", r.sum_regret);
    out << "\t" << buf << "\n";
  }
}

inline std::string regret_curve_text(const RunRecord& run) {
  std::ostringstream out;
  write_regret_curve(run, out);
  return out.str();
}

inline constexpr const char* kCheckpointFormat = "mixpsro-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// Directory layout: manifest.json, game.json, library.json, counters.json and
// policies/<handle>.json.
inline void checkpoint(const RunRecord& run, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "policies");
  json epochs = json::array();
  for (const auto& r : run.epochs) epochs.push_back(r);
  save_json_file((dir / "manifest.json").string(),
                 {{"format", kCheckpointFormat},
                  {"version", kCheckpointVersion},
                  {"config", serialize_run_config(run.config)},
                  {"env_name", run.env->name()},
                  {"solution", run.solution},
                  {"epochs", epochs}});
  if (const auto* m = dynamic_cast<const MatrixGameEnv*>(run.env.get())) {
    save_json_file((dir / "environment.json").string(), m->to_json());
  }
  save_json_file((dir / "game.json").string(), run.game);
  json lib = json::array();
  for (const auto& row : run.library) {
    json r = json::array();
    for (const auto& h : row) r.push_back(h.value);
    lib.push_back(r);
  }
  save_json_file((dir / "library.json").string(),
                 {{"format", kCheckpointFormat}, {"version", kCheckpointVersion},
                  {"library", lib}});
  save_json_file((dir / "counters.json").string(),
                 {{"format", kCheckpointFormat},
                  {"version", kCheckpointVersion},
                  {"cumulative_training_steps", run.cumulative_training_steps},
                  {"cumulative_episodes", run.cumulative_episodes},
                  {"next_epoch", run.next_epoch},
                  {"stopped_early", run.stopped_early},
                  {"root_seed", run.config.seed}});
  for (const auto& [h, p] : run.store.all()) {
    save_json_file((dir / "policies" / (std::to_string(h.value) + ".json")).string(),
                   p->to_json());
  }
}

inline RunRecord resume(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto load = [&](const fs::path& p) {
    if (!fs::exists(p)) fail(ErrorCode::kCorruptCheckpoint, "missing " + p.string());
    return load_json_file(p.string());
  };
  auto check_header = [](const json& j, const std::string& what) {
    if (j.value("format", "") != kCheckpointFormat ||
        j.value("version", 0) != kCheckpointVersion) {
      fail(ErrorCode::kCorruptCheckpoint, what + ": bad format header");
    }
  };
  try {
    const json manifest = load(dir / "manifest.json");
    check_header(manifest, "manifest.json");
    RunRecord run;
    try {
      run.config = parse_run_config(manifest.at("config"));
    } catch (const Error& e) {
      fail(ErrorCode::kCorruptCheckpoint, std::string("manifest config: ") + e.what());
    }
    if (fs::exists(dir / "environment.json")) {
      run.env = MatrixGameEnv::from_json(load(dir / "environment.json"));
    } else {
      run.env = make_environment(run.config.env);
    }
    if (run.env->name() != manifest.at("env_name").get<std::string>()) {
      fail(ErrorCode::kCorruptCheckpoint, "environment name does not match manifest");
    }
    run.game = load(dir / "game.json").get<EmpiricalGame>();
    run.solution = manifest.at("solution").get<SolutionProfile>();
    for (const auto& r : manifest.at("epochs")) run.epochs.push_back(r.get<EpochRecord>());
    const json lib = load(dir / "library.json");
    check_header(lib, "library.json");
    for (const auto& row : lib.at("library")) {
      std::vector<PolicyHandle> handles;
      for (const auto& h : row) handles.push_back({h.get<std::uint64_t>()});
      run.library.push_back(handles);
    }
    const json counters = load(dir / "counters.json");
    check_header(counters, "counters.json");
    run.cumulative_training_steps = counters.at("cumulative_training_steps").get<std::uint64_t>();
    run.cumulative_episodes = counters.at("cumulative_episodes").get<std::uint64_t>();
    run.next_epoch = counters.at("next_epoch").get<std::uint64_t>();
    run.stopped_early = counters.at("stopped_early").get<bool>();
    if (counters.at("root_seed").get<std::uint64_t>() != run.config.seed) {
      fail(ErrorCode::kCorruptCheckpoint, "counters.json seed does not match config");
    }
    for (const auto& entry : fs::directory_iterator(dir / "policies")) {
      const auto stem = entry.path().stem().string();
      std::uint64_t id = 0;
      try {
        id = std::stoull(stem);
      } catch (const std::exception&) {
        fail(ErrorCode::kCorruptCheckpoint, "unexpected policy file " + entry.path().string());
      }
      run.store.put({id}, policy_from_json(load_json_file(entry.path().string())));
    }
    for (int p = 0; p < run.game.n_players(); ++p) {
      for (const auto& h : run.game.strategies(p)) run.store.get(h);
    }
    for (const auto& row : run.library) {
      for (const auto& h : row) run.store.get(h);
    }
    return run;
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptCheckpoint, std::string("checkpoint ") + dir.string() + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    fail(ErrorCode::kCorruptCheckpoint, std::string("checkpoint ") + dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptCheckpoint) throw;
    fail(ErrorCode::kCorruptCheckpoint, std::string("checkpoint ") + dir.string() + ": " + e.what());
  }
}

}  // namespace mixpsro

#endif  // MIXPSRO_ENGINE_HPP_

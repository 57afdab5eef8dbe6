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

// Random search over oracle hyperparameters.
//
// Each sampled configuration is scored twice. The pure score is the mean
// final greedy return over k trainings, one per opponent policy. The mix score
// is the final greedy return of one training against the uniform mixture of
// the k policies. The best configuration for each task is returned; ties go
// to the configuration sampled first.

#ifndef MIXPSRO_HPARAM_SEARCH_HPP_
#define MIXPSRO_HPARAM_SEARCH_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "mixpsro/config.hpp"
#include "mixpsro/engine.hpp"
#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/rng.hpp"
#include "mixpsro/simulate.hpp"
#include "mixpsro/value_oracle.hpp"

namespace mixpsro {

struct HParamSearchSpec {
  std::vector<std::uint64_t> batch_size{32, 64};
  std::vector<std::uint64_t> replay_capacity{300, 1000, 3000, 10000};
  std::vector<std::uint64_t> min_replay_size{100, 300, 1000};
  std::vector<double> learning_rate{1e-3, 3e-3, 1e-4, 3e-4};
  std::vector<std::uint64_t> exploration_timesteps{300, 1000, 3000, 10000, 30000, 100000};
  std::vector<std::uint64_t> total_timesteps{1000, 3000, 10000, 30000, 100000, 300000};
  // Fields not searched (discount, epsilon range) come from here.
  OracleHParams base;
  std::size_t sample_count = 30;
  std::size_t opponent_count = 5;
  std::uint64_t seed = 0;
  // Episodes per greedy evaluation; matrix games are evaluated exactly.
  std::uint64_t eval_episodes = 100;
  // PSRO epochs used to build an opponent pool when none is supplied.
  std::uint64_t phase_one_epochs = 3;

  void validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
      fail(ErrorCode::kConfigError, "hparam_search." + field + ": " + why);
    };
    if (sample_count < 1) bad("sample_count", "must be >= 1");
    if (opponent_count < 1) bad("opponent_count", "must be >= 1");
    if (eval_episodes < 1) bad("eval_episodes", "must be >= 1");
    if (phase_one_epochs < 1) bad("phase_one_epochs", "must be >= 1");
    if (batch_size.empty()) bad("batch_size", "candidate list is empty");
    if (replay_capacity.empty()) bad("replay_capacity", "candidate list is empty");
    if (min_replay_size.empty()) bad("min_replay_size", "candidate list is empty");
    if (learning_rate.empty()) bad("learning_rate", "candidate list is empty");
    if (exploration_timesteps.empty()) bad("exploration_timesteps", "candidate list is empty");
    if (total_timesteps.empty()) bad("total_timesteps", "candidate list is empty");
  }
};

inline HParamSearchSpec parse_hparam_search_spec(const json& j, const OracleHParams& base) {
  detail::check_keys(j, "hparam_search",
                     {"batch_size", "replay_capacity", "min_replay_size", "learning_rate",
                      "exploration_timesteps", "total_timesteps", "sample_count",
                      "opponent_count", "seed", "eval_episodes", "phase_one_epochs"});
  using detail::field;
  HParamSearchSpec s;
  s.base = base;
  const std::string sec = "hparam_search";
  s.batch_size = field(j, sec, "batch_size", s.batch_size);
  s.replay_capacity = field(j, sec, "replay_capacity", s.replay_capacity);
  s.min_replay_size = field(j, sec, "min_replay_size", s.min_replay_size);
  s.learning_rate = field(j, sec, "learning_rate", s.learning_rate);
  s.exploration_timesteps = field(j, sec, "exploration_timesteps", s.exploration_timesteps);
  s.total_timesteps = field(j, sec, "total_timesteps", s.total_timesteps);
  s.sample_count = field(j, sec, "sample_count", s.sample_count);
  s.opponent_count = field(j, sec, "opponent_count", s.opponent_count);
  s.seed = field(j, sec, "seed", s.seed);
  s.eval_episodes = field(j, sec, "eval_episodes", s.eval_episodes);
  s.phase_one_epochs = field(j, sec, "phase_one_epochs", s.phase_one_epochs);
  s.validate();
  return s;
}

struct HParamSearchResult {
  OracleHParams pure;
  OracleHParams mix;
  std::vector<OracleHParams> candidates;
  std::vector<double> pure_scores;
  std::vector<double> mix_scores;
  std::size_t pure_index = 0;
  std::size_t mix_index = 0;
};

// Draws one configuration. Exploration is capped at the total budget.
inline OracleHParams sample_hparams(const HParamSearchSpec& spec, Rng& rng) {
  auto pick = [&](const auto& list) { return list[uniform_index(rng, list.size())]; };
  OracleHParams h = spec.base;
  h.batch_size = pick(spec.batch_size);
  h.replay_capacity = pick(spec.replay_capacity);
  h.min_replay_size = pick(spec.min_replay_size);
  h.learning_rate = pick(spec.learning_rate);
  h.exploration_timesteps = pick(spec.exploration_timesteps);
  h.total_timesteps = pick(spec.total_timesteps);
  h.exploration_timesteps = std::min(h.exploration_timesteps, h.total_timesteps);
  return h;
}

// Expected return of `learner` at seat 0 against `opponent` in every other
// seat. Exact for matrix games, simulated otherwise.
inline double greedy_return(const Environment& env, const Policy& learner,
                            const Policy& opponent, std::uint64_t episodes,
                            std::uint64_t seed) {
  const int n = env.num_players();
  if (const auto* m = dynamic_cast<const MatrixGameEnv*>(&env)) {
    std::vector<std::vector<double>> dists;
    for (int s = 0; s < n; ++s) {
      const Policy& p = s == 0 ? learner : opponent;
      dists.push_back(p.action_probabilities(MatrixGameEnv::observation_for(s), m->legal_for(s)));
    }
    return m->expected_returns(dists)[0];
  }
  std::vector<const Policy*> agents(static_cast<std::size_t>(n), &opponent);
  agents[0] = &learner;
  return estimate_payoffs(env, agents, episodes, seed)[0];
}

inline HParamSearchResult hparam_search(
    const HParamSearchSpec& spec, const Environment& env,
    const std::vector<std::shared_ptr<const Policy>>& opponents) {
  spec.validate();
  require(opponents.size() == spec.opponent_count, ErrorCode::kPrecondition,
          "expected " + std::to_string(spec.opponent_count) + " opponent policies, got " +
              std::to_string(opponents.size()));
  const int n = env.num_players();
  const std::size_t k = opponents.size();
  HParamSearchResult result;
  Rng sampler = make_rng(derive_seed(spec.seed, {tag("hps-sample")}));
  for (std::size_t c = 0; c < spec.sample_count; ++c) {
    result.candidates.push_back(sample_hparams(spec, sampler));
  }
  auto target_for = [&](OpponentSlot slot) {
    TrainingTarget t{0, std::vector<OpponentSlot>(static_cast<std::size_t>(n), slot)};
    t.opponents[0] = {};
    return t;
  };
  const std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
  for (std::size_t c = 0; c < result.candidates.size(); ++c) {
    const auto& h = result.candidates[c];
    const std::uint64_t cu = c;
    double pure = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      const std::uint64_t ou = o;
      Rng rng = make_rng(derive_seed(spec.seed, {tag("hps-pure"), cu, ou}));
      const auto r = train_best_response(env, target_for(OpponentSlot::fixed(opponents[o])), h, rng);
      pure += greedy_return(env, *r.policy, *opponents[o], spec.eval_episodes,
                            derive_seed(spec.seed, {tag("hps-eval"), cu, ou}));
    }
    result.pure_scores.push_back(pure / static_cast<double>(k));

    Rng rng = make_rng(derive_seed(spec.seed, {tag("hps-mix"), cu}));
    const auto r = train_best_response(env, target_for(OpponentSlot{opponents, uniform}), h, rng);
    double mix = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      const std::uint64_t ou = o;
      mix += greedy_return(env, *r.policy, *opponents[o], spec.eval_episodes,
                           derive_seed(spec.seed, {tag("hps-mix-eval"), cu, ou}));
    }
    result.mix_scores.push_back(mix / static_cast<double>(k));
  }
  for (std::size_t c = 1; c < result.candidates.size(); ++c) {
    if (result.pure_scores[c] > result.pure_scores[result.pure_index]) result.pure_index = c;
    if (result.mix_scores[c] > result.mix_scores[result.mix_index]) result.mix_index = c;
  }
  result.pure = result.candidates[result.pure_index];
  result.mix = result.candidates[result.mix_index];
  return result;
}

// Builds an opponent pool when none is supplied: searches against the
// uniform-random policy, runs PSRO with the winner for phase_one_epochs and
// samples `spec.opponent_count` policies from the final solution's support.
inline std::vector<std::shared_ptr<const Policy>> phase_one_opponents(
    const HParamSearchSpec& spec, const RunConfig& base_config,
    std::shared_ptr<const Environment> env) {
  HParamSearchSpec first = spec;
  first.opponent_count = 1;
  const auto random = ValuePolicy::uniform_random(env->num_actions(1));
  const auto found = hparam_search(first, *env, {random});
  RunConfig cfg = base_config;
  cfg.algorithm = Algorithm::kPsro;
  cfg.epochs = spec.phase_one_epochs;
  cfg.pure_hparams = found.pure;
  cfg.mix_hparams = found.mix;
  const auto run = run_algorithm(cfg, env);
  const int seat = 1 % env->num_players();
  const auto pool = run.policies(seat);
  const auto& w = run.solution.mixtures[static_cast<std::size_t>(seat)].weights;
  Rng rng = make_rng(derive_seed(spec.seed, {tag("hps-phase-one")}));
  std::vector<std::shared_ptr<const Policy>> out;
  for (std::size_t o = 0; o < spec.opponent_count; ++o) out.push_back(pool[sample_index(w, rng)]);
  return out;
}

inline json to_json(const HParamSearchResult& r) {
  json rows = json::array();
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    rows.push_back({{"hparams", r.candidates[c]},
                    {"pure_score", r.pure_scores[c]},
                    {"mix_score", r.mix_scores[c]}});
  }
  return {{"pure_hparams", r.pure},
          {"mix_hparams", r.mix},
          {"pure_index", r.pure_index},
          {"mix_index", r.mix_index},
          {"candidates", rows}};
}

}  // namespace mixpsro

#endif  // MIXPSRO_HPARAM_SEARCH_HPP_

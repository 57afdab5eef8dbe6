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

// Best-response oracles that produce value-based policies.
//
// TabularQOracle runs one-step Q-learning with linearly decaying epsilon
// exploration against opponents resampled from their mixtures at every episode
// start. ExactMatrixOracle computes action values of a matrix game in closed
// form and is used where a deterministic oracle is wanted.

#ifndef MIXPSRO_VALUE_ORACLE_HPP_
#define MIXPSRO_VALUE_ORACLE_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/rng.hpp"
#include "mixpsro/simulate.hpp"

namespace mixpsro {

// batch_size, replay_capacity and min_replay_size are parsed and persisted so
// configs stay interchangeable with replay-based learners, but the tabular
// learner does not read them.
struct OracleHParams {
  double learning_rate = 0.1;
  double discount = 0.0;
  std::uint64_t total_timesteps = 2000;
  std::uint64_t exploration_timesteps = 1000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.03;
  std::uint64_t batch_size = 32;
  std::uint64_t replay_capacity = 10000;
  std::uint64_t min_replay_size = 100;

  bool operator==(const OracleHParams&) const = default;

  void validate(const std::string& where = "hparams") const {
    auto bad = [&](const std::string& field, const std::string& why) {
      fail(ErrorCode::kConfigError, where + "." + field + ": " + why);
    };
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
      bad("learning_rate", "must be in (0, 1]");
    }
    if (!(discount >= 0.0 && discount <= 1.0)) bad("discount", "must be in [0, 1]");
    if (exploration_timesteps > total_timesteps) {
      bad("exploration_timesteps", "must not exceed total_timesteps");
    }
  }
};

inline void to_json(json& j, const OracleHParams& h) {
  j = json{{"learning_rate", h.learning_rate},
           {"discount", h.discount},
           {"total_timesteps", h.total_timesteps},
           {"exploration_timesteps", h.exploration_timesteps},
           {"epsilon_start", h.epsilon_start},
           {"epsilon_end", h.epsilon_end},
           {"batch_size", h.batch_size},
           {"replay_capacity", h.replay_capacity},
           {"min_replay_size", h.min_replay_size}};
}

inline void from_json(const json& j, OracleHParams& h) {
  OracleHParams d;
  h.learning_rate = j.value("learning_rate", d.learning_rate);
  h.discount = j.value("discount", d.discount);
  h.total_timesteps = j.value("total_timesteps", d.total_timesteps);
  h.exploration_timesteps = j.value("exploration_timesteps", d.exploration_timesteps);
  h.epsilon_start = j.value("epsilon_start", d.epsilon_start);
  h.epsilon_end = j.value("epsilon_end", d.epsilon_end);
  h.batch_size = j.value("batch_size", d.batch_size);
  h.replay_capacity = j.value("replay_capacity", d.replay_capacity);
  h.min_replay_size = j.value("min_replay_size", d.min_replay_size);
}

// Linear ramp from epsilon_start to epsilon_end over exploration_timesteps,
// flat afterwards.
inline double epsilon_at(std::uint64_t t, const OracleHParams& h) {
  if (t >= h.exploration_timesteps) return h.epsilon_end;
  const double frac = static_cast<double>(t) /
                      static_cast<double>(h.exploration_timesteps);
  return h.epsilon_start - (h.epsilon_start - h.epsilon_end) * frac;
}

// Distribution over the policies one opponent seat may field.
struct OpponentSlot {
  std::vector<std::shared_ptr<const Policy>> policies;
  std::vector<double> weights;

  static OpponentSlot fixed(std::shared_ptr<const Policy> p) {
    return {{std::move(p)}, {1.0}};
  }
};

// What a best response is trained against. `opponents` is indexed by player;
// the learner's own slot is ignored.
struct TrainingTarget {
  int learner = 0;
  std::vector<OpponentSlot> opponents;
};

struct TrainResult {
  std::shared_ptr<const Policy> policy;
  std::uint64_t steps = 0;
};

// Called at each training episode start with the sampled per-player policies
// (learner slot null).
using EpisodeStartHook = std::function<void(const std::vector<const Policy*>&)>;

class BestResponseOracle {
 public:
  virtual ~BestResponseOracle() = default;
  virtual std::string name() const = 0;
  virtual TrainResult train(const Environment& env, const TrainingTarget& target,
                            const OracleHParams& hparams, Rng& rng) const = 0;
};

namespace detail {

// Behaviour policy used while learning: epsilon-greedy over the live table,
// with epsilon read from the shared step counter.
class ExploringPolicy final : public Policy {
 public:
  ExploringPolicy(const QTable& table, const OracleHParams& h,
                  const std::uint64_t& steps)
      : table_(table), h_(h), steps_(steps) {}

  int action_count() const override { return table_.action_count(); }
  int act(const Observation& obs, std::span<const int> legal,
          Rng& rng) const override {
    const double eps = epsilon_at(steps_ + taken_, h_);
    ++taken_;
    if (uniform01(rng) < eps) return legal[uniform_index(rng, legal.size())];
    auto q = table_.values(obs.key);
    return greedy_action(q, legal);
  }
  std::vector<double> action_probabilities(const Observation& obs,
                                           std::span<const int> legal) const override {
    std::vector<double> p(static_cast<std::size_t>(action_count()), 0.0);
    auto q = table_.values(obs.key);
    p[static_cast<std::size_t>(greedy_action(q, legal))] = 1.0;
    return p;
  }
  json to_json() const override { return {}; }
  void reset_episode() { taken_ = 0; }

 private:
  const QTable& table_;
  const OracleHParams& h_;
  const std::uint64_t& steps_;
  mutable std::uint64_t taken_ = 0;
};

}  // namespace detail

// Q-learning best response. Opponent policies are drawn from their slots at
// each episode start and held for the whole episode. Learner transitions are
// applied in order after each episode; the final episode is truncated so that
// exactly total_timesteps learner steps are consumed. The step size for a
// state-action pair visited n times is max(learning_rate, 1/n).
inline TrainResult train_best_response(const Environment& env,
                                       const TrainingTarget& target,
                                       const OracleHParams& h, Rng& rng,
                                       const EpisodeStartHook& hook = {}) {
  if (h.total_timesteps == 0) fail(ErrorCode::kBudgetZero, "total_timesteps is 0");
  h.validate();
  const int n = env.num_players();
  const int learner = target.learner;
  require(target.opponents.size() == static_cast<std::size_t>(n),
          ErrorCode::kPrecondition, "need one opponent slot per player");
  auto table = std::make_shared<QTable>(env.num_actions(learner));
  std::uint64_t steps = 0;
  std::map<std::string, std::vector<std::uint64_t>> visits;
  detail::ExploringPolicy explorer(*table, h, steps);

  std::vector<const Policy*> agents(static_cast<std::size_t>(n), nullptr);
  SimulateOptions options;
  options.record.assign(static_cast<std::size_t>(n), false);
  options.record[static_cast<std::size_t>(learner)] = true;
  std::uint64_t episode = 0;
  while (steps < h.total_timesteps) {
    for (int p = 0; p < n; ++p) {
      if (p == learner) continue;
      const auto& slot = target.opponents[static_cast<std::size_t>(p)];
      require(!slot.policies.empty(), ErrorCode::kPrecondition,
              "empty opponent slot for player " + std::to_string(p));
      const std::size_t pick =
          slot.policies.size() == 1 ? 0 : sample_index(slot.weights, rng);
      agents[static_cast<std::size_t>(p)] = slot.policies[pick].get();
    }
    if (hook) {
      auto view = agents;
      view[static_cast<std::size_t>(learner)] = nullptr;
      hook(view);
    }
    agents[static_cast<std::size_t>(learner)] = &explorer;
    explorer.reset_episode();
    options.seating = episode_seating(env, episode++);
    auto result = simulate_episode(env, agents, rng, options);

    for (const auto& t : result.transitions[static_cast<std::size_t>(learner)]) {
      if (steps >= h.total_timesteps) break;
      double bootstrap = 0.0;
      if (!t.terminal && h.discount > 0.0) {
        const auto next = table->values(t.next_observation.key);
        bootstrap = next[static_cast<std::size_t>(greedy_action(next, t.next_legal))];
      }
      auto& row = table->row(t.observation.key);
      double& q = row[static_cast<std::size_t>(t.action)];
      auto& n_visits = visits[t.observation.key];
      if (n_visits.empty()) n_visits.assign(row.size(), 0);
      const auto seen = ++n_visits[static_cast<std::size_t>(t.action)];
      const double alpha = std::max(h.learning_rate, 1.0 / static_cast<double>(seen));
      q += alpha * (t.reward + h.discount * bootstrap - q);
      ++steps;
    }
  }
  return {std::make_shared<ValuePolicy>(table, ActionMode::kGreedy), steps};
}

inline TrainResult train_best_response(
    const Environment& env, int learner,
    const std::vector<std::shared_ptr<const Policy>>& opponents,
    const OracleHParams& h, Rng& rng) {
  TrainingTarget target{learner, {}};
  for (const auto& p : opponents) {
    target.opponents.push_back(p ? OpponentSlot::fixed(p) : OpponentSlot{});
  }
  return train_best_response(env, target, h, rng);
}

struct ExactResponse {
  std::shared_ptr<const ValuePolicy> policy;
  double value = 0.0;
  std::vector<double> action_values;
};

// Exact action values for `learner` against independent opponent action
// distributions (`opponent_dists[learner]` is ignored).
inline ExactResponse exact_best_response(const MatrixGameEnv& env, int learner,
                                         std::vector<std::vector<double>> opponent_dists) {
  const int n = env.num_players();
  require(opponent_dists.size() == static_cast<std::size_t>(n),
          ErrorCode::kPrecondition, "need one distribution per player");
  const int k = env.num_actions(learner);
  std::vector<double> values(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    std::vector<double> pure(static_cast<std::size_t>(k), 0.0);
    pure[static_cast<std::size_t>(a)] = 1.0;
    opponent_dists[static_cast<std::size_t>(learner)] = pure;
    values[static_cast<std::size_t>(a)] =
        env.expected_returns(opponent_dists)[static_cast<std::size_t>(learner)];
  }
  auto table = std::make_shared<QTable>(k);
  const auto obs = MatrixGameEnv::observation_for(learner);
  table->set(obs.key, values);
  const auto legal = env.legal_for(learner);
  const int best = greedy_action(values, legal);
  return {std::make_shared<ValuePolicy>(table, ActionMode::kGreedy),
          values[static_cast<std::size_t>(best)], values};
}

inline ExactResponse exact_best_response(const Environment& env, int learner,
                                         std::vector<std::vector<double>> opponent_dists) {
  const auto* matrix = dynamic_cast<const MatrixGameEnv*>(&env);
  if (matrix == nullptr) {
    fail(ErrorCode::kWrongEnvironment,
         "exact best response needs a matrix game, got " + env.name());
  }
  return exact_best_response(*matrix, learner, std::move(opponent_dists));
}

// Marginal action distribution of a policy slot at a matrix-game seat.
inline std::vector<double> slot_action_distribution(const MatrixGameEnv& env,
                                                    int seat,
                                                    const OpponentSlot& slot) {
  const auto obs = MatrixGameEnv::observation_for(seat);
  const auto legal = env.legal_for(seat);
  std::vector<double> dist(static_cast<std::size_t>(env.num_actions(seat)), 0.0);
  for (std::size_t i = 0; i < slot.policies.size(); ++i) {
    const double w = slot.policies.size() == 1 ? 1.0 : slot.weights[i];
    if (w == 0.0) continue;
    const auto p = slot.policies[i]->action_probabilities(obs, legal);
    for (std::size_t a = 0; a < dist.size(); ++a) dist[a] += w * p[a];
  }
  return dist;
}

class TabularQOracle final : public BestResponseOracle {
 public:
  std::string name() const override { return "tabular"; }
  TrainResult train(const Environment& env, const TrainingTarget& target,
                    const OracleHParams& hparams, Rng& rng) const override {
    return train_best_response(env, target, hparams, rng);
  }
};

// Consumes no simulation; reports zero training steps.
class ExactMatrixOracle final : public BestResponseOracle {
 public:
  std::string name() const override { return "exact"; }
  TrainResult train(const Environment& env, const TrainingTarget& target,
                    const OracleHParams&, Rng&) const override {
    const auto* matrix = dynamic_cast<const MatrixGameEnv*>(&env);
    if (matrix == nullptr) {
      fail(ErrorCode::kWrongEnvironment,
           "exact best response needs a matrix game, got " + env.name());
    }
    std::vector<std::vector<double>> dists(static_cast<std::size_t>(env.num_players()));
    for (int p = 0; p < env.num_players(); ++p) {
      if (p == target.learner) continue;
      dists[static_cast<std::size_t>(p)] = slot_action_distribution(
          *matrix, p, target.opponents[static_cast<std::size_t>(p)]);
    }
    return {exact_best_response(*matrix, target.learner, std::move(dists)).policy, 0};
  }
};

inline std::shared_ptr<const BestResponseOracle> make_oracle(const std::string& name) {
  if (name == "tabular") return std::make_shared<TabularQOracle>();
  if (name == "exact") return std::make_shared<ExactMatrixOracle>();
  fail(ErrorCode::kConfigError, "engine.oracle: unknown oracle '" + name + "'");
}

}  // namespace mixpsro

#endif  // MIXPSRO_VALUE_ORACLE_HPP_

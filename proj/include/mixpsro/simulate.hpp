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

#ifndef MIXPSRO_SIMULATE_HPP_
#define MIXPSRO_SIMULATE_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/rng.hpp"

namespace mixpsro {

struct Transition {
  Observation observation;
  std::vector<int> legal;
  int action = 0;
  double reward = 0.0;
  Observation next_observation;
  std::vector<int> next_legal;
  bool terminal = false;
  int seat = 0;
};

struct EpisodeResult {
  // Indexed by agent, not by seat.
  std::vector<double> returns;
  // Filled only for agents flagged in SimulateOptions::record.
  std::vector<std::vector<Transition>> transitions;
  std::vector<int> seating;
};

struct SimulateOptions {
  // seating[agent] = seat; empty means identity.
  std::vector<int> seating;
  // record[agent] = keep that agent's transitions; empty means none.
  std::vector<bool> record;
};

// Runs one episode with every agent's policy held fixed throughout.
inline EpisodeResult simulate_episode(const Environment& env,
                                      std::span<const Policy* const> policies,
                                      Rng& rng, const SimulateOptions& options = {}) {
  const int n = env.num_players();
  require(policies.size() == static_cast<std::size_t>(n), ErrorCode::kPrecondition,
          "policy count must equal player count");
  std::vector<int> seating = options.seating;
  if (seating.empty()) {
    seating.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) seating[static_cast<std::size_t>(a)] = a;
  }
  std::vector<int> agent_at(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) agent_at[static_cast<std::size_t>(seating[static_cast<std::size_t>(a)])] = a;

  EpisodeResult result;
  result.seating = seating;
  result.transitions.resize(static_cast<std::size_t>(n));
  auto recording = [&](int agent) {
    return static_cast<std::size_t>(agent) < options.record.size() &&
           options.record[static_cast<std::size_t>(agent)];
  };

  auto state = env.new_episode(rng);
  // Index of the agent's transition still waiting for its successor.
  std::vector<long> pending(static_cast<std::size_t>(n), -1);
  while (!state->is_terminal()) {
    const int seat = state->current_player();
    const int agent = agent_at[static_cast<std::size_t>(seat)];
    const auto legal = state->legal_actions();
    Observation obs = state->observation(seat);
    const int action =
        policies[static_cast<std::size_t>(agent)]->act(obs, legal, rng);
    if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
      fail(ErrorCode::kIllegalAction,
           "policy for agent " + std::to_string(agent) + " chose action " +
               std::to_string(action) + " in " + env.name());
    }
    if (recording(agent)) {
      auto& list = result.transitions[static_cast<std::size_t>(agent)];
      if (pending[static_cast<std::size_t>(agent)] >= 0) {
        auto& prev = list[static_cast<std::size_t>(pending[static_cast<std::size_t>(agent)])];
        prev.next_observation = obs;
        prev.next_legal = legal;
      }
      Transition t;
      t.observation = std::move(obs);
      t.legal = legal;
      t.action = action;
      t.seat = seat;
      list.push_back(std::move(t));
      pending[static_cast<std::size_t>(agent)] = static_cast<long>(list.size()) - 1;
    }
    state->apply(action);
  }

  const auto seat_returns = state->returns();
  result.returns.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    result.returns[static_cast<std::size_t>(a)] =
        seat_returns[static_cast<std::size_t>(seating[static_cast<std::size_t>(a)])];
    if (recording(a) && pending[static_cast<std::size_t>(a)] >= 0) {
      auto& last = result.transitions[static_cast<std::size_t>(a)]
                                     [static_cast<std::size_t>(pending[static_cast<std::size_t>(a)])];
      last.terminal = true;
      last.reward = result.returns[static_cast<std::size_t>(a)];
    }
  }
  return result;
}

inline EpisodeResult simulate_episode(
    const Environment& env, const std::vector<const Policy*>& policies, Rng& rng,
    const SimulateOptions& options = {}) {
  return simulate_episode(env, std::span<const Policy* const>(policies), rng,
                          options);
}

// Mean per-agent return over `episodes` episodes. Episode k draws from its own
// stream derived from (seed, k) and uses episode_seating(env, k), so the result
// does not depend on how episodes are split across workers.
inline std::vector<double> estimate_payoffs(const Environment& env,
                                            std::span<const Policy* const> profile,
                                            std::uint64_t episodes,
                                            std::uint64_t seed) {
  require(episodes >= 1, ErrorCode::kPrecondition, "episodes must be >= 1");
  std::vector<double> sum(profile.size(), 0.0);
  for (std::uint64_t k = 0; k < episodes; ++k) {
    Rng rng = make_rng(derive_seed(seed, {k}));
    SimulateOptions options;
    options.seating = episode_seating(env, k);
    auto r = simulate_episode(env, profile, rng, options);
    for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += r.returns[a];
  }
  for (double& s : sum) s /= static_cast<double>(episodes);
  return sum;
}

inline std::vector<double> estimate_payoffs(const Environment& env,
                                            const std::vector<const Policy*>& profile,
                                            std::uint64_t episodes,
                                            std::uint64_t seed) {
  return estimate_payoffs(env, std::span<const Policy* const>(profile), episodes,
                          seed);
}

}  // namespace mixpsro

#endif  // MIXPSRO_SIMULATE_HPP_

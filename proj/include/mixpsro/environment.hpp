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

#ifndef MIXPSRO_ENVIRONMENT_HPP_
#define MIXPSRO_ENVIRONMENT_HPP_

#include <memory>
#include <string>
#include <vector>

#include "mixpsro/rng.hpp"

namespace mixpsro {

// An agent's information state. `key` is the canonical byte encoding used to
// index value tables; distinct information states never share a key.
struct Observation {
  std::string key;
  std::vector<double> features;

  bool operator==(const Observation&) const = default;
};

inline constexpr int kTerminal = -1;

// Per-episode mutable state. Turn-based: simultaneous-move games expose their
// players one after another without revealing earlier moves.
class GameState {
 public:
  virtual ~GameState() = default;

  // Seat to act, or kTerminal.
  virtual int current_player() const = 0;
  virtual std::vector<int> legal_actions() const = 0;
  virtual Observation observation(int seat) const = 0;
  virtual void apply(int action) = 0;
  // Per-seat undiscounted return; only meaningful once terminal.
  virtual std::vector<double> returns() const = 0;
  virtual std::unique_ptr<GameState> clone() const = 0;

  bool is_terminal() const { return current_player() == kTerminal; }
};

// Immutable description of an episodic multiagent simulator.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int num_players() const = 0;
  virtual int num_actions(int seat) const = 0;
  // Starts an episode; chance outcomes are drawn from `rng`.
  virtual std::unique_ptr<GameState> new_episode(Rng& rng) const = 0;
  // Whether agents swap seats between episodes to average out position.
  virtual bool rotates_seats() const { return false; }
};

// Seat taken by each agent in episode `episode_index`. Rotating environments
// shift seats by the episode index; others keep the identity seating.
inline std::vector<int> episode_seating(const Environment& env,
                                        std::uint64_t episode_index) {
  const int n = env.num_players();
  std::vector<int> seating(static_cast<std::size_t>(n));
  const int shift = env.rotates_seats() ? static_cast<int>(episode_index % n) : 0;
  for (int a = 0; a < n; ++a) seating[static_cast<std::size_t>(a)] = (a + shift) % n;
  return seating;
}

}  // namespace mixpsro

#endif  // MIXPSRO_ENVIRONMENT_HPP_

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

#ifndef MIXPSRO_MATRIX_GAME_HPP_
#define MIXPSRO_MATRIX_GAME_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/game_model.hpp"

namespace mixpsro {

// One-shot n-player game given by a payoff tensor of shape
// action_counts x n_players, stored row-major.
class MatrixGameEnv final : public Environment {
 public:
  MatrixGameEnv(std::string name, std::vector<int> action_counts,
                std::vector<double> payoffs)
      : name_(std::move(name)),
        action_counts_(std::move(action_counts)),
        payoffs_(std::move(payoffs)) {
    require(!action_counts_.empty(), ErrorCode::kPrecondition, "no players");
    std::size_t cells = 1;
    for (int k : action_counts_) {
      require(k >= 1, ErrorCode::kPrecondition, "action count must be >= 1");
      cells *= static_cast<std::size_t>(k);
    }
    require(payoffs_.size() == cells * action_counts_.size(),
            ErrorCode::kPrecondition, "payoff tensor has the wrong size");
  }

  std::string name() const override { return name_; }
  int num_players() const override { return static_cast<int>(action_counts_.size()); }
  int num_actions(int seat) const override {
    return action_counts_.at(static_cast<std::size_t>(seat));
  }
  const std::vector<int>& action_counts() const { return action_counts_; }

  std::span<const double> payoff(std::span<const int> joint) const {
    std::size_t offset = 0;
    for (std::size_t j = 0; j < action_counts_.size(); ++j) {
      offset = offset * static_cast<std::size_t>(action_counts_[j]) +
               static_cast<std::size_t>(joint[j]);
    }
    return std::span<const double>(payoffs_).subspan(offset * action_counts_.size(),
                                                     action_counts_.size());
  }

  // Exact expected returns when each seat plays an independent action
  // distribution.
  std::vector<double> expected_returns(
      std::span<const std::vector<double>> distributions) const {
    const std::size_t n = action_counts_.size();
    require(distributions.size() == n, ErrorCode::kPrecondition,
            "need one distribution per player");
    std::vector<std::vector<std::size_t>> support(n);
    std::vector<std::size_t> sizes(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t a = 0; a < distributions[j].size(); ++a) {
        if (distributions[j][a] != 0.0) support[j].push_back(a);
      }
      sizes[j] = support[j].size();
    }
    std::vector<double> value(n, 0.0);
    std::vector<int> joint(n);
    for_each_profile(sizes, [&](const PureProfile& local) {
      double prob = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        joint[j] = static_cast<int>(support[j][local.index[j]]);
        prob *= distributions[j][static_cast<std::size_t>(joint[j])];
      }
      auto u = payoff(joint);
      for (std::size_t k = 0; k < n; ++k) value[k] += prob * u[k];
    });
    return value;
  }

  // Single information state per seat.
  static Observation observation_for(int seat) {
    return {"m" + std::to_string(seat), {1.0}};
  }
  std::vector<int> legal_for(int seat) const {
    std::vector<int> legal(static_cast<std::size_t>(num_actions(seat)));
    for (int a = 0; a < num_actions(seat); ++a) legal[static_cast<std::size_t>(a)] = a;
    return legal;
  }

  std::unique_ptr<GameState> new_episode(Rng&) const override;

  json to_json() const {
    return {{"name", name_}, {"action_counts", action_counts_}, {"payoffs", payoffs_}};
  }
  static std::shared_ptr<MatrixGameEnv> from_json(const json& j) {
    return std::make_shared<MatrixGameEnv>(j.value("name", std::string("matrix")),
                                           j.at("action_counts").get<std::vector<int>>(),
                                           j.at("payoffs").get<std::vector<double>>());
  }
  static std::shared_ptr<MatrixGameEnv> load(const std::string& path) {
    try {
      return from_json(load_json_file(path));
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, "matrix file " + path + ": " + e.what());
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfigError, "matrix file " + path + ": " + e.what());
    }
  }

 private:
  std::string name_;
  std::vector<int> action_counts_;
  std::vector<double> payoffs_;
};

class MatrixGameState final : public GameState {
 public:
  explicit MatrixGameState(const MatrixGameEnv& env)
      : env_(&env), joint_() {}

  int current_player() const override {
    return joint_.size() == env_->action_counts().size()
               ? kTerminal
               : static_cast<int>(joint_.size());
  }
  std::vector<int> legal_actions() const override {
    return env_->legal_for(current_player());
  }
  Observation observation(int seat) const override {
    return MatrixGameEnv::observation_for(seat);
  }
  void apply(int action) override { joint_.push_back(action); }
  std::vector<double> returns() const override {
    if (!is_terminal()) {
      return std::vector<double>(env_->action_counts().size(), 0.0);
    }
    auto u = env_->payoff(joint_);
    return {u.begin(), u.end()};
  }
  std::unique_ptr<GameState> clone() const override {
    return std::make_unique<MatrixGameState>(*this);
  }

 private:
  const MatrixGameEnv* env_;
  std::vector<int> joint_;
};

inline std::unique_ptr<GameState> MatrixGameEnv::new_episode(Rng&) const {
  return std::make_unique<MatrixGameState>(*this);
}

enum RpsAction { kRock = 0, kPaper = 1, kScissors = 2 };

// Rock-paper-scissors scored win = 1, tie = 0.5, loss = 0.
inline std::shared_ptr<MatrixGameEnv> make_rps() {
  std::vector<double> payoffs;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) {
        payoffs.insert(payoffs.end(), {0.5, 0.5});
      } else if ((a - b + 3) % 3 == 1) {
        payoffs.insert(payoffs.end(), {1.0, 0.0});
      } else {
        payoffs.insert(payoffs.end(), {0.0, 1.0});
      }
    }
  }
  return std::make_shared<MatrixGameEnv>("rps", std::vector<int>{3, 3},
                                         std::move(payoffs));
}

}  // namespace mixpsro

#endif  // MIXPSRO_MATRIX_GAME_HPP_

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

// Q-Mixing with a prior opponent weighting: the aggregate action value at an
// observation is the mixture-weighted sum of the component action values,
//
//   Q(o, a | sigma) = sum_k sigma_k * Q_k(o, a).
//
// The same aggregation serves two roles. combine_responses mixes a player's
// stored responses to individual opponent policies; combine_opponents mixes
// the opponent policies themselves into one fixed training target.

#ifndef MIXPSRO_Q_MIXING_HPP_
#define MIXPSRO_Q_MIXING_HPP_

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mixpsro/errors.hpp"
#include "mixpsro/game_model.hpp"
#include "mixpsro/policy.hpp"

namespace mixpsro {

class MixedQPolicy final : public ActionValues {
 public:
  MixedQPolicy(std::vector<std::shared_ptr<const ActionValues>> components,
               std::vector<double> weights)
      : components_(std::move(components)), weights_(std::move(weights)) {
    require(!components_.empty(), ErrorCode::kPrecondition, "no components");
    require(components_.size() == weights_.size(), ErrorCode::kPrecondition,
            "weights must align with components");
    double sum = 0.0;
    for (double w : weights_) {
      require(w >= 0.0, ErrorCode::kPrecondition, "negative mixture weight");
      sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kPrecondition,
            "mixture weights must sum to 1");
    action_count_ = components_.front()->action_count();
    for (const auto& c : components_) {
      require(c != nullptr && c->action_count() == action_count_,
              ErrorCode::kPrecondition, "components disagree on action count");
    }
  }

  int action_count() const override { return action_count_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::shared_ptr<const ActionValues>>& components() const {
    return components_;
  }

  // Components that never saw `key` contribute their default values.
  std::vector<double> values(const std::string& key) const override {
    std::vector<double> out(static_cast<std::size_t>(action_count_), 0.0);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto q = components_[k]->values(key);
      for (std::size_t a = 0; a < out.size(); ++a) out[a] += weights_[k] * q[a];
    }
    return out;
  }

  json to_json() const override {
    json comps = json::array();
    for (const auto& c : components_) comps.push_back(c->to_json());
    return {{"kind", "mixed-q"}, {"weights", weights_}, {"components", comps}};
  }

 private:
  std::vector<std::shared_ptr<const ActionValues>> components_;
  std::vector<double> weights_;
  int action_count_ = 0;
};

inline std::vector<double> mixed_q(const MixedQPolicy& policy,
                                   const Observation& observation) {
  return policy.values(observation.key);
}

namespace detail {

inline std::shared_ptr<const Policy> mix_policies(
    std::span<const std::shared_ptr<const Policy>> policies,
    const MixedStrategy& weights, ErrorCode missing_code,
    const std::string& what) {
  require(weights.valid(), ErrorCode::kPrecondition,
          "mixture is not a probability vector");
  std::vector<std::shared_ptr<const ActionValues>> components;
  std::vector<double> w;
  std::size_t only = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights.weights[k] == 0.0) continue;
    if (k >= policies.size() || policies[k] == nullptr) {
      fail(missing_code, what + " " + std::to_string(k) + " has no stored policy");
    }
    if (!policies[k]->is_value_based()) {
      fail(ErrorCode::kNotValueBased,
           what + " " + std::to_string(k) + " exposes no action values");
    }
    components.push_back(policies[k]->shared_value_source());
    w.push_back(weights.weights[k]);
    only = k;
  }
  // A single supported policy is returned as-is, keeping its acting mode.
  if (components.size() == 1) return policies[only];
  return std::make_shared<ValuePolicy>(
      std::make_shared<MixedQPolicy>(std::move(components), std::move(w)),
      ActionMode::kGreedy);
}

}  // namespace detail

// Response for a player given its library of per-opponent-policy responses
// (index j answers opponent strategy j) and the opponent's mixture.
inline std::shared_ptr<const Policy> combine_responses(
    std::span<const std::shared_ptr<const Policy>> responses,
    const MixedStrategy& opponent_solution) {
  return detail::mix_policies(responses, opponent_solution,
                              ErrorCode::kMissingResponse, "opponent strategy");
}

// Single fixed opponent standing in for a mixture over opponent policies.
inline std::shared_ptr<const Policy> combine_opponents(
    std::span<const std::shared_ptr<const Policy>> opponent_policies,
    const MixedStrategy& opponent_solution) {
  return detail::mix_policies(opponent_policies, opponent_solution,
                              ErrorCode::kPrecondition, "opponent policy");
}

// Rebuilds any value source written by ActionValues::to_json().
inline std::shared_ptr<const ActionValues> action_values_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "table") return QTable::from_json(j);
  if (kind == "mixed-q") {
    std::vector<std::shared_ptr<const ActionValues>> comps;
    for (const auto& c : j.at("components")) comps.push_back(action_values_from_json(c));
    return std::make_shared<MixedQPolicy>(std::move(comps),
                                          j.at("weights").get<std::vector<double>>());
  }
  fail(ErrorCode::kCorruptCheckpoint, "unknown value source kind " + kind);
}

inline std::shared_ptr<const Policy> policy_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "value") {
      return std::make_shared<ValuePolicy>(action_values_from_json(j.at("values")),
                                           action_mode_from_string(j.at("mode").get<std::string>()),
                                           j.at("epsilon").get<double>());
    }
    if (kind == "fixed") {
      return std::make_shared<FixedActionPolicy>(
          j.at("probabilities").get<std::vector<double>>());
    }
    fail(ErrorCode::kCorruptCheckpoint, "unknown policy kind " + kind);
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptCheckpoint, std::string("policy record: ") + e.what());
  }
}

}  // namespace mixpsro

#endif  // MIXPSRO_Q_MIXING_HPP_

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

// Acting policies and the action-value tables behind value-based ones.

#ifndef MIXPSRO_POLICY_HPP_
#define MIXPSRO_POLICY_HPP_

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/rng.hpp"

namespace mixpsro {

using json = nlohmann::json;

// Anything that maps an observation key to one value per action.
class ActionValues {
 public:
  virtual ~ActionValues() = default;
  virtual int action_count() const = 0;
  virtual std::vector<double> values(const std::string& key) const = 0;
  virtual json to_json() const = 0;
};

class QTable final : public ActionValues {
 public:
  explicit QTable(int action_count, double default_value = 0.0)
      : action_count_(action_count), default_value_(default_value) {}

  int action_count() const override { return action_count_; }
  double default_value() const { return default_value_; }

  std::vector<double> values(const std::string& key) const override {
    auto it = rows_.find(key);
    if (it == rows_.end()) {
      return std::vector<double>(static_cast<std::size_t>(action_count_),
                                 default_value_);
    }
    return it->second;
  }

  // Row for `key`, created at default_value on first access.
  std::vector<double>& row(const std::string& key) {
    auto it = rows_.find(key);
    if (it == rows_.end()) {
      it = rows_
               .emplace(key, std::vector<double>(
                                 static_cast<std::size_t>(action_count_),
                                 default_value_))
               .first;
    }
    return it->second;
  }

  void set(const std::string& key, std::vector<double> v) {
    require(v.size() == static_cast<std::size_t>(action_count_),
            ErrorCode::kPrecondition, "row length must equal action_count");
    rows_[key] = std::move(v);
  }

  bool contains(const std::string& key) const { return rows_.count(key) != 0; }
  std::size_t size() const { return rows_.size(); }
  const std::map<std::string, std::vector<double>>& rows() const {
    return rows_;
  }

  json to_json() const override {
    json rows = json::array();
    for (const auto& [k, v] : rows_) rows.push_back({{"key", k}, {"q", v}});
    return {{"kind", "table"},
            {"action_count", action_count_},
            {"default_value", default_value_},
            {"rows", rows}};
  }

  static std::shared_ptr<QTable> from_json(const json& j) {
    auto t = std::make_shared<QTable>(j.at("action_count").get<int>(),
                                      j.at("default_value").get<double>());
    for (const auto& r : j.at("rows")) {
      t->set(r.at("key").get<std::string>(), r.at("q").get<std::vector<double>>());
    }
    return t;
  }

 private:
  int action_count_;
  double default_value_;
  std::map<std::string, std::vector<double>> rows_;
};

// Highest-valued legal action; ties go to the lowest index.
inline int greedy_action(std::span<const double> values,
                         std::span<const int> legal) {
  require(!legal.empty(), ErrorCode::kPrecondition, "no legal actions");
  int best = legal[0];
  for (int a : legal) {
    if (values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(best)] ||
        (values[static_cast<std::size_t>(a)] == values[static_cast<std::size_t>(best)] &&
         a < best)) {
      best = a;
    }
  }
  return best;
}

class Policy {
 public:
  virtual ~Policy() = default;

  virtual int action_count() const = 0;
  virtual int act(const Observation& obs, std::span<const int> legal,
                  Rng& rng) const = 0;
  // Full-length action distribution (zero on illegal actions).
  virtual std::vector<double> action_probabilities(
      const Observation& obs, std::span<const int> legal) const = 0;
  // Non-null for value-based policies.
  virtual const ActionValues* value_source() const { return nullptr; }
  virtual std::shared_ptr<const ActionValues> shared_value_source() const {
    return nullptr;
  }
  virtual json to_json() const = 0;

  bool is_value_based() const { return value_source() != nullptr; }

  // Lowest-index mode of the action distribution.
  virtual int greedy(const Observation& obs, std::span<const int> legal) const {
    auto p = action_probabilities(obs, legal);
    return greedy_action(p, legal);
  }
};

enum class ActionMode { kGreedy, kEpsilonGreedy, kUniform };

inline std::string to_string(ActionMode m) {
  switch (m) {
    case ActionMode::kGreedy: return "greedy";
    case ActionMode::kEpsilonGreedy: return "epsilon-greedy";
    case ActionMode::kUniform: return "uniform";
  }
  return "greedy";
}

inline ActionMode action_mode_from_string(const std::string& s) {
  if (s == "greedy") return ActionMode::kGreedy;
  if (s == "epsilon-greedy") return ActionMode::kEpsilonGreedy;
  if (s == "uniform") return ActionMode::kUniform;
  fail(ErrorCode::kCorruptCheckpoint, "unknown action mode " + s);
}

// Acts on an ActionValues source. Uniform mode ignores the values entirely;
// it is how the initial random policy is represented.
class ValuePolicy final : public Policy {
 public:
  ValuePolicy(std::shared_ptr<const ActionValues> values, ActionMode mode,
              double epsilon = 0.0)
      : values_(std::move(values)), mode_(mode), epsilon_(epsilon) {
    require(values_ != nullptr, ErrorCode::kPrecondition, "null value source");
  }

  static std::shared_ptr<ValuePolicy> uniform_random(int action_count) {
    return std::make_shared<ValuePolicy>(std::make_shared<QTable>(action_count),
                                         ActionMode::kUniform);
  }

  int action_count() const override { return values_->action_count(); }
  ActionMode mode() const { return mode_; }
  double epsilon() const { return epsilon_; }
  const ActionValues* value_source() const override { return values_.get(); }
  std::shared_ptr<const ActionValues> shared_value_source() const override {
    return values_;
  }

  std::vector<double> q_values(const Observation& obs) const {
    return values_->values(obs.key);
  }

  int greedy(const Observation& obs, std::span<const int> legal) const override {
    if (mode_ == ActionMode::kUniform) return Policy::greedy(obs, legal);
    auto q = values_->values(obs.key);
    return greedy_action(q, legal);
  }

  int act(const Observation& obs, std::span<const int> legal,
          Rng& rng) const override {
    switch (mode_) {
      case ActionMode::kUniform:
        return legal[uniform_index(rng, legal.size())];
      case ActionMode::kEpsilonGreedy:
        if (uniform01(rng) < epsilon_) {
          return legal[uniform_index(rng, legal.size())];
        }
        [[fallthrough]];
      case ActionMode::kGreedy:
        break;
    }
    auto q = values_->values(obs.key);
    return greedy_action(q, legal);
  }

  std::vector<double> action_probabilities(
      const Observation& obs, std::span<const int> legal) const override {
    std::vector<double> p(static_cast<std::size_t>(action_count()), 0.0);
    const double n = static_cast<double>(legal.size());
    if (mode_ == ActionMode::kUniform) {
      for (int a : legal) p[static_cast<std::size_t>(a)] = 1.0 / n;
      return p;
    }
    const int g = greedy(obs, legal);
    if (mode_ == ActionMode::kEpsilonGreedy) {
      for (int a : legal) p[static_cast<std::size_t>(a)] = epsilon_ / n;
      p[static_cast<std::size_t>(g)] += 1.0 - epsilon_;
    } else {
      p[static_cast<std::size_t>(g)] = 1.0;
    }
    return p;
  }

  json to_json() const override {
    return {{"kind", "value"},
            {"mode", to_string(mode_)},
            {"epsilon", epsilon_},
            {"values", values_->to_json()}};
  }

 private:
  std::shared_ptr<const ActionValues> values_;
  ActionMode mode_;
  double epsilon_;
};

// State-independent action distribution, restricted to the legal set.
// Scripted opponents in matrix games use this; it is not value-based.
class FixedActionPolicy final : public Policy {
 public:
  explicit FixedActionPolicy(std::vector<double> probabilities)
      : probs_(std::move(probabilities)) {
    require(!probs_.empty(), ErrorCode::kPrecondition, "empty distribution");
    for (double p : probs_) {
      require(p >= 0.0, ErrorCode::kPrecondition, "negative probability");
    }
  }

  int action_count() const override { return static_cast<int>(probs_.size()); }
  const std::vector<double>& probabilities() const { return probs_; }

  std::vector<double> action_probabilities(
      const Observation&, std::span<const int> legal) const override {
    std::vector<double> p(probs_.size(), 0.0);
    double total = 0.0;
    for (int a : legal) total += probs_[static_cast<std::size_t>(a)];
    for (int a : legal) {
      p[static_cast<std::size_t>(a)] =
          total > 0.0 ? probs_[static_cast<std::size_t>(a)] / total
                      : 1.0 / static_cast<double>(legal.size());
    }
    return p;
  }

  int act(const Observation& obs, std::span<const int> legal,
          Rng& rng) const override {
    auto p = action_probabilities(obs, legal);
    return static_cast<int>(sample_index(p, rng));
  }

  json to_json() const override {
    return {{"kind", "fixed"}, {"probabilities", probs_}};
  }

 private:
  std::vector<double> probs_;
};

}  // namespace mixpsro

#endif  // MIXPSRO_POLICY_HPP_

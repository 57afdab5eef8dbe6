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

// Normal-form and empirical-game data structures.
//
// An EmpiricalGame holds, per player, an append-only list of opaque policy
// handles plus a partially filled joint payoff table. Profiles are addressed
// by per-player strategy indices; the player of entry j is always j.

#ifndef MIXPSRO_GAME_MODEL_HPP_
#define MIXPSRO_GAME_MODEL_HPP_

#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mixpsro/errors.hpp"

namespace mixpsro {

using json = nlohmann::json;

struct PolicyHandle {
  std::uint64_t value = 0;
  auto operator<=>(const PolicyHandle&) const = default;
};

struct StrategyId {
  int player = 0;
  std::size_t index = 0;
  auto operator<=>(const StrategyId&) const = default;
};

// One strategy index per player, ordered lexicographically.
struct PureProfile {
  std::vector<std::size_t> index;

  std::size_t size() const { return index.size(); }
  StrategyId at(int player) const {
    return {player, index.at(static_cast<std::size_t>(player))};
  }
  auto operator<=>(const PureProfile&) const = default;
};

inline std::string to_string(const PureProfile& p) {
  std::string s = "(";
  for (std::size_t j = 0; j < p.index.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(p.index[j]);
  }
  return s + ")";
}

struct MixedStrategy {
  int player = 0;
  std::vector<double> weights;

  static MixedStrategy uniform(int player, std::size_t k) {
    return {player, std::vector<double>(k, 1.0 / static_cast<double>(k))};
  }
  static MixedStrategy pure(int player, std::size_t k, std::size_t which) {
    MixedStrategy m{player, std::vector<double>(k, 0.0)};
    m.weights.at(which) = 1.0;
    return m;
  }

  std::size_t size() const { return weights.size(); }

  bool valid(double tol = 1e-9) const {
    if (weights.empty()) return false;
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) return false;
      sum += w;
    }
    return std::abs(sum - 1.0) <= tol;
  }

  bool operator==(const MixedStrategy&) const = default;
};

inline void to_json(json& j, const MixedStrategy& m) {
  j = json{{"player", m.player}, {"weights", m.weights}};
}
inline void from_json(const json& j, MixedStrategy& m) {
  j.at("player").get_to(m.player);
  j.at("weights").get_to(m.weights);
}

// Running mean of per-player returns plus the number of episodes behind it.
struct PayoffCell {
  std::vector<double> mean;
  std::uint64_t count = 0;

  void merge(std::span<const double> batch_mean, std::uint64_t batch_count) {
    if (count == 0) {
      mean.assign(batch_mean.begin(), batch_mean.end());
      count = batch_count;
      return;
    }
    const double total = static_cast<double>(count + batch_count);
    for (std::size_t k = 0; k < mean.size(); ++k) {
      mean[k] = (mean[k] * static_cast<double>(count) +
                 batch_mean[k] * static_cast<double>(batch_count)) /
                total;
    }
    count += batch_count;
  }
};

class PayoffTable {
 public:
  explicit PayoffTable(int n_players = 0) : n_players_(n_players) {}

  void record(const PureProfile& profile, std::span<const double> batch_mean,
              std::uint64_t batch_count) {
    require(batch_mean.size() == static_cast<std::size_t>(n_players_),
            ErrorCode::kPrecondition, "payoff vector length must equal n");
    require(batch_count >= 1, ErrorCode::kPrecondition,
            "payoff cells need at least one sample");
    cells_[profile].merge(batch_mean, batch_count);
  }

  const PayoffCell* find(const PureProfile& profile) const {
    auto it = cells_.find(profile);
    return it == cells_.end() ? nullptr : &it->second;
  }
  bool contains(const PureProfile& profile) const {
    return cells_.count(profile) != 0;
  }
  std::size_t size() const { return cells_.size(); }
  int n_players() const { return n_players_; }
  const std::map<PureProfile, PayoffCell>& cells() const { return cells_; }

 private:
  int n_players_;
  std::map<PureProfile, PayoffCell> cells_;
};

// Visits every joint profile over `sizes` in lexicographic order.
inline void for_each_profile(std::span<const std::size_t> sizes,
                             const std::function<void(const PureProfile&)>& fn) {
  for (std::size_t s : sizes) {
    if (s == 0) return;
  }
  PureProfile p{std::vector<std::size_t>(sizes.size(), 0)};
  while (true) {
    fn(p);
    std::size_t j = sizes.size();
    while (j > 0) {
      --j;
      if (++p.index[j] < sizes[j]) break;
      p.index[j] = 0;
      if (j == 0) return;
    }
    if (sizes.empty()) return;
  }
}

class EmpiricalGame {
 public:
  EmpiricalGame() = default;
  explicit EmpiricalGame(int n_players)
      : strategy_sets_(static_cast<std::size_t>(n_players)),
        payoffs_(n_players) {
    require(n_players >= 1, ErrorCode::kPrecondition, "need at least one player");
  }

  int n_players() const { return static_cast<int>(strategy_sets_.size()); }
  int epoch() const { return epoch_; }
  void set_epoch(int e) { epoch_ = e; }

  StrategyId add_policy(int player, PolicyHandle handle) {
    auto& set = strategy_sets_.at(static_cast<std::size_t>(player));
    set.push_back(handle);
    return {player, set.size() - 1};
  }

  const std::vector<PolicyHandle>& strategies(int player) const {
    return strategy_sets_.at(static_cast<std::size_t>(player));
  }
  std::size_t num_strategies(int player) const {
    return strategies(player).size();
  }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& s : strategy_sets_) out.push_back(s.size());
    return out;
  }
  std::size_t num_profiles() const {
    std::size_t total = 1;
    for (const auto& s : strategy_sets_) total *= s.size();
    return total;
  }

  const PayoffTable& payoffs() const { return payoffs_; }

  void record(const PureProfile& profile, std::span<const double> mean,
              std::uint64_t count) {
    check_bounds(profile);
    payoffs_.record(profile, mean, count);
  }

  std::vector<PureProfile> missing_profiles() const {
    std::vector<PureProfile> out;
    const auto s = sizes();
    for_each_profile(s, [&](const PureProfile& p) {
      if (!payoffs_.contains(p)) out.push_back(p);
    });
    return out;
  }

  bool complete() const { return payoffs_.size() == num_profiles(); }

  const std::vector<double>& payoff(const PureProfile& profile) const {
    check_bounds(profile);
    const PayoffCell* cell = payoffs_.find(profile);
    if (cell == nullptr) {
      fail(ErrorCode::kMissingEntry,
           "profile " + to_string(profile) + " was never simulated");
    }
    return cell->mean;
  }

  // Bilinear (multilinear) extension of the payoff table. Profiles carrying
  // zero probability are skipped, so their cells may be missing.
  std::vector<double> expected_payoff(
      std::span<const MixedStrategy> mixture) const {
    require(mixture.size() == strategy_sets_.size(), ErrorCode::kPrecondition,
            "need one mixed strategy per player");
    std::vector<std::vector<std::size_t>> support(mixture.size());
    for (std::size_t j = 0; j < mixture.size(); ++j) {
      require(mixture[j].size() == strategy_sets_[j].size(),
              ErrorCode::kPrecondition,
              "mixture length differs from strategy-set size for player " +
                  std::to_string(j));
      for (std::size_t k = 0; k < mixture[j].size(); ++k) {
        if (mixture[j].weights[k] != 0.0) support[j].push_back(k);
      }
    }
    std::vector<double> value(strategy_sets_.size(), 0.0);
    std::vector<std::size_t> sizes;
    for (const auto& s : support) sizes.push_back(s.size());
    for_each_profile(sizes, [&](const PureProfile& local) {
      PureProfile p{std::vector<std::size_t>(local.size())};
      double prob = 1.0;
      for (std::size_t j = 0; j < local.size(); ++j) {
        p.index[j] = support[j][local.index[j]];
        prob *= mixture[j].weights[p.index[j]];
      }
      const auto& u = payoff(p);
      for (std::size_t k = 0; k < value.size(); ++k) value[k] += prob * u[k];
    });
    return value;
  }

  // u_i(k, sigma_{-i}) for every strategy k of `player`.
  std::vector<double> strategy_values(std::span<const MixedStrategy> mixture,
                                      int player) const {
    std::vector<MixedStrategy> probe(mixture.begin(), mixture.end());
    const std::size_t k = num_strategies(player);
    std::vector<double> out(k);
    for (std::size_t a = 0; a < k; ++a) {
      probe[static_cast<std::size_t>(player)] = MixedStrategy::pure(player, k, a);
      out[a] = expected_payoff(probe)[static_cast<std::size_t>(player)];
    }
    return out;
  }

  friend void to_json(json& j, const EmpiricalGame& g);
  friend void from_json(const json& j, EmpiricalGame& g);

 private:
  void check_bounds(const PureProfile& profile) const {
    if (profile.size() != strategy_sets_.size()) {
      fail(ErrorCode::kOutOfBounds, "profile length differs from player count");
    }
    for (std::size_t j = 0; j < profile.size(); ++j) {
      if (profile.index[j] >= strategy_sets_[j].size()) {
        fail(ErrorCode::kOutOfBounds,
             "strategy index " + std::to_string(profile.index[j]) +
                 " out of range for player " + std::to_string(j) + " (size " +
                 std::to_string(strategy_sets_[j].size()) + ")");
      }
    }
  }

  std::vector<std::vector<PolicyHandle>> strategy_sets_;
  PayoffTable payoffs_;
  int epoch_ = 0;
};

// Structured-text form: a versioned header, per-player strategy counts and
// handles, then one record per cell. Doubles are written in shortest
// round-trip form, so payoffs reload bit-exactly.
inline void to_json(json& j, const EmpiricalGame& g) {
  j = json::object();
  j["format"] = "mixpsro-game";
  j["version"] = 1;
  j["n_players"] = g.n_players();
  j["epoch"] = g.epoch_;
  json counts = json::array();
  json handles = json::array();
  for (const auto& set : g.strategy_sets_) {
    counts.push_back(set.size());
    json h = json::array();
    for (auto p : set) h.push_back(p.value);
    handles.push_back(h);
  }
  j["strategy_counts"] = counts;
  j["handles"] = handles;
  json cells = json::array();
  for (const auto& [profile, cell] : g.payoffs_.cells()) {
    cells.push_back(
        {{"profile", profile.index}, {"payoff", cell.mean}, {"count", cell.count}});
  }
  j["cells"] = cells;
}

inline void from_json(const json& j, EmpiricalGame& g) {
  if (j.value("format", "") != "mixpsro-game") {
    fail(ErrorCode::kCorruptCheckpoint, "not a game file");
  }
  const int n = j.at("n_players").get<int>();
  g = EmpiricalGame(n);
  g.epoch_ = j.at("epoch").get<int>();
  const auto& handles = j.at("handles");
  const auto& counts = j.at("strategy_counts");
  for (int p = 0; p < n; ++p) {
    const auto& h = handles.at(static_cast<std::size_t>(p));
    if (h.size() != counts.at(static_cast<std::size_t>(p)).get<std::size_t>()) {
      fail(ErrorCode::kCorruptCheckpoint, "strategy count mismatch");
    }
    for (const auto& v : h) g.add_policy(p, PolicyHandle{v.get<std::uint64_t>()});
  }
  for (const auto& c : j.at("cells")) {
    PureProfile profile{c.at("profile").get<std::vector<std::size_t>>()};
    auto payoff = c.at("payoff").get<std::vector<double>>();
    g.record(profile, payoff, c.at("count").get<std::uint64_t>());
  }
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kPrecondition,
          "cannot write " + path);
  out << j.dump(1) << "\n";
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kCorruptCheckpoint, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptCheckpoint, path + ": " + e.what());
  }
}

}  // namespace mixpsro

#endif  // MIXPSRO_GAME_MODEL_HPP_

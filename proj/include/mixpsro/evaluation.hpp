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

// Regret against deviation sets and greedy-action similarity of policies.

#ifndef MIXPSRO_EVALUATION_HPP_
#define MIXPSRO_EVALUATION_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/game_model.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/policy.hpp"
#include "mixpsro/rng.hpp"
#include "mixpsro/simulate.hpp"

namespace mixpsro {

// A policy with an id that is stable across runs; ids key both the matchup
// cache and the simulation seeds.
struct EvalPolicy {
  std::uint64_t id = 0;
  std::shared_ptr<const Policy> policy;
  std::string label;
};

struct PolicyMixture {
  std::vector<EvalPolicy> policies;
  std::vector<double> weights;
};

enum class DeviationOrigin { kPsro, kHeldOut };

struct DeviationSet {
  struct Entry {
    EvalPolicy policy;
    DeviationOrigin origin = DeviationOrigin::kPsro;
  };
  std::vector<std::vector<Entry>> per_player;

  static DeviationSet unite(const std::vector<std::vector<EvalPolicy>>& psro,
                            const std::vector<std::vector<EvalPolicy>>& held_out) {
    DeviationSet d;
    d.per_player.resize(std::max(psro.size(), held_out.size()));
    for (std::size_t p = 0; p < psro.size(); ++p) {
      for (const auto& e : psro[p]) d.per_player[p].push_back({e, DeviationOrigin::kPsro});
    }
    for (std::size_t p = 0; p < held_out.size(); ++p) {
      for (const auto& e : held_out[p]) {
        d.per_player[p].push_back({e, DeviationOrigin::kHeldOut});
      }
    }
    return d;
  }
};

// Payoffs of pure policy profiles. Matrix games are evaluated exactly from
// the policies' action distributions; anything else is simulated for
// `episodes` episodes with a seed derived from the profile's ids. Results are
// cached by id profile.
class MatchupEvaluator {
 public:
  MatchupEvaluator(std::shared_ptr<const Environment> env, std::uint64_t episodes,
                   std::uint64_t seed)
      : env_(std::move(env)), episodes_(episodes), seed_(seed) {
    require(episodes_ >= 1, ErrorCode::kPrecondition, "episodes must be >= 1");
    matrix_ = dynamic_cast<const MatrixGameEnv*>(env_.get());
  }

  bool analytic() const { return matrix_ != nullptr; }
  std::uint64_t episodes_simulated() const { return simulated_; }
  const Environment& env() const { return *env_; }

  std::vector<double> payoff(const std::vector<EvalPolicy>& profile) {
    std::vector<std::uint64_t> ids;
    for (const auto& p : profile) ids.push_back(p.id);
    auto it = cache_.find(ids);
    if (it != cache_.end()) return it->second;
    std::vector<double> u;
    if (matrix_ != nullptr) {
      std::vector<std::vector<double>> dists;
      for (std::size_t s = 0; s < profile.size(); ++s) {
        const int seat = static_cast<int>(s);
        dists.push_back(profile[s].policy->action_probabilities(
            MatrixGameEnv::observation_for(seat), matrix_->legal_for(seat)));
      }
      u = matrix_->expected_returns(dists);
    } else {
      std::vector<const Policy*> raw;
      for (const auto& p : profile) raw.push_back(p.policy.get());
      u = estimate_payoffs(*env_, raw, episodes_, derive_seed(seed_, ids));
      simulated_ += episodes_;
    }
    cache_.emplace(std::move(ids), u);
    return u;
  }

  // Expected payoff vector of a product of mixtures; zero weights skipped.
  std::vector<double> value(const std::vector<PolicyMixture>& sigma) {
    std::vector<double> total(sigma.size(), 0.0);
    std::vector<std::size_t> sizes;
    for (const auto& m : sigma) sizes.push_back(m.policies.size());
    for_each_profile(sizes, [&](const PureProfile& p) {
      double prob = 1.0;
      std::vector<EvalPolicy> profile;
      for (std::size_t j = 0; j < sigma.size(); ++j) {
        prob *= sigma[j].weights[p.index[j]];
        profile.push_back(sigma[j].policies[p.index[j]]);
      }
      if (prob == 0.0) return;
      const auto u = payoff(profile);
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += prob * u[k];
    });
    return total;
  }

  double deviation_value(const std::vector<PolicyMixture>& sigma, int player,
                         const EvalPolicy& deviation) {
    auto probe = sigma;
    probe[static_cast<std::size_t>(player)] = {{deviation}, {1.0}};
    return value(probe)[static_cast<std::size_t>(player)];
  }

 private:
  std::shared_ptr<const Environment> env_;
  std::uint64_t episodes_;
  std::uint64_t seed_;
  const MatrixGameEnv* matrix_ = nullptr;
  std::uint64_t simulated_ = 0;
  std::map<std::vector<std::uint64_t>, std::vector<double>> cache_;
};

// max over deviations of u_i(dev, sigma_-i) - u_i(sigma); may be negative.
inline std::vector<double> regret(MatchupEvaluator& evaluator,
                                  const std::vector<PolicyMixture>& sigma,
                                  const DeviationSet& deviations) {
  const auto base = evaluator.value(sigma);
  std::vector<double> out;
  for (std::size_t p = 0; p < sigma.size(); ++p) {
    if (p >= deviations.per_player.size() || deviations.per_player[p].empty()) {
      fail(ErrorCode::kEmptyDeviationSet, "no deviations for player " + std::to_string(p));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : deviations.per_player[p]) {
      best = std::max(best, evaluator.deviation_value(sigma, static_cast<int>(p), e.policy));
    }
    out.push_back(best - base[p]);
  }
  return out;
}

// Same quantity inside an empirical game, deviations given as strategy
// indices per player.
inline std::vector<double> regret(const EmpiricalGame& game,
                                  const std::vector<MixedStrategy>& sigma,
                                  const std::vector<std::vector<std::size_t>>& deviations) {
  const auto base = game.expected_payoff(sigma);
  std::vector<double> out;
  for (int p = 0; p < game.n_players(); ++p) {
    const auto& devs = deviations.at(static_cast<std::size_t>(p));
    if (devs.empty()) {
      fail(ErrorCode::kEmptyDeviationSet, "no deviations for player " + std::to_string(p));
    }
    const auto v = game.strategy_values(sigma, p);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k : devs) best = std::max(best, v.at(k));
    out.push_back(best - base[static_cast<std::size_t>(p)]);
  }
  return out;
}

// Regret against the union of discovered and held-out policies, clipped at 0.
inline std::vector<double> proxy_regret(MatchupEvaluator& evaluator,
                                        const std::vector<PolicyMixture>& sigma,
                                        const std::vector<std::vector<EvalPolicy>>& psro_set,
                                        const std::vector<std::vector<EvalPolicy>>& eval_set) {
  auto r = regret(evaluator, sigma, DeviationSet::unite(psro_set, eval_set));
  for (double& v : r) v = std::max(0.0, v);
  return r;
}

inline double sum_regret(std::span<const double> per_player) {
  return std::accumulate(per_player.begin(), per_player.end(), 0.0);
}

struct SimilarityReport {
  std::vector<std::string> labels;
  // agreement[i][j]: fraction of unique collected states where the greedy
  // actions of policies i and j coincide.
  std::vector<std::vector<double>> agreement;
  std::size_t states_collected = 0;
  std::size_t states_unique = 0;

  void write_tsv(std::ostream& out) const {
    out << "# states_collected=" << states_collected
        << " states_unique=" << states_unique << "\n";
    out << "policy";
    for (const auto& l : labels) out << "\t" << l;
    out << "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out << labels[i];
      for (double v : agreement[i]) out << "\t" << v;
      out << "\n";
    }
  }
};

// Simulates sampled profiles of the given policies, pools the observations
// of every agent, drops duplicate observation keys and compares greedy
// actions pairwise on what remains.
inline SimilarityReport similarity_report(const std::vector<EvalPolicy>& policies,
                                          const Environment& env,
                                          std::size_t profiles_to_sample,
                                          std::size_t episodes_per_profile, Rng& rng) {
  require(policies.size() >= 2, ErrorCode::kPrecondition, "need at least two policies");
  require(episodes_per_profile >= 1, ErrorCode::kPrecondition, "episodes must be >= 1");
  const int n = env.num_players();
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n), policies.size());
  std::vector<PureProfile> all;
  for_each_profile(sizes, [&](const PureProfile& p) { all.push_back(p); });
  if (profiles_to_sample > 0 && profiles_to_sample < all.size()) {
    for (std::size_t i = 0; i < profiles_to_sample; ++i) {
      std::swap(all[i], all[i + uniform_index(rng, all.size() - i)]);
    }
    all.resize(profiles_to_sample);
  }

  struct State {
    Observation obs;
    std::vector<int> legal;
  };
  std::map<std::string, State> corpus;
  std::size_t collected = 0;
  const std::uint64_t base = rng();
  SimulateOptions options;
  options.record.assign(static_cast<std::size_t>(n), true);
  for (std::size_t pi = 0; pi < all.size(); ++pi) {
    std::vector<const Policy*> agents;
    for (std::size_t k : all[pi].index) agents.push_back(policies[k].policy.get());
    for (std::size_t e = 0; e < episodes_per_profile; ++e) {
      Rng episode_rng = make_rng(derive_seed(base, {pi, e}));
      options.seating = episode_seating(env, e);
      const auto result = simulate_episode(env, agents, episode_rng, options);
      for (const auto& list : result.transitions) {
        for (const auto& t : list) {
          ++collected;
          corpus.emplace(t.observation.key, State{t.observation, t.legal});
        }
      }
    }
  }
  if (corpus.empty()) fail(ErrorCode::kEmptyCorpus, "no states were collected");

  const std::size_t m = policies.size();
  std::vector<std::vector<int>> greedy(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [key, s] : corpus) {
      greedy[i].push_back(policies[i].policy->greedy(s.obs, s.legal));
    }
  }
  SimilarityReport report;
  report.states_collected = collected;
  report.states_unique = corpus.size();
  report.agreement.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    report.labels.push_back(policies[i].label.empty() ? std::to_string(policies[i].id)
                                                      : policies[i].label);
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t agree = 0;
      for (std::size_t s = 0; s < corpus.size(); ++s) agree += greedy[i][s] == greedy[j][s];
      const double frac = static_cast<double>(agree) / static_cast<double>(corpus.size());
      report.agreement[i][j] = frac;
      report.agreement[j][i] = frac;
    }
  }
  return report;
}

}  // namespace mixpsro

#endif  // MIXPSRO_EVALUATION_HPP_

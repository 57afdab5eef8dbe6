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


#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "mixpsro/evaluation.hpp"
#include "mixpsro/leduc.hpp"
#include "mixpsro/matrix_game.hpp"
#include "mixpsro/meta_solvers.hpp"
#include "oracles.hpp"

namespace mixpsro {
namespace {

EvalPolicy fixed(std::uint64_t id, std::vector<double> probs) {
  return {id, std::make_shared<FixedActionPolicy>(std::move(probs)), "p" + std::to_string(id)};
}

PolicyMixture single(const EvalPolicy& p) { return {{p}, {1.0}}; }

// Hides the matrix structure so the evaluator has to simulate.
class OpaqueEnv final : public Environment {
 public:
  explicit OpaqueEnv(std::shared_ptr<const MatrixGameEnv> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "opaque-" + inner_->name(); }
  int num_players() const override { return inner_->num_players(); }
  int num_actions(int seat) const override { return inner_->num_actions(seat); }
  std::unique_ptr<GameState> new_episode(Rng& rng) const override {
    return inner_->new_episode(rng);
  }

 private:
  std::shared_ptr<const MatrixGameEnv> inner_;
};

TEST(Regret, EquilibriumOfWorkedExampleBlockHasZeroRegret) {
  EmpiricalGame g(2);
  g.add_policy(0, {0});
  g.add_policy(0, {1});
  g.add_policy(1, {2});
  g.add_policy(1, {3});
  const double b[2][2] = {{0.7, 0.15}, {0.2, 0.7}};
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      g.record(PureProfile{{r, c}}, std::vector<double>{1.0 - b[r][c], b[r][c]}, 1);
    }
  }
  const std::vector<MixedStrategy> sigma{{0, {10.0 / 21, 11.0 / 21}},
                                         {1, {11.0 / 21, 10.0 / 21}}};
  const auto r = regret(g, sigma, {{0, 1}, {0, 1}});
  EXPECT_NEAR(r[1], 0.0, 1e-12);
  EXPECT_NEAR(r[0], 0.0, 1e-12);
}

TEST(Regret, BestPureResponseHasZeroRegret) {
  MatchupEvaluator ev(make_rps(), 30, 1);
  const auto p1 = fixed(0, {0, 0.3, 0.7});
  const auto rock = fixed(1, {1, 0, 0});
  DeviationSet d;
  d.per_player = {{{p1, DeviationOrigin::kPsro}},
                  {{rock, DeviationOrigin::kPsro},
                   {fixed(2, {0, 1, 0}), DeviationOrigin::kPsro},
                   {fixed(3, {0, 0, 1}), DeviationOrigin::kPsro}}};
  const auto r = regret(ev, {single(p1), single(rock)}, d);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  EXPECT_NEAR(ev.value({single(p1), single(rock)})[1], 0.7, 1e-15);
  EXPECT_EQ(ev.episodes_simulated(), 0u);
}

TEST(Regret, EmptyDeviationSetRejected) {
  MatchupEvaluator ev(make_rps(), 30, 1);
  const auto p = fixed(0, {1, 0, 0});
  DeviationSet d;
  d.per_player = {{{p, DeviationOrigin::kPsro}}, {}};
  try {
    regret(ev, {single(p), single(p)}, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDeviationSet);
  }
}

TEST(ProxyRegret, ClipsAtZeroAndKeepsPositiveGains) {
  const auto rps = make_rps();
  MatchupEvaluator ev(rps, 30, 1);
  const auto rock = fixed(0, {1, 0, 0});
  const auto paper = fixed(1, {0, 1, 0});
  const auto scissors = fixed(2, {0, 0, 1});
  // Player 1 plays paper against rock; its only alternative, scissors, loses.
  auto r = proxy_regret(ev, {single(paper), single(rock)}, {{paper}, {rock}}, {{scissors}, {}});
  EXPECT_EQ(r[0], 0.0);
  // Against rock, (0.6 rock, 0.4 paper) scores 0.7 and pure paper scores 1.
  const auto part = fixed(3, {0.6, 0.4, 0});
  r = proxy_regret(ev, {single(part), single(rock)}, {{part}, {rock}}, {{paper}, {}});
  EXPECT_NEAR(r[0], 0.3, 1e-15);
  // (0.4 rock, 0.6 paper) scores 0.8, a gain of exactly 0.2.
  const auto part2 = fixed(4, {0.4, 0.6, 0});
  r = proxy_regret(ev, {single(part2), single(rock)}, {{part2}, {rock}}, {{paper}, {}});
  EXPECT_NEAR(r[0], 0.2, 1e-15);
}

struct RandomInstance {
  std::shared_ptr<MatrixGameEnv> env;
  std::vector<std::vector<EvalPolicy>> pool;
  std::vector<PolicyMixture> sigma;
};

RandomInstance random_instance(std::mt19937_64& rng, std::uint64_t& next_id) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int a0 = 2 + static_cast<int>(rng() % 3), a1 = 2 + static_cast<int>(rng() % 3);
  std::vector<double> payoffs;
  for (int i = 0; i < a0 * a1 * 2; ++i) payoffs.push_back(u(rng) * 2.0 - 1.0);
  RandomInstance inst;
  inst.env = std::make_shared<MatrixGameEnv>("random", std::vector<int>{a0, a1}, payoffs);
  for (int p = 0; p < 2; ++p) {
    std::vector<EvalPolicy> row;
    const int actions = p == 0 ? a0 : a1;
    const std::size_t k = 1 + rng() % 4;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> probs(static_cast<std::size_t>(actions));
      for (double& x : probs) x = u(rng);
      row.push_back(fixed(next_id++, probs));
    }
    PolicyMixture m;
    m.policies = row;
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += m.weights.emplace_back(u(rng));
    for (double& w : m.weights) w /= s;
    inst.sigma.push_back(m);
    inst.pool.push_back(row);
  }
  return inst;
}

TEST(ProxyRegret, NeverNegativeOnRandomInstances) {
  std::mt19937_64 rng(21);
  std::uint64_t id = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = random_instance(rng, id);
    MatchupEvaluator ev(inst.env, 30, 1);
    std::vector<std::vector<EvalPolicy>> held(2);
    for (int p = 0; p < 2; ++p) {
      const int actions = inst.env->num_actions(p);
      std::vector<double> probs(static_cast<std::size_t>(actions), 0.0);
      probs[rng() % actions] = 1.0;
      held[p].push_back(fixed(id++, probs));
    }
    const auto r = proxy_regret(ev, inst.sigma, inst.pool, held);
    const auto raw = regret(ev, inst.sigma, DeviationSet::unite(inst.pool, held));
    for (int p = 0; p < 2; ++p) {
      EXPECT_GE(r[p], 0.0);
      EXPECT_EQ(r[p], std::max(0.0, raw[p]));
    }
  }
}

TEST(Regret, MonotoneInTheDeviationSet) {
  std::mt19937_64 rng(22);
  std::uint64_t id = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = random_instance(rng, id);
    MatchupEvaluator ev(inst.env, 30, 1);
    DeviationSet small, large;
    for (int p = 0; p < 2; ++p) {
      small.per_player.emplace_back();
      large.per_player.emplace_back();
      for (const auto& e : inst.pool[p]) {
        large.per_player[p].push_back({e, DeviationOrigin::kPsro});
        if (small.per_player[p].empty() || rng() % 2 == 0) {
          small.per_player[p].push_back({e, DeviationOrigin::kPsro});
        }
      }
      const int actions = inst.env->num_actions(p);
      std::vector<double> probs(static_cast<std::size_t>(actions), 0.0);
      probs[rng() % actions] = 1.0;
      large.per_player[p].push_back({fixed(id++, probs), DeviationOrigin::kHeldOut});
    }
    const auto rs = regret(ev, inst.sigma, small);
    const auto rl = regret(ev, inst.sigma, large);
    for (int p = 0; p < 2; ++p) EXPECT_GE(rl[p], rs[p]);
  }
}

TEST(Regret, SimulatedApproachesAnalytic) {
  const auto rps = make_rps();
  auto opaque = std::make_shared<OpaqueEnv>(rps);
  const std::uint64_t episodes = 20000;
  MatchupEvaluator exact(rps, episodes, 5);
  MatchupEvaluator sim(opaque, episodes, 5);
  const auto a = fixed(0, {0.2, 0.5, 0.3});
  const auto b = fixed(1, {0.6, 0.1, 0.3});
  DeviationSet d;
  for (int p = 0; p < 2; ++p) {
    d.per_player.emplace_back();
    for (int k = 0; k < 3; ++k) {
      std::vector<double> probs(3, 0.0);
      probs[k] = 1.0;
      d.per_player[p].push_back({fixed(10 + 3 * p + k, probs), DeviationOrigin::kPsro});
    }
  }
  const auto re = regret(exact, {single(a), single(b)}, d);
  const auto rs = regret(sim, {single(a), single(b)}, d);
  EXPECT_GT(sim.episodes_simulated(), 0u);
  // Payoffs lie in [0, 1], so each estimate has sd <= 0.5 / sqrt(episodes);
  // regret combines two estimates.
  const double sigma = std::sqrt(2.0) * 0.5 / std::sqrt(static_cast<double>(episodes));
  for (int p = 0; p < 2; ++p) EXPECT_NEAR(rs[p], re[p], 4.0 * sigma);
}

TEST(SumRegret, Examples) {
  EXPECT_EQ(sum_regret(std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_NEAR(sum_regret(std::vector<double>{0.1, 0.3}), 0.4, 1e-15);
  EXPECT_EQ(sum_regret(std::vector<double>{0.25}), 0.25);
}

std::shared_ptr<ValuePolicy> table_policy(const std::map<std::string, std::vector<double>>& rows) {
  auto t = std::make_shared<QTable>(3);
  for (const auto& [k, v] : rows) t->set(k, v);
  return std::make_shared<ValuePolicy>(t, ActionMode::kGreedy);
}

TEST(Similarity, SelfAgreementAndDisjointArgmax) {
  const auto rps = make_rps();
  const auto a = table_policy({{"m0", {1, 0, 0}}, {"m1", {1, 0, 0}}});
  const auto b = table_policy({{"m0", {0, 1, 0}}, {"m1", {0, 0, 1}}});
  std::vector<EvalPolicy> pols{{0, a, "a"}, {1, a, "a-again"}, {2, b, "b"}};
  Rng rng = make_rng(1);
  const auto rep = similarity_report(pols, *rps, 0, 5, rng);
  EXPECT_EQ(rep.states_unique, 2u);
  EXPECT_EQ(rep.agreement[0][1], 1.0);
  EXPECT_EQ(rep.agreement[0][2], 0.0);
  std::ostringstream out;
  rep.write_tsv(out);
  EXPECT_NE(out.str().find("a-again"), std::string::npos);
}

TEST(Similarity, LeducCorpusIsDeduplicatedAndSymmetric) {
  LeducEnv leduc;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<EvalPolicy> pols;
  for (std::uint64_t i = 0; i < 4; ++i) {
    auto t = std::make_shared<QTable>(3, u(gen));
    pols.push_back({i, std::make_shared<ValuePolicy>(t, ActionMode::kEpsilonGreedy, 0.3), ""});
  }
  pols.push_back({4, ValuePolicy::uniform_random(3), "random"});
  Rng rng = make_rng(2);
  const auto rep = similarity_report(pols, leduc, 10, 30, rng);
  EXPECT_LT(rep.states_unique, rep.states_collected);
  for (std::size_t i = 0; i < pols.size(); ++i) {
    EXPECT_EQ(rep.agreement[i][i], 1.0);
    for (std::size_t j = 0; j < pols.size(); ++j) {
      EXPECT_EQ(rep.agreement[i][j], rep.agreement[j][i]);
      EXPECT_GE(rep.agreement[i][j], 0.0);
      EXPECT_LE(rep.agreement[i][j], 1.0);
    }
  }
}

class EmptyEnv final : public Environment {
 public:
  std::string name() const override { return "empty"; }
  int num_players() const override { return 2; }
  int num_actions(int) const override { return 1; }
  std::unique_ptr<GameState> new_episode(Rng&) const override {
    return std::make_unique<Done>();
  }

 private:
  struct Done final : GameState {
    int current_player() const override { return kTerminal; }
    std::vector<int> legal_actions() const override { return {}; }
    Observation observation(int) const override { return {}; }
    void apply(int) override {}
    std::vector<double> returns() const override { return {0, 0}; }
    std::unique_ptr<GameState> clone() const override { return std::make_unique<Done>(); }
  };
};

TEST(Similarity, EmptyCorpusRejected) {
  EmptyEnv env;
  const auto r = ValuePolicy::uniform_random(1);
  Rng rng = make_rng(1);
  try {
    similarity_report({{0, r, ""}, {1, r, ""}}, env, 0, 3, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

}  // namespace
}  // namespace mixpsro

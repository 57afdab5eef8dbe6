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

// Meta-strategy solvers: functions from a complete empirical game to one
// mixed strategy per player.

#ifndef MIXPSRO_META_SOLVERS_HPP_
#define MIXPSRO_META_SOLVERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "mixpsro/errors.hpp"
#include "mixpsro/game_model.hpp"

namespace mixpsro {

struct SolutionProfile {
  std::vector<MixedStrategy> mixtures;
  std::string solver_name;
  // Largest pure-deviation gain within the empirical game, clipped at 0.
  double residual = 0.0;

  bool operator==(const SolutionProfile&) const = default;
};

inline void to_json(json& j, const SolutionProfile& s) {
  j = json{{"mixtures", s.mixtures}, {"solver", s.solver_name}, {"residual", s.residual}};
}
inline void from_json(const json& j, SolutionProfile& s) {
  j.at("mixtures").get_to(s.mixtures);
  j.at("solver").get_to(s.solver_name);
  j.at("residual").get_to(s.residual);
}

struct SolverOptions {
  double tolerance = 1e-8;
  std::uint64_t replicator_steps = 10000;
  double replicator_step_size = 0.1;

  bool operator==(const SolverOptions&) const = default;
};

// Regret of each player against every pure strategy in the empirical game.
inline std::vector<double> empirical_regrets(const EmpiricalGame& game,
                                             const std::vector<MixedStrategy>& mixtures) {
  const auto value = game.expected_payoff(mixtures);
  std::vector<double> out;
  for (int p = 0; p < game.n_players(); ++p) {
    const auto v = game.strategy_values(mixtures, p);
    out.push_back(*std::max_element(v.begin(), v.end()) -
                  value[static_cast<std::size_t>(p)]);
  }
  return out;
}

inline double max_deviation_gain(const EmpiricalGame& game,
                                 const std::vector<MixedStrategy>& mixtures) {
  double worst = 0.0;
  for (double r : empirical_regrets(game, mixtures)) worst = std::max(worst, r);
  return worst;
}

namespace detail {

inline void require_complete(const EmpiricalGame& game) {
  if (!game.complete()) {
    fail(ErrorCode::kIncompleteGame,
         std::to_string(game.missing_profiles().size()) + " profiles lack payoffs");
  }
}

inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

constexpr double kRidge = 1e-12;
constexpr double kNegativeSlack = 1e-9;

// Mixture over `cols` that makes every row in `rows` of `payoff` equally good.
// Solves the indifference system in the least-squares sense with a small ridge
// and reports failure when the system is inconsistent or the solution is
// meaningfully negative.
inline bool indifference_mixture(const Eigen::MatrixXd& payoff,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols,
                                 double tolerance, std::vector<double>& out) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r + 1, c + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(r + 1);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = payoff(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]),
                       static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));
    }
    m(i, c) = -1.0;
  }
  for (Eigen::Index j = 0; j < c; ++j) m(r, j) = 1.0;
  b(r) = 1.0;
  Eigen::MatrixXd normal = m.transpose() * m;
  normal.diagonal().array() += kRidge;
  const Eigen::VectorXd sol = normal.ldlt().solve(m.transpose() * b);
  if (!sol.allFinite()) return false;
  if ((m * sol - b).cwiseAbs().maxCoeff() > std::max(tolerance, 1e-10)) return false;
  out.assign(static_cast<std::size_t>(c), 0.0);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < c; ++j) {
    if (sol(j) < -kNegativeSlack) return false;
    out[static_cast<std::size_t>(j)] = std::max(0.0, sol(j));
    sum += out[static_cast<std::size_t>(j)];
  }
  if (sum <= 0.0) return false;
  for (double& v : out) v /= sum;
  return true;
}

inline SolutionProfile solve_single_player(const EmpiricalGame& game) {
  const std::size_t k = game.num_strategies(0);
  std::size_t best = 0;
  for (std::size_t a = 1; a < k; ++a) {
    if (game.payoff({{a}})[0] > game.payoff({{best}})[0]) best = a;
  }
  return {{MixedStrategy::pure(0, k, best)}, "nash", 0.0};
}

}  // namespace detail

// Discrete-time replicator dynamics in exponential-weights form, started from
// the uniform profile. Every player updates simultaneously from the current
// profile; the returned point is the running average of the iterates, which
// is what converges in zero-sum games where the iterates themselves cycle.
inline SolutionProfile solve_replicator(const EmpiricalGame& game, std::uint64_t steps,
                                        double step_size) {
  detail::require_complete(game);
  const int n = game.n_players();
  std::vector<MixedStrategy> x;
  for (int p = 0; p < n; ++p) x.push_back(MixedStrategy::uniform(p, game.num_strategies(p)));
  std::vector<MixedStrategy> avg = x;
  for (auto& m : avg) std::fill(m.weights.begin(), m.weights.end(), 0.0);

  for (std::uint64_t t = 0; t < steps; ++t) {
    for (int p = 0; p < n; ++p) {
      auto& a = avg[static_cast<std::size_t>(p)].weights;
      const auto& cur = x[static_cast<std::size_t>(p)].weights;
      for (std::size_t k = 0; k < a.size(); ++k) a[k] += cur[k];
    }
    std::vector<MixedStrategy> next = x;
    for (int p = 0; p < n; ++p) {
      const auto v = game.strategy_values(x, p);
      const double top = *std::max_element(v.begin(), v.end());
      auto& w = next[static_cast<std::size_t>(p)].weights;
      double sum = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] *= std::exp(step_size * (v[k] - top));
        sum += w[k];
      }
      for (double& wk : w) wk /= sum;
    }
    x = std::move(next);
  }
  std::vector<MixedStrategy> result = steps == 0 ? x : avg;
  if (steps > 0) {
    for (auto& m : result) {
      double sum = 0.0;
      for (double w : m.weights) sum += w;
      for (double& w : m.weights) w /= sum;
    }
  }
  const double residual = max_deviation_gain(game, result);
  return {std::move(result), "replicator", residual};
}

// Exact Nash equilibrium of a two-player empirical game by support
// enumeration. Support pairs are visited by increasing total size, then by
// row-support size, then lexicographically; the first pair whose indifference
// solution is non-negative and admits no pure deviation gaining more than
// `tolerance` is returned. Games with other player counts fall back to
// replicator dynamics and report the achieved residual.
inline SolutionProfile solve_nash(const EmpiricalGame& game, double tolerance = 1e-8,
                                  const SolverOptions& fallback = {}) {
  detail::require_complete(game);
  if (game.n_players() == 1) return detail::solve_single_player(game);
  if (game.n_players() != 2) {
    auto s = solve_replicator(game, fallback.replicator_steps,
                              fallback.replicator_step_size);
    s.solver_name = "nash/replicator";
    return s;
  }
  const std::size_t m = game.num_strategies(0);
  const std::size_t k = game.num_strategies(1);
  Eigen::MatrixXd row_payoff(m, k), col_payoff(m, k);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto& u = game.payoff({{r, c}});
      row_payoff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u[0];
      col_payoff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u[1];
    }
  }
  const Eigen::MatrixXd col_payoff_t = col_payoff.transpose();

  double best_seen = std::numeric_limits<double>::infinity();
  for (std::size_t total = 2; total <= m + k; ++total) {
    const std::size_t lo = total > k ? total - k : 1;
    const std::size_t hi = std::min(m, total - 1);
    for (std::size_t rs = lo; rs <= hi; ++rs) {
      const std::size_t cs = total - rs;
      const auto row_sets = detail::combinations(m, rs);
      const auto col_sets = detail::combinations(k, cs);
      for (const auto& rows : row_sets) {
        for (const auto& cols : col_sets) {
          std::vector<double> y, x;
          // Column mixture equalizes the row player's payoffs over `rows`.
          if (!detail::indifference_mixture(row_payoff, rows, cols, tolerance, y)) continue;
          if (!detail::indifference_mixture(col_payoff_t, cols, rows, tolerance, x)) continue;
          std::vector<MixedStrategy> profile{{0, std::vector<double>(m, 0.0)},
                                             {1, std::vector<double>(k, 0.0)}};
          for (std::size_t i = 0; i < rows.size(); ++i) profile[0].weights[rows[i]] = x[i];
          for (std::size_t j = 0; j < cols.size(); ++j) profile[1].weights[cols[j]] = y[j];
          const double gain = max_deviation_gain(game, profile);
          best_seen = std::min(best_seen, gain);
          if (gain <= tolerance) return {std::move(profile), "nash", gain};
        }
      }
    }
  }
  fail(ErrorCode::kNoEquilibriumFound,
       "support enumeration exhausted on a " + std::to_string(m) + "x" +
           std::to_string(k) + " game; smallest residual " + std::to_string(best_seen) +
           " vs tolerance " + std::to_string(tolerance));
}

inline SolutionProfile solve_uniform(const EmpiricalGame& game) {
  std::vector<MixedStrategy> out;
  for (int p = 0; p < game.n_players(); ++p) {
    out.push_back(MixedStrategy::uniform(p, game.num_strategies(p)));
  }
  const double residual = game.complete() ? max_deviation_gain(game, out) : 0.0;
  return {std::move(out), "uniform", residual};
}

inline SolutionProfile solve_last(const EmpiricalGame& game) {
  std::vector<MixedStrategy> out;
  for (int p = 0; p < game.n_players(); ++p) {
    const std::size_t k = game.num_strategies(p);
    out.push_back(MixedStrategy::pure(p, k, k - 1));
  }
  const double residual = game.complete() ? max_deviation_gain(game, out) : 0.0;
  return {std::move(out), "last", residual};
}

inline bool is_solver_name(const std::string& name) {
  return name == "nash" || name == "replicator" || name == "uniform" || name == "last";
}

inline SolutionProfile solve_by_name(const std::string& name, const EmpiricalGame& game,
                                     const SolverOptions& options = {}) {
  if (name == "nash") return solve_nash(game, options.tolerance, options);
  if (name == "replicator") {
    return solve_replicator(game, options.replicator_steps, options.replicator_step_size);
  }
  if (name == "uniform") return solve_uniform(game);
  if (name == "last") return solve_last(game);
  fail(ErrorCode::kConfigError, "solver.name: unknown solver '" + name + "'");
}

}  // namespace mixpsro

#endif  // MIXPSRO_META_SOLVERS_HPP_

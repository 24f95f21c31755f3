// Copyright 2026 The onell-dac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "onell/errors.hpp"
#include "onell/qnetwork.hpp"
#include "onell/seeding.hpp"

namespace onell {

// Finite MDP with explicit transition probabilities T[s][a][s'] and rewards R[s][a].
struct TabularMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;  // (s * n_actions + a) * n_states + s'
  std::vector<double> reward;      // s * n_actions + a
  double gamma = 0.9;

  double& T(std::size_t s, std::size_t a, std::size_t s2) { return transition[(s * n_actions + a) * n_states + s2]; }
  double T(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  double& R(std::size_t s, std::size_t a) { return reward[s * n_actions + a]; }
  double R(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }

  static TabularMDP zeros(std::size_t n_states, std::size_t n_actions, double gamma) {
    TabularMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    m.transition.assign(n_states * n_actions * n_states, 0.0);
    m.reward.assign(n_states * n_actions, 0.0);
    return m;
  }

  // Dirichlet(1,...,1) transition rows, rewards ~ U(-1, 1).
  static TabularMDP random(std::size_t n_states, std::size_t n_actions, double gamma, Rng& rng) {
    TabularMDP m = zeros(n_states, n_actions, gamma);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t s = 0; s < n_states; ++s) {
      for (std::size_t a = 0; a < n_actions; ++a) {
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < n_states; ++s2) sum += (m.T(s, a, s2) = expo(rng));
        for (std::size_t s2 = 0; s2 < n_states; ++s2) m.T(s, a, s2) /= sum;
        m.R(s, a) = u(rng);
      }
    }
    return m;
  }

  void validate() const {
    if (n_states == 0 || n_actions == 0) throw InvalidParameterError("TabularMDP: empty state or action set");
    if (transition.size() != n_states * n_actions * n_states || reward.size() != n_states * n_actions) {
      throw DimensionError("TabularMDP: table sizes do not match n_states/n_actions");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameterError("TabularMDP: gamma must lie in (0, 1)");
    for (std::size_t s = 0; s < n_states; ++s) {
      for (std::size_t a = 0; a < n_actions; ++a) {
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < n_states; ++s2) {
          const double p = T(s, a, s2);
          if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameterError("TabularMDP: probability outside [0, 1]");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameterError("TabularMDP: transition row does not sum to 1");
      }
    }
  }

  TabularMDP with_reward_shift(double b) const {
    TabularMDP m = *this;
    for (double& r : m.reward) r += b;
    return m;
  }
};

struct ValueIterationResult {
  Matrix q;  // n_states x n_actions
  std::size_t sweeps = 0;
  std::vector<double> sup_changes;  // per sweep
};

// Q(s,a) <- R(s,a) + gamma * sum_s' T(s,a,s') max_a' Q(s',a') until the
// sup-norm change of one sweep drops below tol.
inline ValueIterationResult value_iterate(const TabularMDP& mdp, double tol) {
  if (!(tol > 0.0)) throw InvalidParameterError("value_iterate: tol must be positive");
  mdp.validate();
  const auto S = static_cast<Eigen::Index>(mdp.n_states);
  const auto A = static_cast<Eigen::Index>(mdp.n_actions);
  ValueIterationResult res;
  res.q = Matrix::Zero(S, A);
  Matrix next(S, A);
  Vector v(S);
  for (;;) {
    v = res.q.rowwise().maxCoeff();
    for (Eigen::Index s = 0; s < S; ++s) {
      for (Eigen::Index a = 0; a < A; ++a) {
        double expect = 0.0;
        for (Eigen::Index s2 = 0; s2 < S; ++s2) {
          expect += mdp.T(static_cast<std::size_t>(s), static_cast<std::size_t>(a), static_cast<std::size_t>(s2)) * v(s2);
        }
        next(s, a) = mdp.R(static_cast<std::size_t>(s), static_cast<std::size_t>(a)) + mdp.gamma * expect;
      }
    }
    const double change = (next - res.q).cwiseAbs().maxCoeff();
    res.q.swap(next);
    ++res.sweeps;
    res.sup_changes.push_back(change);
    if (change < tol) break;
  }
  return res;
}

// For each state, the set of actions within tie_tol of the row maximum.
inline std::vector<std::vector<std::size_t>> greedy_sets(const Matrix& q, double tie_tol) {
  std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const double m = q.row(s).maxCoeff();
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
      if (q(s, a) >= m - tie_tol) sets[static_cast<std::size_t>(s)].push_back(static_cast<std::size_t>(a));
    }
  }
  return sets;
}

struct ShiftCheckResult {
  double max_deviation = 0.0;  // max |Q'*(s,a) - Q*(s,a) - b / (1 - gamma)|
  double expected_shift = 0.0;
  bool same_greedy_policy = true;
};

// Solves the MDP with rewards R and R + b and compares the optimal Q tables.
inline ShiftCheckResult shift_check(const TabularMDP& mdp, double b, double tol, double tie_tol = 1e-9) {
  const Matrix q = value_iterate(mdp, tol).q;
  const Matrix q_shifted = value_iterate(mdp.with_reward_shift(b), tol).q;
  ShiftCheckResult r;
  r.expected_shift = b / (1.0 - mdp.gamma);
  r.max_deviation = (q_shifted.array() - q.array() - r.expected_shift).abs().maxCoeff();
  r.same_greedy_policy = greedy_sets(q, tie_tol) == greedy_sets(q_shifted, tie_tol);
  return r;
}

}  // namespace onell

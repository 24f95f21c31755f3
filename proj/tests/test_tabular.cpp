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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "onell/tabular_mdp.hpp"

namespace onell {
namespace {

TEST(ValueIteration, SingleStateSelfLoop) {
  auto m = TabularMDP::zeros(1, 2, 0.5);
  m.T(0, 0, 0) = m.T(0, 1, 0) = 1.0;
  m.R(0, 0) = 1.0;
  m.R(0, 1) = 2.0;
  const auto res = value_iterate(m, 1e-13);
  // V = 2 / (1 - gamma); Q(a) = R(a) + gamma V.
  EXPECT_NEAR(res.q(0, 1), 4.0, 1e-11);
  EXPECT_NEAR(res.q(0, 0), 3.0, 1e-11);
  auto small = m;
  small.gamma = 1e-3;
  const auto q = value_iterate(small, 1e-14).q;
  EXPECT_NEAR(q(0, 0), 1.0 / (1 - 1e-3), 3e-3);
  EXPECT_NEAR(q(0, 1), 2.0 / (1 - 1e-3), 1e-12);
}

TEST(ValueIteration, ZeroRewardsGiveZeroQ) {
  Rng rng(100);
  auto m = TabularMDP::random(4, 3, 0.9, rng);
  m.reward.assign(m.reward.size(), 0.0);
  EXPECT_TRUE(value_iterate(m, 1e-12).q.isZero());
}

TEST(ValueIteration, MatchesLinearSolveOfGreedyPolicy) {
  Rng rng(101);
  for (int t = 0; t < 50; ++t) {
    const auto m = TabularMDP::random(3, 3, 0.9, rng);
    const auto q = value_iterate(m, 1e-12).q;
    std::vector<std::size_t> greedy(3);
    for (Eigen::Index s = 0; s < 3; ++s) q.row(s).maxCoeff(&greedy[static_cast<std::size_t>(s)]);
    const Eigen::MatrixXd exact = oracle::policy_q_by_linear_solve(m, greedy);
    EXPECT_LT((q - exact).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ValueIteration, SweepsContract) {
  Rng rng(102);
  const auto m = TabularMDP::random(4, 3, 0.8, rng);
  const auto res = value_iterate(m, 1e-12);
  ASSERT_GE(res.sup_changes.size(), 2u);
  for (std::size_t i = 1; i < res.sup_changes.size(); ++i) {
    EXPECT_LE(res.sup_changes[i], 0.8 * res.sup_changes[i - 1] + 1e-15);
  }
  EXPECT_EQ(res.sweeps, res.sup_changes.size());
  EXPECT_THROW(value_iterate(m, 0.0), InvalidParameterError);
}

TEST(TabularMdp, RandomRowsAreDistributions) {
  Rng rng(103);
  const auto m = TabularMDP::random(5, 2, 0.99, rng);
  EXPECT_NO_THROW(m.validate());
  auto bad = m;
  bad.T(0, 0, 0) += 0.1;
  EXPECT_THROW(bad.validate(), InvalidParameterError);
}

TEST(Shaping, ConstantBiasShiftsQAndKeepsPolicy) {
  Rng rng(104);
  for (int t = 0; t < 100; ++t) {
    const auto m = TabularMDP::random(4, 3, 0.99, rng);
    for (double b : {-5.0, -3.0, 3.0}) {
      const auto r = shift_check(m, b, 1e-12);
      EXPECT_DOUBLE_EQ(r.expected_shift, b / (1 - 0.99));
      EXPECT_LT(r.max_deviation, 1e-6);
      EXPECT_TRUE(r.same_greedy_policy);
    }
  }
}

TEST(Shaping, ShiftedRewardsAreShifted) {
  Rng rng(105);
  const auto m = TabularMDP::random(3, 2, 0.9, rng);
  const auto s = m.with_reward_shift(-2.0);
  for (std::size_t i = 0; i < m.reward.size(); ++i) EXPECT_EQ(s.reward[i], m.reward[i] - 2.0);
  EXPECT_EQ(s.transition, m.transition);
}

TEST(GreedySets, TiesWithinTolerance) {
  Matrix q(2, 3);
  q << 1.0, 1.0 + 1e-12, 0.0, -1.0, -2.0, -0.5;
  const auto sets = greedy_sets(q, 1e-9);
  EXPECT_EQ(sets[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sets[1], (std::vector<std::size_t>{2}));
}

}  // namespace
}  // namespace onell

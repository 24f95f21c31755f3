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

#include "onell/onell_env.hpp"
#include "onell/rewards.hpp"

namespace onell {
namespace {

TEST(Reward, Examples) {
  EXPECT_EQ(reward(RewardSpec(RewardVariant::kNaive), 3, 16, 100), -13.0);
  EXPECT_DOUBLE_EQ(reward(RewardSpec(RewardVariant::kScaled), 3, 16, 100), -0.13);
  EXPECT_EQ(reward(RewardSpec(RewardVariant::kShiftFixed, -5.0), 3, 16, 100), -18.0);
  RewardSpec adaptive(RewardVariant::kShiftAdaptive);
  adaptive.resolve(-2.6);
  EXPECT_DOUBLE_EQ(reward(adaptive, 3, 16, 100), -15.6);
  RewardSpec scaled_adaptive(RewardVariant::kScaledShiftAdaptive);
  scaled_adaptive.resolve(-0.1);
  EXPECT_DOUBLE_EQ(reward(scaled_adaptive, 3, 16, 100), -0.23);
}

TEST(Reward, PreconditionsAndUnresolvedBias) {
  EXPECT_THROW(reward(RewardSpec(), 0, 0, 50), InvalidParameterError);
  EXPECT_THROW(reward(RewardSpec(), 0, 1, 1), InvalidParameterError);
  EXPECT_THROW(reward(RewardSpec(RewardVariant::kShiftAdaptive), 0, 1, 50), StateError);
  EXPECT_THROW(reward(RewardSpec(RewardVariant::kScaledShiftAdaptive), 0, 1, 50), StateError);
}

TEST(Reward, ScaleAndShiftConsistency) {
  for (std::size_t n : {50u, 100u}) {
    const RewardSpec naive(RewardVariant::kNaive), scaled(RewardVariant::kScaled);
    const RewardSpec shifted(RewardVariant::kShiftFixed, -5.0);
    for (std::size_t df = 0; df <= n; ++df) {
      for (std::uint64_t e = 1; e <= 2 * n; ++e) {
        const double r = reward(naive, df, e, n);
        ASSERT_EQ(r, static_cast<double>(df) - static_cast<double>(e));
        ASSERT_EQ(reward(scaled, df, e, n), r / static_cast<double>(n));
        ASSERT_EQ(reward(shifted, df, e, n) - r, -5.0);
      }
    }
  }
}

TEST(Reward, VariantNamesRoundTrip) {
  for (auto v : {RewardVariant::kNaive, RewardVariant::kScaled, RewardVariant::kShiftFixed,
                 RewardVariant::kShiftAdaptive, RewardVariant::kScaledShiftAdaptive}) {
    EXPECT_EQ(parse_reward_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_reward_variant("shifted"), InvalidParameterError);
}

TEST(Median, OddAndEvenLengths) {
  EXPECT_EQ(median({3.0}), 3.0);
  EXPECT_EQ(median({5.0, -1.0, 2.0}), 2.0);
  EXPECT_EQ(median({-1.0, -3.0}), -2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_EQ(median({-13.0, -13.0, -14.0, -12.0}), -13.0);
  EXPECT_THROW(median({}), StateError);
}

TEST(AdaptiveBias, Examples) {
  const std::vector<double> thirteen{-13.0, -20.0, -1.0};
  EXPECT_DOUBLE_EQ(resolve_adaptive_bias(thirteen), -2.6);
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(resolve_adaptive_bias(zeros), 0.0);
  const std::vector<double> pair{-1.0, -3.0};
  EXPECT_DOUBLE_EQ(resolve_adaptive_bias(pair), -0.4);
  const std::vector<double> positive{1.0, 2.0, 9.0, 10.0};
  EXPECT_DOUBLE_EQ(resolve_adaptive_bias(positive, 0.5), -2.75);
  EXPECT_THROW(resolve_adaptive_bias(std::vector<double>{}), StateError);
}

TEST(AdaptiveBias, NeverPositive) {
  Rng rng(40);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(1 + t % 17);
    for (auto& x : v) x = u(rng);
    EXPECT_LE(resolve_adaptive_bias(v, 0.2), 0.0);
  }
}

TEST(RewardSpec, BiasIsAssignedOnce) {
  RewardSpec spec(RewardVariant::kShiftAdaptive);
  EXPECT_TRUE(spec.needs_resolution());
  spec.resolve(-1.5);
  EXPECT_FALSE(spec.needs_resolution());
  EXPECT_THROW(spec.resolve(-2.0), StateError);
  EXPECT_EQ(spec.shift(), -1.5);
  EXPECT_THROW(RewardSpec(RewardVariant::kShiftFixed, 3.0).resolve(1.0), StateError);
  EXPECT_EQ(RewardSpec(RewardVariant::kScaledShiftAdaptive).base_variant(), RewardVariant::kScaled);
  EXPECT_EQ(RewardSpec(RewardVariant::kShiftAdaptive).base_variant(), RewardVariant::kNaive);
}

TEST(RewardBounds, Examples) {
  const auto scaled = reward_bounds(RewardSpec(RewardVariant::kScaled), 50);
  EXPECT_DOUBLE_EQ(scaled.first, -1.28);
  EXPECT_DOUBLE_EQ(scaled.second, 0.98);
  EXPECT_EQ(reward_bounds(RewardSpec(RewardVariant::kNaive), 50).first, -64.0);
  const auto shifted = reward_bounds(RewardSpec(RewardVariant::kShiftFixed, -5.0), 50);
  EXPECT_EQ(shifted.first, -69.0);
  EXPECT_EQ(shifted.second, 44.0);
}

TEST(RewardBounds, ContainObservedRewards) {
  Rng rng(41);
  for (std::size_t n : {8u, 50u}) {
    const auto inst = ProblemInstance::all_ones(n);
    const Portfolio pf(n);
    for (auto v : {RewardVariant::kNaive, RewardVariant::kScaled}) {
      const RewardSpec spec(v);
      const auto [lo, hi] = reward_bounds(spec, n);
      EnvState s;
      s.done_reason = DoneReason::kCutoff;
      for (int t = 0; t < 5000; ++t) {
        while (s.done()) s = reset(inst, default_cutoff(n), rng);
        const int lam = pf[std::uniform_int_distribution<std::size_t>(0, pf.size() - 1)(rng)];
        const auto o = ga_step(s, lam, inst, rng);
        const double r = reward(spec, o.delta_f, o.evals, n);
        ASSERT_GE(r, lo);
        ASSERT_LE(r, hi);
      }
    }
  }
}

}  // namespace
}  // namespace onell

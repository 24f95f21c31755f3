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

#include "onell/ddqn_agent.hpp"
#include "onell/replay_buffer.hpp"

namespace onell {
namespace {

TEST(SelectAction, FullExplorationIsUniform) {
  Rng rng(60);
  const QNetwork q({1, 4, 6});
  std::vector<int> counts(6, 0);
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) ++counts[select_action(q, 0.5, 1.0, rng)];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / kDraws, 1.0 / 6.0, 0.01);
}

TEST(SelectAction, GreedyFollowsArgmaxWithLowIndexTies) {
  Rng rng(61);
  QNetwork q({1, 4, 6});
  EXPECT_EQ(select_action(q, 0.4, 0.0, rng), 0u);
  q.layers().back().bias(2) = 0.5;
  EXPECT_EQ(select_action(q, 0.4, 0.0, rng), 2u);
}

TEST(SelectAction, ExplorationRate) {
  Rng rng(62);
  QNetwork q({1, 4, 6});
  q.layers().back().bias(3) = 1.0;
  int greedy = 0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) greedy += select_action(q, 0.1, 0.2, rng) == 3;
  // Greedy action chosen with probability 0.8 + 0.2 / 6.
  const double p = 0.8 + 0.2 / 6.0;
  EXPECT_NEAR(static_cast<double>(greedy) / kDraws, p, 5.0 * std::sqrt(p * (1 - p) / kDraws));
}

TEST(TdTarget, TerminalAndZeroDiscount) {
  Rng rng(63);
  const auto a = QNetwork::random({1, 8, 6}, rng);
  const auto b = QNetwork::random({1, 8, 6}, rng);
  EXPECT_EQ(td_target(-2.6, 0.3, true, a, b, 0.99), -2.6);
  EXPECT_EQ(td_target(-2.6, 0.3, false, a, b, 0.0), -2.6);
}

TEST(TdTarget, IdenticalNetworksGiveMaxQ) {
  Rng rng(64);
  const auto a = QNetwork::random({1, 8, 6}, rng);
  EXPECT_DOUBLE_EQ(td_target(1.0, 0.7, false, a, a, 0.9), 1.0 + 0.9 * a.q_values(0.7).maxCoeff());
}

TEST(TdTarget, OnlineSelectsTargetEvaluates) {
  QNetwork online({1, 1, 3});
  QNetwork target({1, 1, 3});
  online.layers()[1].bias << 0.0, 1.0, 0.5;
  target.layers()[1].bias << 5.0, 2.0, 7.0;
  // Online argmax is action 1; target argmax would be action 2.
  EXPECT_DOUBLE_EQ(td_target(-1.0, 0.5, false, online, target, 0.5), -1.0 + 0.5 * 2.0);
}

TEST(ReplayBuffer, FifoOverwrite) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) buf.push({static_cast<double>(i), 0, 0.0, 0.0, false});
  EXPECT_EQ(buf.size(), 5u);
  EXPECT_EQ(buf.total_pushed(), 8u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.at(i).s, static_cast<double>(i + 3));
  EXPECT_THROW(buf.at(5), std::out_of_range);
  EXPECT_THROW(ReplayBuffer(0), InvalidParameterError);
}

TEST(ReplayBuffer, SamplesUniformlyWithReplacement) {
  ReplayBuffer buf(4);
  for (int i = 0; i < 4; ++i) buf.push({static_cast<double>(i), 0, 0.0, 0.0, false});
  Rng rng(65);
  std::vector<std::size_t> idx;
  std::vector<int> counts(4, 0);
  buf.sample_indices(400000, rng, idx);
  for (std::size_t i : idx) ++counts[i];
  for (int c : counts) EXPECT_NEAR(c / 400000.0, 0.25, 0.005);
  ReplayBuffer empty(3);
  EXPECT_THROW(empty.sample_indices(1, rng, idx), StateError);
}

TEST(ReplayBuffer, ShiftRewards) {
  ReplayBuffer buf(3);
  buf.push({0.0, 1, -4.0, 0.1, false});
  buf.push({0.1, 2, -6.0, 0.2, true});
  buf.shift_rewards(-1.5);
  EXPECT_EQ(buf.at(0).r, -5.5);
  EXPECT_EQ(buf.at(1).r, -7.5);
}

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.batch = 64;
  cfg.warmup_transitions = 256;
  cfg.buffer_capacity = 100000;
  cfg.hidden = {16, 16};
  return cfg;
}

TEST(TrainStep, FixedTransitionRegressesToReward) {
  AgentConfig cfg = small_config();
  cfg.gamma = 0.0;
  cfg.lr = 1e-2;
  ReplayBuffer buf(100);
  for (int i = 0; i < 64; ++i) buf.push({0.4, 2, -3.25, 0.5, false});
  Rng rng(66);
  auto online = QNetwork::random(cfg.network_sizes(6), rng);
  auto target = online;
  Adam adam(online, AdamConfig{cfg.lr});
  TrainWorkspace ws;
  double loss = 0.0;
  for (int i = 0; i < 3000; ++i) loss = train_step(buf, online, target, adam, cfg, rng, ws);
  EXPECT_LT(std::abs(online.q_values(0.4)(2) + 3.25), 1e-3);
  EXPECT_LT(loss, 1e-6);
  EXPECT_TRUE(online.all_finite());
}

TEST(TrainStep, FullTauCopiesOnline) {
  AgentConfig cfg = small_config();
  cfg.tau = 1.0;
  ReplayBuffer buf(100);
  Rng rng(67);
  for (int i = 0; i < 80; ++i) buf.push({0.02 * (i % 50), static_cast<std::uint32_t>(i % 6), -1.0 * (i % 7), 0.02 * ((i + 1) % 50), i % 9 == 0});
  auto online = QNetwork::random(cfg.network_sizes(6), rng);
  auto target = QNetwork::random(cfg.network_sizes(6), rng);
  Adam adam(online, AdamConfig{cfg.lr});
  TrainWorkspace ws;
  train_step(buf, online, target, adam, cfg, rng, ws);
  EXPECT_EQ(target, online);
}

TEST(TrainStep, RejectsUnderfullBuffer) {
  AgentConfig cfg = small_config();
  ReplayBuffer buf(100);
  buf.push({0.0, 0, 0.0, 0.0, false});
  Rng rng(68);
  auto online = QNetwork(cfg.network_sizes(6));
  auto target = online;
  Adam adam(online);
  TrainWorkspace ws;
  EXPECT_THROW(train_step(buf, online, target, adam, cfg, rng, ws), StateError);
}

// The per-distinct-state computation must equal a plain full-batch pass over
// the same sampled transitions.
TEST(TrainStep, MatchesFullBatchComputation) {
  AgentConfig cfg = small_config();
  cfg.batch = 256;
  Rng rng(69);
  ReplayBuffer buf(1000);
  std::uniform_int_distribution<int> f(0, 49), a(0, 5);
  for (int i = 0; i < 500; ++i) {
    const int s = f(rng);
    buf.push({s / 50.0, static_cast<std::uint32_t>(a(rng)), -static_cast<double>(a(rng) * 3), std::min(s + 1, 49) / 50.0,
              i % 11 == 0});
  }
  auto online = QNetwork::random(cfg.network_sizes(6), rng);
  auto target = QNetwork::random(cfg.network_sizes(6), rng);
  auto ref_online = online;
  auto ref_target = target;
  Adam adam(online, AdamConfig{cfg.lr});
  Adam ref_adam(ref_online, AdamConfig{cfg.lr});
  TrainWorkspace ws;
  for (int step = 0; step < 5; ++step) {
    Rng sample_rng(derive_seed(70, "batch", static_cast<std::uint64_t>(step)));
    Rng ref_rng = sample_rng;
    const double loss = train_step(buf, online, target, adam, cfg, sample_rng, ws);

    std::vector<std::size_t> idx;
    buf.sample_indices(cfg.batch, ref_rng, idx);
    Matrix states(1, static_cast<Eigen::Index>(cfg.batch));
    std::vector<std::size_t> actions;
    std::vector<double> targets;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& t = buf.raw(idx[b]);
      states(0, static_cast<Eigen::Index>(b)) = t.s;
      actions.push_back(t.a);
      targets.push_back(td_target(t.r, t.s_next, t.done, ref_online, ref_target, cfg.gamma));
    }
    std::vector<DenseLayer> grad;
    ForwardCache cache;
    const double ref_loss = ref_online.loss_and_gradient(states, actions, targets, grad, cache);
    ref_adam.step(ref_online, grad);
    ref_target.soft_update_from(ref_online, cfg.tau);

    EXPECT_NEAR(loss, ref_loss, 1e-10 * std::max(1.0, ref_loss));
    const auto p = online.flat_parameters(), q = ref_online.flat_parameters();
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(p[i], q[i], 1e-10) << "step " << step;
  }
}

TEST(Warmup, CollectsRandomTransitions) {
  AgentConfig cfg;
  OneLLEnv env(ProblemInstance::all_ones(50), default_cutoff(50), 71);
  ReplayBuffer buf(cfg.buffer_capacity);
  Rng rng(72);
  const RewardSpec spec(RewardVariant::kNaive);
  const auto rewards = warmup(env, buf, spec, cfg, rng);
  EXPECT_EQ(buf.size(), 10000u);
  EXPECT_EQ(rewards.size(), 10000u);
  std::vector<int> counts(6, 0);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const auto& t = buf.at(i);
    ASSERT_LT(t.a, 6u);
    ++counts[t.a];
    EXPECT_EQ(t.r, rewards[i]);
    EXPECT_GE(t.s, 0.0);
    EXPECT_LE(t.s_next, 1.0);
    if (!t.done) {
      EXPECT_GE(t.s_next, t.s);
    }
  }
  for (int c : counts) EXPECT_GT(c, 1500);
  EXPECT_THROW(warmup(env, buf, spec, cfg, rng), StateError);
}

TEST(Warmup, AdaptiveSpecStoresBaseRewards) {
  AgentConfig cfg = small_config();
  OneLLEnv env(ProblemInstance::all_ones(30), default_cutoff(30), 73);
  ReplayBuffer buf(1000);
  Rng rng(74);
  const RewardSpec spec(RewardVariant::kScaledShiftAdaptive);
  const auto rewards = warmup(env, buf, spec, cfg, rng);
  for (std::size_t i = 0; i < buf.size(); ++i) EXPECT_EQ(buf.at(i).r, rewards[i]);
  for (double r : rewards) {
    EXPECT_GE(r, -2.0 * 16 / 30.0);
    EXPECT_LE(r, 29.0 / 30.0);
  }
}

TEST(Train, CheckpointCadenceAndCounters) {
  AgentConfig cfg = small_config();
  cfg.train_budget = 6000;
  OneLLEnv env(ProblemInstance::all_ones(20), default_cutoff(20), 75);
  RewardSpec spec(RewardVariant::kShiftAdaptive);
  Rng rng(76);
  std::vector<std::uint64_t> steps;
  const auto res = train(env, cfg, spec, rng, [&](const Checkpoint& c) {
    steps.push_back(c.step);
    EXPECT_EQ(c.policy, greedy_from_q(c.online, 20));
  });
  EXPECT_EQ(steps, (std::vector<std::uint64_t>{2000, 4000, 6000}));
  EXPECT_EQ(res.checkpoints, 3u);
  EXPECT_EQ(res.env_steps, 6000u);
  EXPECT_EQ(res.gradient_steps, res.env_steps);
  EXPECT_TRUE(res.finite);
  ASSERT_TRUE(res.resolved_bias.has_value());
  EXPECT_LE(*res.resolved_bias, 0.0);
  EXPECT_EQ(spec.resolved_bias(), res.resolved_bias);
  EXPECT_THROW(spec.resolve(0.0), StateError);
}

TEST(Train, ZeroBudgetReturnsInitialNetwork) {
  AgentConfig cfg = small_config();
  cfg.train_budget = 0;
  OneLLEnv env(ProblemInstance::all_ones(20), default_cutoff(20), 77);
  RewardSpec spec(RewardVariant::kNaive);
  Rng rng(78);
  int calls = 0;
  const auto res = train(env, cfg, spec, rng, [&](const Checkpoint&) { ++calls; });
  EXPECT_EQ(calls, 0);
  EXPECT_EQ(res.gradient_steps, 0u);
  EXPECT_EQ(res.online, res.target);
  Rng init(78);
  EXPECT_EQ(res.online, QNetwork::random(cfg.network_sizes(5), init));
  EXPECT_EQ(greedy_from_q(res.online, 20).n(), 20u);
  EXPECT_FALSE(res.resolved_bias.has_value());
}

TEST(Train, DeterministicForSeed) {
  auto run = [] {
    AgentConfig cfg = small_config();
    cfg.train_budget = 2000;
    OneLLEnv env(ProblemInstance::all_ones(20), default_cutoff(20), 79);
    RewardSpec spec(RewardVariant::kShiftFixed, -3.0);
    Rng rng(80);
    return train(env, cfg, spec, rng, [](const Checkpoint&) {}).online;
  };
  EXPECT_EQ(run(), run());
}

TEST(AgentConfig, ValidationAndBudget) {
  EXPECT_EQ(AgentConfig::default_budget(50), 500000u);
  EXPECT_EQ(AgentConfig::default_budget(500), 1500000u);
  EXPECT_NO_THROW(AgentConfig{}.validate());
  AgentConfig c;
  c.epsilon = 1.5;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = AgentConfig{};
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = AgentConfig{};
  c.gamma = 1.0;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  EXPECT_EQ(AgentConfig{}.network_sizes(6), (std::vector<int>{1, 50, 50, 6}));
}

}  // namespace
}  // namespace onell

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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "onell/errors.hpp"
#include "onell/onell_env.hpp"
#include "onell/policies.hpp"
#include "onell/qnetwork.hpp"
#include "onell/replay_buffer.hpp"
#include "onell/rewards.hpp"
#include "onell/seeding.hpp"

namespace onell {

struct AgentConfig {
  double epsilon = 0.2;
  double gamma = 0.99;
  double lr = 1e-3;
  std::size_t batch = 2048;
  double tau = 0.01;
  std::size_t warmup_transitions = 10000;
  std::uint64_t train_budget = 500000;
  std::size_t buffer_capacity = 1000000;
  std::vector<int> hidden = {50, 50};
  std::uint64_t checkpoint_every = 2000;

  // 1.5M steps for n >= 500, 500k otherwise.
  static std::uint64_t default_budget(std::size_t n) { return n >= 500 ? 1500000 : 500000; }

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidParameterError("epsilon must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameterError("gamma must lie in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidParameterError("tau must lie in (0, 1]");
    if (!(lr > 0.0)) throw InvalidParameterError("lr must be positive");
    if (batch == 0) throw InvalidParameterError("batch must be positive");
    if (buffer_capacity < warmup_transitions) throw InvalidParameterError("buffer smaller than warmup");
    if (warmup_transitions < batch) throw InvalidParameterError("warmup must provide at least one batch");
    if (checkpoint_every == 0) throw InvalidParameterError("checkpoint_every must be positive");
    for (int h : hidden) {
      if (h < 1) throw InvalidParameterError("hidden layer widths must be positive");
    }
  }

  std::vector<int> network_sizes(std::size_t num_actions) const {
    std::vector<int> s{1};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(static_cast<int>(num_actions));
    return s;
  }
};

// Epsilon-greedy: uniform action with probability epsilon, else argmax Q(s, .)
// with ties to the smallest index.
inline std::size_t select_action(const QNetwork& q, double state, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.output_dim() - 1);
    return pick(rng);
  }
  return argmax_first(q.q_values(state));
}

// Double-Q target: the online network picks the bootstrap action, the target
// network values it.
inline double td_target(double r, double s_next, bool done, const QNetwork& online, const QNetwork& target,
                        double gamma) {
  if (done) return r;
  const std::size_t a_star = argmax_first(online.q_values(s_next));
  return r + gamma * target.q_values(s_next)(static_cast<Eigen::Index>(a_star));
}

// Scratch memory for train_step, reused across calls.
struct TrainWorkspace {
  std::vector<std::size_t> indices;
  std::vector<double> unique_states;
  Matrix inputs;
  ForwardCache online;
  ForwardCache target;
  std::vector<DenseLayer> grad;
};

// One DDQN update: uniform minibatch, MSE against double-Q targets, one Adam
// step on `online`, then a soft update of `target`.
//
// The network input is one scalar taking few distinct values, so both
// networks are evaluated once per distinct state in the batch (covering s and
// s_next) and per-sample output gradients are summed per state before
// backpropagation. Equal inputs give equal activations, so this is the same
// gradient as a full-batch pass up to summation order.
inline double train_step(const ReplayBuffer& buffer, QNetwork& online, QNetwork& target, Adam& optimizer,
                         const AgentConfig& cfg, Rng& rng, TrainWorkspace& ws) {
  if (buffer.size() < cfg.batch) throw StateError("train_step: replay buffer holds fewer transitions than a batch");
  const std::size_t batch = cfg.batch;
  buffer.sample_indices(batch, rng, ws.indices);

  ws.unique_states.clear();
  for (std::size_t i : ws.indices) {
    const Transition& t = buffer.raw(i);
    ws.unique_states.push_back(t.s);
    ws.unique_states.push_back(t.s_next);
  }
  std::sort(ws.unique_states.begin(), ws.unique_states.end());
  ws.unique_states.erase(std::unique(ws.unique_states.begin(), ws.unique_states.end()), ws.unique_states.end());
  const auto column_of = [&](double v) {
    return static_cast<Eigen::Index>(std::lower_bound(ws.unique_states.begin(), ws.unique_states.end(), v) -
                                     ws.unique_states.begin());
  };
  const auto k = static_cast<Eigen::Index>(ws.unique_states.size());
  ws.inputs.resize(1, k);
  for (Eigen::Index c = 0; c < k; ++c) ws.inputs(0, c) = ws.unique_states[static_cast<std::size_t>(c)];

  const Matrix& q_online = online.forward(ws.inputs, ws.online);
  const Matrix& q_target = target.forward(ws.inputs, ws.target);

  // Greedy next action under the online network, per distinct state.
  std::vector<Eigen::Index> greedy(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) greedy[static_cast<std::size_t>(c)] =
      static_cast<Eigen::Index>(argmax_first(q_online.col(c)));

  ws.online.delta.setZero(q_online.rows(), k);
  const double scale = 2.0 / static_cast<double>(batch);
  double loss = 0.0;
  for (std::size_t i : ws.indices) {
    const Transition& t = buffer.raw(i);
    double y = t.r;
    if (!t.done) {
      const Eigen::Index cn = column_of(t.s_next);
      y += cfg.gamma * q_target(greedy[static_cast<std::size_t>(cn)], cn);
    }
    const Eigen::Index cs = column_of(t.s);
    const auto a = static_cast<Eigen::Index>(t.a);
    const double err = q_online(a, cs) - y;
    loss += err * err;
    ws.online.delta(a, cs) += scale * err;
  }
  loss /= static_cast<double>(batch);

  online.backward(ws.online, ws.grad);
  optimizer.step(online, ws.grad);
  target.soft_update_from(online, cfg.tau);
  return loss;
}

// Fills the buffer with cfg.warmup_transitions uniformly random-action
// transitions, restarting episodes as they end. Returns the base-variant
// (unshifted) rewards in order. For adaptive specs the stored rewards are
// unshifted too; train() shifts them once the bias is known.
inline std::vector<double> warmup(OneLLEnv& env, ReplayBuffer& buffer, const RewardSpec& spec,
                                  const AgentConfig& cfg, Rng& rng) {
  if (!buffer.empty()) throw StateError("warmup: replay buffer must start empty");
  const std::size_t n = env.n();
  std::uniform_int_distribution<std::size_t> pick(0, env.portfolio().size() - 1);
  std::vector<double> rewards;
  rewards.reserve(cfg.warmup_transitions);
  env.reset();
  while (rewards.size() < cfg.warmup_transitions) {
    if (env.state().done()) env.reset();
    const double s = encode_fitness(env.state().fitness, n);
    const std::size_t a = pick(rng);
    const StepOutcome o = env.step(a);
    const double base = base_reward(spec.base_variant(), o.delta_f, o.evals, n);
    const double stored = spec.needs_resolution() ? base : base + spec.shift();
    buffer.push({s, static_cast<std::uint32_t>(a), stored, encode_fitness(env.state().fitness, n), env.state().done()});
    rewards.push_back(base);
  }
  return rewards;
}

struct Checkpoint {
  std::uint64_t step = 0;
  const QNetwork& online;
  PolicyTable policy;
};

struct TrainResult {
  QNetwork online;
  QNetwork target;
  std::optional<double> resolved_bias;
  std::uint64_t env_steps = 0;
  std::uint64_t gradient_steps = 0;
  std::uint64_t episodes = 0;
  std::size_t checkpoints = 0;
  bool finite = true;
};

// Warmup, adaptive-bias resolution, then cfg.train_budget environment steps
// with one gradient update each. Every cfg.checkpoint_every steps the greedy
// policy is handed to `sink(const Checkpoint&)`.
template <typename Sink>
TrainResult train(OneLLEnv& env, const AgentConfig& cfg, RewardSpec& spec, Rng& rng, Sink&& sink) {
  cfg.validate();
  const std::size_t n = env.n();
  const std::size_t num_actions = env.portfolio().size();

  TrainResult res;
  res.online = QNetwork::random(cfg.network_sizes(num_actions), rng);
  res.target = res.online;
  Adam adam(res.online, AdamConfig{cfg.lr});

  ReplayBuffer buffer(cfg.buffer_capacity);
  const std::vector<double> warm = warmup(env, buffer, spec, cfg, rng);
  if (spec.needs_resolution()) {
    const double bias = resolve_adaptive_bias(warm, spec.adaptive_factor());
    spec.resolve(bias);
    buffer.shift_rewards(bias);
  }
  if (is_adaptive(spec.variant())) res.resolved_bias = spec.resolved_bias();

  TrainWorkspace ws;
  env.reset();
  res.episodes = 1;
  double s = encode_fitness(env.state().fitness, n);
  for (std::uint64_t step = 1; step <= cfg.train_budget; ++step) {
    const std::size_t a = select_action(res.online, s, cfg.epsilon, rng);
    const StepOutcome o = env.step(a);
    const double r = reward(spec, o.delta_f, o.evals, n);
    const bool done = env.state().done();
    const double s_next = encode_fitness(env.state().fitness, n);
    buffer.push({s, static_cast<std::uint32_t>(a), r, s_next, done});
    ++res.env_steps;

    train_step(buffer, res.online, res.target, adam, cfg, rng, ws);
    ++res.gradient_steps;

    if (done) {
      env.reset();
      ++res.episodes;
    }
    s = encode_fitness(env.state().fitness, n);

    if (step % cfg.checkpoint_every == 0) {
      res.finite = res.finite && res.online.all_finite();
      sink(Checkpoint{step, res.online, greedy_from_q(res.online, n)});
      ++res.checkpoints;
    }
  }
  res.finite = res.finite && res.online.all_finite() && res.target.all_finite();
  return res;
}

}  // namespace onell

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
#include <cstdint>
#include <string>
#include <vector>

#include "onell/bitstring.hpp"
#include "onell/ddqn_agent.hpp"
#include "onell/metrics.hpp"
#include "onell/policies.hpp"
#include "onell/qnetwork.hpp"
#include "onell/rewards.hpp"
#include "onell/stats.hpp"
#include "onell/tabular_mdp.hpp"

namespace onell {

struct CheckResult {
  std::string name;
  double observed = 0.0;
  std::string tolerance;
  bool passed = false;
};

// Norm-wise relative error ||g - g_fd|| / (||g|| + ||g_fd||) between the
// analytic gradient of the batch MSE and central differences with step h.
inline double gradient_check_error(const QNetwork& net, const Matrix& states, std::span<const std::size_t> actions,
                                   std::span<const double> targets, double h = 1e-6) {
  std::vector<DenseLayer> grad;
  ForwardCache cache;
  net.loss_and_gradient(states, actions, targets, grad, cache);
  QNetwork g_as_net = net;
  g_as_net.layers() = grad;
  const std::vector<double> analytic = g_as_net.flat_parameters();

  QNetwork probe = net;
  std::vector<double> params = net.flat_parameters();
  std::vector<DenseLayer> scratch;
  double diff2 = 0.0, a2 = 0.0, f2 = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    probe.set_flat_parameters(params);
    const double up = probe.loss_and_gradient(states, actions, targets, scratch, cache);
    params[i] = saved - h;
    probe.set_flat_parameters(params);
    const double down = probe.loss_and_gradient(states, actions, targets, scratch, cache);
    params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    diff2 += (analytic[i] - fd) * (analytic[i] - fd);
    a2 += analytic[i] * analytic[i];
    f2 += fd * fd;
  }
  const double denom = std::sqrt(a2) + std::sqrt(f2);
  return denom == 0.0 ? 0.0 : std::sqrt(diff2) / denom;
}

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

inline CheckResult check_bin_gt0(const VerifyOptions& opt) {
  constexpr std::size_t kN = 10;
  constexpr double kP = 0.1;
  constexpr std::size_t kDraws = 1000000;
  Rng rng(derive_seed(opt.seed, "verify-bin", 0));
  std::vector<std::size_t> counts(kN + 1, 0);
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[sample_bin_gt0(kN, kP, rng)];
  const auto pmf = stats::conditional_binomial_pmf(kN, kP);
  // Drop the impossible zero bin.
  const auto r = stats::chi_square_gof(std::span(counts).subspan(1), std::span(pmf).subspan(1));
  return {"bin_gt0_chi_square_p", r.p_value, "> 0.01", r.p_value > 0.01};
}

inline CheckResult check_gradients(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, "verify-grad", 0));
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const QNetwork net = QNetwork::random({1, 50, 50, 6}, rng);
    constexpr Eigen::Index kBatch = 16;
    Matrix states(1, kBatch);
    std::vector<std::size_t> actions(kBatch);
    std::vector<double> targets(kBatch);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> a(0, 5);
    std::normal_distribution<double> t(0.0, 2.0);
    for (Eigen::Index b = 0; b < kBatch; ++b) {
      states(0, b) = u(rng);
      actions[static_cast<std::size_t>(b)] = a(rng);
      targets[static_cast<std::size_t>(b)] = t(rng);
    }
    worst = std::max(worst, gradient_check_error(net, states, actions, targets));
  }
  return {"gradient_max_relative_error", worst, "<= 1e-4", worst <= 1e-4};
}

// Online prefers action 1 at s', target prefers action 0: the double-Q
// target must bootstrap from Q_target(s', 1).
inline CheckResult check_double_q(const VerifyOptions&) {
  QNetwork online({1, 1, 2});
  QNetwork target({1, 1, 2});
  online.layers()[1].bias << 0.0, 1.0;
  target.layers()[1].bias << 5.0, 2.0;
  const double r = -2.5, gamma = 0.9;
  const double got = td_target(r, 0.5, false, online, target, gamma);
  const double want = r + gamma * 2.0;
  const double err = std::abs(got - want);
  return {"double_q_target_error", err, "== 0", err == 0.0};
}

inline CheckResult check_shaping(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, "verify-shaping", 0));
  double worst = 0.0;
  bool same = true;
  for (int i = 0; i < 100; ++i) {
    const TabularMDP mdp = TabularMDP::random(4, 3, 0.99, rng);
    for (double b : {-5.0, -3.0, 3.0}) {
      const auto r = shift_check(mdp, b, 1e-12);
      worst = std::max(worst, r.max_deviation);
      same = same && r.same_greedy_policy;
    }
  }
  return {"reward_shift_q_deviation", worst, "< 1e-6 and identical greedy policies", worst < 1e-6 && same};
}

inline CheckResult check_cont_disc_equivalence(const VerifyOptions& opt) {
  constexpr std::size_t kN = 50;
  const auto inst = ProblemInstance::all_ones(kN);
  const EvalOptions eo{opt.seed, purpose::kFinalEval, opt.workers};
  const auto cont = evaluate_policy(ContinuousPolicy{kN}, inst, default_cutoff(kN), 1000, eo);
  const auto disc = evaluate_policy(discretize_policy(kN), inst, default_cutoff(kN), 1000, eo);
  const auto t = stats::paired_t_test(std::span<const std::uint64_t>(cont.runtimes),
                                      std::span<const std::uint64_t>(disc.runtimes));
  return {"pi_cont_vs_pi_disc_paired_t_p", t.p_value, "> 0.01", t.p_value > 0.01};
}

inline CheckResult check_reward_algebra(const VerifyOptions&) {
  double worst = 0.0;
  for (std::size_t n : {50u, 100u}) {
    const RewardSpec naive(RewardVariant::kNaive), scaled(RewardVariant::kScaled),
        shifted(RewardVariant::kShiftFixed, -3.0);
    for (std::size_t df = 0; df <= n; ++df) {
      for (std::uint64_t e = 1; e <= 2 * n; ++e) {
        const double r0 = reward(naive, df, e, n);
        // scaled must be the correctly rounded quotient naive / n; fl(fl(x/n)*n)
        // does not return x for every integer x, so the product form is not exact.
        worst = std::max(worst, std::abs(reward(scaled, df, e, n) - r0 / static_cast<double>(n)));
        worst = std::max(worst, std::abs(reward(shifted, df, e, n) - r0 - (-3.0)));
      }
    }
  }
  return {"reward_algebra_max_error", worst, "== 0", worst == 0.0};
}

inline CheckResult check_eval_bounds(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, "verify-evals", 0));
  std::size_t violations = 0;
  for (std::size_t n : {8u, 50u, 100u}) {
    const auto inst = ProblemInstance::all_ones(n);
    const Portfolio pf(n);
    GaWorkspace ws(n);
    std::uniform_int_distribution<std::size_t> pick(0, pf.size() - 1);
    EnvState s;
    s.done_reason = DoneReason::kOptimum;
    for (int i = 0; i < 10000; ++i) {
      while (s.done()) s = reset(inst, default_cutoff(n), rng);
      const int lambda = pf[pick(rng)];
      const auto o = ga_step(s, lambda, inst, rng, ws);
      const auto lam = static_cast<std::uint64_t>(lambda);
      if (o.evals < lam || o.evals > 2 * lam || (lambda == 1 && o.evals != 1)) ++violations;
    }
  }
  return {"evaluation_count_violations", static_cast<double>(violations), "== 0", violations == 0};
}

inline std::vector<CheckResult> verify_all(const VerifyOptions& opt = {}) {
  return {check_bin_gt0(opt),         check_gradients(opt),     check_double_q(opt),
          check_shaping(opt),         check_cont_disc_equivalence(opt), check_reward_algebra(opt),
          check_eval_bounds(opt)};
}

}  // namespace onell

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

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "onell/bitstring.hpp"
#include "onell/errors.hpp"
#include "onell/seeding.hpp"

namespace onell {

// OneMax instance f_z(x) = #{i : x_i = z_i}.
struct ProblemInstance {
  std::size_t n = 0;
  BitString target;

  static ProblemInstance all_ones(std::size_t n) {
    if (n < 2) throw InvalidParameterError("problem size must be >= 2");
    return {n, BitString(n, true)};
  }

  static ProblemInstance random_target(std::size_t n, Rng& rng) {
    if (n < 2) throw InvalidParameterError("problem size must be >= 2");
    return {n, BitString::random(n, rng)};
  }
};

inline std::size_t onemax(const BitString& x, const ProblemInstance& inst) {
  if (x.size() != inst.n || inst.target.size() != inst.n) {
    throw DimensionError("onemax: bit string length " + std::to_string(x.size()) +
                         " does not match instance size " + std::to_string(inst.n));
  }
  const auto xs = x.data();
  const auto zs = inst.target.data();
  std::size_t f = 0;
  for (std::size_t i = 0; i < inst.n; ++i) f += xs[i] == zs[i];
  return f;
}

// The rounding used for lambda: floor when the fractional part is < 0.5, ceil otherwise.
inline long round_half_up(double v) {
  const double fl = std::floor(v);
  return static_cast<long>(v - fl < 0.5 ? fl : fl + 1.0);
}

// Powers of two not exceeding n, ascending; floor(log2 n) + 1 entries.
class Portfolio {
 public:
  explicit Portfolio(std::size_t n) {
    if (n < 1) throw InvalidParameterError("portfolio: n must be >= 1");
    for (std::size_t v = 1; v <= n; v *= 2) lambdas_.push_back(static_cast<int>(v));
  }

  std::size_t size() const noexcept { return lambdas_.size(); }
  int operator[](std::size_t i) const { return lambdas_.at(i); }
  int max() const noexcept { return lambdas_.back(); }
  const std::vector<int>& lambdas() const noexcept { return lambdas_; }

  std::optional<std::size_t> index_of(int lambda) const noexcept {
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
      if (lambdas_[i] == lambda) return i;
    }
    return std::nullopt;
  }
  bool contains(int lambda) const noexcept { return index_of(lambda).has_value(); }

 private:
  std::vector<int> lambdas_;
};

enum class DoneReason { kRunning, kOptimum, kCutoff };

inline const char* to_string(DoneReason r) {
  switch (r) {
    case DoneReason::kOptimum: return "optimum";
    case DoneReason::kCutoff: return "cutoff";
    default: return "running";
  }
}

struct EnvState {
  BitString incumbent;
  std::size_t fitness = 0;
  std::uint64_t evals_used = 0;
  std::uint64_t step_index = 0;
  std::uint64_t cutoff = 0;
  DoneReason done_reason = DoneReason::kRunning;

  bool done() const noexcept { return done_reason != DoneReason::kRunning; }
};

struct StepOutcome {
  std::size_t delta_f = 0;
  std::uint64_t evals = 0;
  std::size_t new_fitness = 0;
  // Instrumentation.
  int lambda = 0;
  std::size_t ell = 0;
  std::uint64_t crossover_evals = 0;
};

inline std::uint64_t default_cutoff(std::size_t n, double factor = 0.8) {
  return static_cast<std::uint64_t>(std::ceil(factor * static_cast<double>(n) * static_cast<double>(n)));
}

inline void update_done(EnvState& s, std::size_t n) {
  if (s.fitness == n) {
    s.done_reason = DoneReason::kOptimum;
  } else if (s.evals_used >= s.cutoff) {
    s.done_reason = DoneReason::kCutoff;
  } else {
    s.done_reason = DoneReason::kRunning;
  }
}

// Uniform random start. The evaluation of the starting point is not charged.
inline EnvState reset(const ProblemInstance& inst, std::uint64_t cutoff, Rng& rng) {
  if (cutoff < 1) throw InvalidParameterError("cutoff must be >= 1");
  EnvState s;
  s.incumbent = BitString::random(inst.n, rng);
  s.fitness = onemax(s.incumbent, inst);
  s.cutoff = cutoff;
  update_done(s, inst.n);
  return s;
}

// Reusable buffers for ga_step; one per environment.
class GaWorkspace {
 public:
  explicit GaWorkspace(std::size_t n) : sampler_(n) {}

  std::size_t n() const noexcept { return sampler_.universe(); }

 private:
  friend StepOutcome ga_step(EnvState&, double, const ProblemInstance&, Rng&, GaWorkspace&);
  DistinctIndexSampler sampler_;
  std::vector<std::size_t> positions_;
  std::vector<std::size_t> best_positions_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> best_mask_;
  std::vector<int> gain_;
};

// One iteration of the (1+(lambda,lambda)) GA on `state`, in place.
//
// Mutants and crossover offspring are scored incrementally from f(x): a
// mutant differs from x exactly at the l sampled positions, and every
// offspring differs from x on a subset of those same positions. Offspring
// equal to x (empty subset) or to x' (full subset) are not evaluated.
inline StepOutcome ga_step(EnvState& state, double lambda, const ProblemInstance& inst, Rng& rng,
                           GaWorkspace& ws) {
  if (state.done()) throw StateError("ga_step called on a finished episode");
  if (ws.n() != inst.n || state.incumbent.size() != inst.n) {
    throw DimensionError("ga_step: state, workspace and instance sizes differ");
  }
  const long lam_l = round_half_up(lambda);
  if (!(lam_l >= 1 && static_cast<std::size_t>(lam_l) <= inst.n)) {
    throw InvalidActionError("ga_step: lambda " + std::to_string(lambda) + " outside [1, n]");
  }
  const int lam = static_cast<int>(lam_l);
  const std::size_t n = inst.n;
  const double p = static_cast<double>(lam) / static_cast<double>(n);
  const double c = 1.0 / static_cast<double>(lam);
  const auto xs = state.incumbent.data();
  const auto zs = inst.target.data();
  const long fx = static_cast<long>(state.fitness);

  StepOutcome out;
  out.lambda = lam;

  // Mutation phase.
  const std::size_t ell = sample_bin_gt0(n, p, rng);
  out.ell = ell;
  long best_mut = -1;
  std::uint64_t ties = 0;
  for (int i = 0; i < lam; ++i) {
    ws.sampler_.sample(ell, rng, ws.positions_);
    long f = fx;
    for (std::size_t j : ws.positions_) f += xs[j] == zs[j] ? -1 : 1;
    if (f > best_mut) {
      best_mut = f;
      ties = 1;
      ws.best_positions_.swap(ws.positions_);
    } else if (f == best_mut) {
      ++ties;
      std::uniform_int_distribution<std::uint64_t> pick(0, ties - 1);
      if (pick(rng) == 0) ws.best_positions_.swap(ws.positions_);
    }
  }
  std::uint64_t evals = static_cast<std::uint64_t>(lam);

  // Crossover phase. gain_[k] is the fitness change of taking x' at the k-th
  // differing position.
  const auto& diff = ws.best_positions_;
  ws.gain_.resize(ell);
  for (std::size_t k = 0; k < ell; ++k) ws.gain_[k] = xs[diff[k]] == zs[diff[k]] ? -1 : 1;

  std::bernoulli_distribution take(c);
  long best_cross = -1;
  bool have_offspring = false;
  ties = 0;
  ws.mask_.resize(ell);
  for (int i = 0; i < lam; ++i) {
    std::size_t taken = 0;
    long f = fx;
    for (std::size_t k = 0; k < ell; ++k) {
      const bool t = take(rng);
      ws.mask_[k] = t ? 1 : 0;
      if (t) {
        ++taken;
        f += ws.gain_[k];
      }
    }
    if (taken == 0 || taken == ell) continue;  // y == x or y == x'
    ++out.crossover_evals;
    if (!have_offspring || f > best_cross) {
      have_offspring = true;
      best_cross = f;
      ties = 1;
      ws.best_mask_.swap(ws.mask_);
      ws.mask_.resize(ell);
    } else if (f == best_cross) {
      ++ties;
      std::uniform_int_distribution<std::uint64_t> pick(0, ties - 1);
      if (pick(rng) == 0) {
        ws.best_mask_.swap(ws.mask_);
        ws.mask_.resize(ell);
      }
    }
  }
  evals += out.crossover_evals;

  // Selection: y = y' if strictly better than x', else x'; accept if f(y) >= f(x).
  const bool use_offspring = have_offspring && best_cross > best_mut;
  const long fy = use_offspring ? best_cross : best_mut;
  if (fy >= fx) {
    BitString& x = state.incumbent;
    for (std::size_t k = 0; k < ell; ++k) {
      if (!use_offspring || ws.best_mask_[k]) x.flip(diff[k]);
    }
    state.fitness = static_cast<std::size_t>(fy);
  }

  state.evals_used += evals;
  state.step_index += 1;
  update_done(state, n);

  out.evals = evals;
  out.new_fitness = state.fitness;
  out.delta_f = state.fitness - static_cast<std::size_t>(fx);
  return out;
}

inline StepOutcome ga_step(EnvState& state, double lambda, const ProblemInstance& inst, Rng& rng) {
  GaWorkspace ws(inst.n);
  return ga_step(state, lambda, inst, rng, ws);
}

// Anything mapping a fitness value in [0, n) to a (possibly fractional) lambda.
template <typename P>
concept LambdaPolicy = requires(const P& p, std::size_t fitness) {
  { p.lambda_for(fitness) } -> std::convertible_to<double>;
};

struct StepRecord {
  std::size_t fitness_before = 0;
  double lambda = 0.0;
  StepOutcome outcome;
};

struct EpisodeResult {
  std::uint64_t runtime = 0;
  bool success = false;
  std::vector<StepRecord> trajectory;
};

template <LambdaPolicy Policy>
EpisodeResult run_episode(const Policy& policy, const ProblemInstance& inst, std::uint64_t cutoff,
                          Rng& rng, bool capture_trajectory = false) {
  EnvState state = reset(inst, cutoff, rng);
  GaWorkspace ws(inst.n);
  EpisodeResult res;
  while (!state.done()) {
    const std::size_t f = state.fitness;
    const double lambda = static_cast<double>(policy.lambda_for(f));
    StepOutcome o = ga_step(state, lambda, inst, rng, ws);
    if (capture_trajectory) res.trajectory.push_back({f, lambda, o});
  }
  res.runtime = state.evals_used;
  res.success = state.done_reason == DoneReason::kOptimum;
  return res;
}

// Episodic view for a learning agent: actions are indices into the portfolio.
class OneLLEnv {
 public:
  OneLLEnv(ProblemInstance inst, std::uint64_t cutoff, std::uint64_t seed)
      : inst_(std::move(inst)), portfolio_(inst_.n), cutoff_(cutoff), rng_(seed), ws_(inst_.n) {
    if (cutoff_ < 1) throw InvalidParameterError("cutoff must be >= 1");
  }

  const EnvState& reset() {
    state_ = onell::reset(inst_, cutoff_, rng_);
    started_ = true;
    return state_;
  }

  StepOutcome step(std::size_t action) {
    if (!started_) throw StateError("step before reset");
    if (action >= portfolio_.size()) {
      throw InvalidActionError("action index " + std::to_string(action) + " outside portfolio of size " +
                               std::to_string(portfolio_.size()));
    }
    return ga_step(state_, portfolio_[action], inst_, rng_, ws_);
  }

  const EnvState& state() const noexcept { return state_; }
  const ProblemInstance& instance() const noexcept { return inst_; }
  const Portfolio& portfolio() const noexcept { return portfolio_; }
  std::size_t n() const noexcept { return inst_.n; }
  std::uint64_t cutoff() const noexcept { return cutoff_; }
  Rng& rng() noexcept { return rng_; }

 private:
  ProblemInstance inst_;
  Portfolio portfolio_;
  std::uint64_t cutoff_;
  Rng rng_;
  GaWorkspace ws_;
  EnvState state_;
  bool started_ = false;
};

}  // namespace onell

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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include "onell/errors.hpp"
#include "onell/onell_env.hpp"
#include "onell/policies.hpp"
#include "onell/qnetwork.hpp"
#include "onell/seeding.hpp"
#include "onell/stats.hpp"

namespace onell {

struct EvalReport {
  std::vector<std::uint64_t> runtimes;  // per seed, capped at the cutoff step
  std::vector<bool> success;
  std::size_t successes = 0;
  double ert = std::numeric_limits<double>::infinity();  // sum(runtimes) / successes
  double mean = 0.0;
  double std = 0.0;

  static EvalReport from_runs(std::vector<std::uint64_t> runtimes, std::vector<bool> success) {
    EvalReport r;
    r.runtimes = std::move(runtimes);
    r.success = std::move(success);
    r.successes = static_cast<std::size_t>(std::count(r.success.begin(), r.success.end(), true));
    const auto ms = stats::mean_std(std::span<const std::uint64_t>(r.runtimes));
    r.mean = ms.mean;
    r.std = ms.std;
    double total = 0.0;
    for (auto t : r.runtimes) total += static_cast<double>(t);
    if (r.successes > 0) r.ert = total / static_cast<double>(r.successes);
    return r;
  }

  double success_rate() const {
    return runtimes.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(runtimes.size());
  }
};

// Runs `body(i)` for i in [0, count) on up to `workers` threads. Each index
// runs exactly once; the first exception is rethrown after all threads join.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct EvalOptions {
  std::uint64_t base_seed = 0;
  std::string_view purpose = purpose::kFinalEval;
  std::size_t workers = 1;
};

// One episode per seed; episode i uses derive_seed(base_seed, purpose, i).
// Results are stored by seed index, so the worker count never changes them.
template <LambdaPolicy Policy>
EvalReport evaluate_policy(const Policy& policy, const ProblemInstance& inst, std::uint64_t cutoff,
                           std::size_t seeds, const EvalOptions& opts = {}) {
  if (seeds < 1) throw InvalidParameterError("evaluate_policy: seeds must be >= 1");
  std::vector<std::uint64_t> runtimes(seeds);
  std::vector<char> success(seeds);
  parallel_for(seeds, opts.workers, [&](std::size_t i) {
    Rng rng(derive_seed(opts.base_seed, opts.purpose, i));
    const EpisodeResult e = run_episode(policy, inst, cutoff, rng);
    runtimes[i] = e.runtime;
    success[i] = e.success ? 1 : 0;
  });
  return EvalReport::from_runs(std::move(runtimes), std::vector<bool>(success.begin(), success.end()));
}

// Relative ERT gap to a baseline.
inline double gap(double policy_ert, double baseline_ert) {
  if (!(baseline_ert > 0.0)) throw InvalidParameterError("gap: baseline ERT must be positive");
  return (policy_ert - baseline_ert) / baseline_ert;
}

struct CurvePoint {
  std::uint64_t train_step = 0;
  double mean_runtime = 0.0;
  bool hit = false;
};

using LearningCurve = std::vector<CurvePoint>;

// Mean signed difference between the curve and the baseline ERT.
inline double auc(const LearningCurve& curve, double baseline_ert) {
  if (curve.empty()) throw InvalidParameterError("auc: empty learning curve");
  double sum = 0.0;
  for (const auto& p : curve) sum += p.mean_runtime - baseline_ert;
  return sum / static_cast<double>(curve.size());
}

inline bool is_hit(double mean_runtime, double baseline_mean, double baseline_std) {
  return mean_runtime <= baseline_mean + 0.25 * baseline_std;
}

struct Window {
  double lo = 0.0;
  double hi = 1.0;
};

// Fraction of curve points, among those whose index i satisfies
// floor(lo * N) <= i < ceil(hi * N), that hit the baseline band.
inline double hitting_rate(const LearningCurve& curve, double baseline_mean, double baseline_std, Window window) {
  if (!(window.lo >= 0.0 && window.hi <= 1.0 && window.lo <= window.hi)) {
    throw InvalidParameterError("hitting_rate: window must be a sub-interval of [0, 1]");
  }
  const double count = static_cast<double>(curve.size());
  const auto begin = static_cast<std::size_t>(std::floor(window.lo * count));
  const auto end = std::min(curve.size(), static_cast<std::size_t>(std::ceil(window.hi * count)));
  if (begin >= end) throw InvalidParameterError("hitting_rate: window selects no curve points");
  std::size_t hits = 0;
  for (std::size_t i = begin; i < end; ++i) hits += is_hit(curve[i].mean_runtime, baseline_mean, baseline_std);
  return static_cast<double>(hits) / static_cast<double>(end - begin);
}

// Number of fitness states where two policies choose different lambdas.
inline std::size_t pairwise_diff(const PolicyTable& a, const PolicyTable& b) {
  if (a.n() != b.n()) throw DimensionError("pairwise_diff: policies cover different problem sizes");
  std::size_t d = 0;
  for (std::size_t f = 0; f < a.n(); ++f) d += a[f] != b[f];
  return d;
}

// Shannon entropy (nats) of softmax(q).
inline double softmax_entropy(const Eigen::Ref<const Vector>& q) {
  const double m = q.maxCoeff();
  const Vector e = (q.array() - m).exp().matrix();
  const double z = e.sum();
  double h = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double p = e(i) / z;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// Mean over fitness states 0..n-1 of the softmax entropy of Q(f/n, .).
inline double q_entropy(const QNetwork& q, std::size_t n) {
  if (n < 1) throw InvalidParameterError("q_entropy: n must be >= 1");
  Matrix states(1, static_cast<Eigen::Index>(n));
  for (std::size_t f = 0; f < n; ++f) states(0, static_cast<Eigen::Index>(f)) = encode_fitness(f, n);
  const Matrix qs = q.forward(states);
  double total = 0.0;
  for (Eigen::Index c = 0; c < qs.cols(); ++c) total += softmax_entropy(qs.col(c));
  return total / static_cast<double>(n);
}

// Earliest training step at which any curve beats the baseline ERT; nullopt
// means never.
inline std::optional<std::uint64_t> steps_to_surpass(const std::vector<LearningCurve>& curves,
                                                     double baseline_ert) {
  if (curves.empty()) throw InvalidParameterError("steps_to_surpass: no curves");
  std::optional<std::uint64_t> best;
  for (const auto& curve : curves) {
    for (const auto& p : curve) {
      if (p.mean_runtime < baseline_ert) {
        if (!best || p.train_step < *best) best = p.train_step;
        break;
      }
    }
  }
  return best;
}

}  // namespace onell

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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "onell/errors.hpp"
#include "onell/onell_env.hpp"

namespace onell {

enum class RewardVariant { kNaive, kScaled, kShiftFixed, kShiftAdaptive, kScaledShiftAdaptive };

inline const char* to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::kNaive: return "naive";
    case RewardVariant::kScaled: return "scaled";
    case RewardVariant::kShiftFixed: return "shift_fixed";
    case RewardVariant::kShiftAdaptive: return "shift_adaptive";
    case RewardVariant::kScaledShiftAdaptive: return "scaled_shift_adaptive";
  }
  return "?";
}

inline RewardVariant parse_reward_variant(const std::string& s) {
  for (auto v : {RewardVariant::kNaive, RewardVariant::kScaled, RewardVariant::kShiftFixed,
                 RewardVariant::kShiftAdaptive, RewardVariant::kScaledShiftAdaptive}) {
    if (s == to_string(v)) return v;
  }
  throw InvalidParameterError("unknown reward variant '" + s + "'");
}

inline bool is_adaptive(RewardVariant v) {
  return v == RewardVariant::kShiftAdaptive || v == RewardVariant::kScaledShiftAdaptive;
}

inline bool is_scaled(RewardVariant v) {
  return v == RewardVariant::kScaled || v == RewardVariant::kScaledShiftAdaptive;
}

// Reward variant plus its bias. Adaptive variants start unresolved; the bias
// is set once from warmup data and cannot change afterwards.
class RewardSpec {
 public:
  explicit RewardSpec(RewardVariant variant = RewardVariant::kNaive, double fixed_bias = 0.0,
                      double adaptive_factor = 0.2)
      : variant_(variant), fixed_bias_(fixed_bias), adaptive_factor_(adaptive_factor) {}

  RewardVariant variant() const noexcept { return variant_; }
  double fixed_bias() const noexcept { return fixed_bias_; }
  double adaptive_factor() const noexcept { return adaptive_factor_; }
  const std::optional<double>& resolved_bias() const noexcept { return resolved_bias_; }

  bool needs_resolution() const noexcept { return is_adaptive(variant_) && !resolved_bias_; }

  void resolve(double bias) {
    if (!is_adaptive(variant_)) throw StateError("resolve: reward variant has no adaptive bias");
    if (resolved_bias_) throw StateError("resolve: adaptive bias already resolved");
    resolved_bias_ = bias;
  }

  // Variant without the shift; this is what the warmup median is taken over.
  RewardVariant base_variant() const noexcept {
    return is_scaled(variant_) ? RewardVariant::kScaled : RewardVariant::kNaive;
  }

  // Additive shift applied on top of the base variant.
  double shift() const {
    switch (variant_) {
      case RewardVariant::kNaive:
      case RewardVariant::kScaled: return 0.0;
      case RewardVariant::kShiftFixed: return fixed_bias_;
      default:
        if (!resolved_bias_) throw StateError("adaptive reward used before its bias was resolved");
        return *resolved_bias_;
    }
  }

 private:
  RewardVariant variant_;
  double fixed_bias_;
  double adaptive_factor_;
  std::optional<double> resolved_bias_;
};

inline double base_reward(RewardVariant base, std::size_t delta_f, std::uint64_t evals, std::size_t n) {
  const double raw = static_cast<double>(delta_f) - static_cast<double>(evals);
  return is_scaled(base) ? raw / static_cast<double>(n) : raw;
}

inline double reward(const RewardSpec& spec, std::size_t delta_f, std::uint64_t evals, std::size_t n) {
  if (evals < 1) throw InvalidParameterError("reward: evals must be >= 1");
  if (n < 2) throw InvalidParameterError("reward: n must be >= 2");
  return base_reward(spec.variant(), delta_f, evals, n) + spec.shift();
}

// Median with the even-length convention (mean of the two central values).
inline double median(std::vector<double> values) {
  if (values.empty()) throw StateError("median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// -factor * |median(warmup_rewards)|
inline double resolve_adaptive_bias(std::span<const double> warmup_rewards, double factor = 0.2) {
  if (warmup_rewards.empty()) throw StateError("resolve_adaptive_bias: no warmup rewards");
  return -factor * std::abs(median(std::vector<double>(warmup_rewards.begin(), warmup_rewards.end())));
}

// Attainable reward interval: delta_f ranges over [0, n-1] and E over
// [1, 2 * max lambda], so the unscaled base spans [-2 max(lambda), n - 1].
inline std::pair<double, double> reward_bounds(const RewardSpec& spec, std::size_t n) {
  if (n < 2) throw InvalidParameterError("reward_bounds: n must be >= 2");
  const double max_lambda = static_cast<double>(Portfolio(n).max());
  double lo = -2.0 * max_lambda;
  double hi = static_cast<double>(n) - 1.0;
  if (is_scaled(spec.variant())) {
    lo /= static_cast<double>(n);
    hi /= static_cast<double>(n);
  }
  const double b = spec.variant() == RewardVariant::kNaive || spec.variant() == RewardVariant::kScaled
                       ? 0.0
                       : spec.shift();
  return {lo + b, hi + b};
}

}  // namespace onell

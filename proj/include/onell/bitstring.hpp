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
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "onell/errors.hpp"
#include "onell/seeding.hpp"

namespace onell {

class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
  explicit BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  // "10110" -> {1,0,1,1,0}; any character other than '1' reads as 0.
  static BitString from_string(const std::string& s) {
    BitString x(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) x.bits_[i] = s[i] == '1' ? 1 : 0;
    return x;
  }

  static BitString random(std::size_t n, Rng& rng) {
    BitString x(n);
    std::bernoulli_distribution coin(0.5);
    for (auto& b : x.bits_) b = coin(rng) ? 1 : 0;
    return x;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }
  void flip(std::size_t i) noexcept { bits_[i] ^= 1; }

  BitString complement() const {
    BitString out(*this);
    for (auto& b : out.bits_) b ^= 1;
    return out;
  }

  std::size_t popcount() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
    return s;
  }

  std::span<const std::uint8_t> data() const noexcept { return bits_; }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline std::size_t hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw DimensionError("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// Draws `count` distinct indices from [0, n) uniformly (Floyd's algorithm).
// The marker buffer is kept between calls so repeated draws do not allocate.
class DistinctIndexSampler {
 public:
  explicit DistinctIndexSampler(std::size_t n) : marked_(n, 0) {}

  std::size_t universe() const noexcept { return marked_.size(); }

  void sample(std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
    const std::size_t n = marked_.size();
    if (count > n) throw InvalidParameterError("cannot draw more distinct indices than exist");
    out.clear();
    for (std::size_t j = n - count; j < n; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      std::size_t t = pick(rng);
      if (marked_[t]) t = j;
      marked_[t] = 1;
      out.push_back(t);
    }
    for (std::size_t i : out) marked_[i] = 0;
  }

 private:
  std::vector<std::uint8_t> marked_;
};

// flip_l: copy of x with exactly l distinct, uniformly chosen positions flipped.
inline BitString flip_l(const BitString& x, std::size_t l, Rng& rng) {
  if (l > x.size()) throw InvalidParameterError("flip_l: l exceeds string length");
  DistinctIndexSampler sampler(x.size());
  std::vector<std::size_t> positions;
  sampler.sample(l, rng, positions);
  BitString y(x);
  for (std::size_t i : positions) y.flip(i);
  return y;
}

// cross_c: biased uniform crossover, each bit taken from x_prime with
// probability c. Where x and x_prime agree the choice cannot matter, so only
// the differing positions consume randomness.
inline BitString cross_c(const BitString& x, const BitString& x_prime, double c, Rng& rng) {
  if (x.size() != x_prime.size()) throw DimensionError("cross_c: length mismatch");
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidParameterError("cross_c: c must lie in [0, 1]");
  BitString y(x);
  std::bernoulli_distribution take(c);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != x_prime[i] && take(rng)) y.set(i, x_prime[i]);
  }
  return y;
}

// Bin_{>0}(n, p): Binomial(n, p) conditioned on a positive outcome. Rejection
// when zero is unlikely; otherwise inversion of the conditional cdf, which
// stays fast when n*p is tiny.
inline std::size_t sample_bin_gt0(std::size_t n, double p, Rng& rng) {
  if (n < 1) throw InvalidParameterError("sample_bin_gt0: n must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameterError("sample_bin_gt0: p must lie in (0, 1]");
  if (p == 1.0) return n;
  const double dn = static_cast<double>(n);
  const double log_q = std::log1p(-p);
  const double p_zero = std::exp(dn * log_q);
  if (p_zero <= 0.5) {
    std::binomial_distribution<std::size_t> bin(n, p);
    for (;;) {
      std::size_t l = bin(rng);
      if (l > 0) return l;
    }
  }
  const double positive_mass = -std::expm1(dn * log_q);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * positive_mass;
  const double odds = p / (1.0 - p);
  double pmf = dn * p * std::exp((dn - 1.0) * log_q);
  double cdf = pmf;
  std::size_t k = 1;
  while (cdf < u && k < n) {
    pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    cdf += pmf;
    ++k;
  }
  return k;
}

}  // namespace onell

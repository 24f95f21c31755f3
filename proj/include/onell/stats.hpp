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

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "onell/errors.hpp"

namespace onell::stats {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divide by N)
};

template <typename T>
MeanStd mean_std(std::span<const T> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (const T& x : xs) sum += static_cast<double>(x);
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (const T& x : xs) {
    const double d = static_cast<double>(x) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Two-sided paired t-test on a[i] - b[i].
template <typename T>
TestResult paired_t_test(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw DimensionError("paired_t_test: samples differ in length");
  if (a.size() < 2) throw InvalidParameterError("paired_t_test: need at least two pairs");
  const std::size_t m = a.size();
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = static_cast<double>(a[i]) - static_cast<double>(b[i]);
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  TestResult r;
  r.dof = static_cast<double>(m - 1);
  if (sd == 0.0) {
    r.statistic = 0.0;
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = mean / (sd / std::sqrt(static_cast<double>(m)));
  boost::math::students_t dist(r.dof);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  return r;
}

// Pearson chi-square goodness of fit of observed counts against expected
// probabilities (which should sum to 1). Bins whose expected count is below
// `min_expected` are pooled into one tail bin.
inline TestResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> probs,
                                 double min_expected = 5.0) {
  if (observed.size() != probs.size()) throw DimensionError("chi_square_gof: bin counts differ");
  double total = 0.0;
  for (std::size_t o : observed) total += static_cast<double>(o);
  if (total <= 0.0) throw InvalidParameterError("chi_square_gof: no observations");
  double stat = 0.0;
  std::size_t bins = 0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probs[i];
    if (e < min_expected) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += e;
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
    ++bins;
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++bins;
  } else if (pooled_obs > 0.0) {
    throw InvalidParameterError("chi_square_gof: observation in a zero-probability bin");
  }
  if (bins < 2) throw InvalidParameterError("chi_square_gof: need at least two bins");
  TestResult r;
  r.statistic = stat;
  r.dof = static_cast<double>(bins - 1);
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return r;
}

// pmf of Binomial(n, p) conditioned on a positive outcome, index 0..n (entry 0 is 0).
inline std::vector<double> conditional_binomial_pmf(std::size_t n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  const double dn = static_cast<double>(n);
  const double positive = -std::expm1(dn * std::log1p(-p));
  for (std::size_t k = 1; k <= n; ++k) {
    const double dk = static_cast<double>(k);
    const double log_choose = std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
    const double log_tail = p == 1.0 ? (k == n ? 0.0 : -INFINITY) : (dn - dk) * std::log1p(-p);
    pmf[k] = std::exp(log_choose + dk * std::log(p) + log_tail) / positive;
  }
  return pmf;
}

}  // namespace onell::stats

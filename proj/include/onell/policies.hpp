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
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "onell/errors.hpp"
#include "onell/onell_env.hpp"
#include "onell/qnetwork.hpp"

namespace onell {

// Theory-derived population size sqrt(n / (n - f)).
inline double pi_cont(std::size_t fitness, std::size_t n) {
  if (fitness >= n) throw InvalidParameterError("pi_cont: fitness must be < n");
  return std::sqrt(static_cast<double>(n) / static_cast<double>(n - fitness));
}

// pi_cont as an executable policy; ga_step rounds the value half-up.
struct ContinuousPolicy {
  std::size_t n;
  double lambda_for(std::size_t fitness) const { return pi_cont(fitness, n); }
};

// A lambda from the portfolio for every fitness value 0..n-1.
class PolicyTable {
 public:
  PolicyTable(std::size_t n, std::vector<int> lambda_of) : n_(n), lambda_of_(std::move(lambda_of)) {
    if (n_ < 2) throw InvalidParameterError("policy table: n must be >= 2");
    if (lambda_of_.size() != n_) {
      throw DimensionError("policy table: expected " + std::to_string(n_) + " entries, got " +
                           std::to_string(lambda_of_.size()));
    }
    const Portfolio pf(n_);
    for (std::size_t f = 0; f < n_; ++f) {
      if (!pf.contains(lambda_of_[f])) {
        throw InvalidParameterError("policy table: lambda " + std::to_string(lambda_of_[f]) + " at fitness " +
                                    std::to_string(f) + " is not in the portfolio");
      }
    }
  }

  static PolicyTable constant(std::size_t n, int lambda) { return {n, std::vector<int>(n, lambda)}; }

  std::size_t n() const noexcept { return n_; }
  int operator[](std::size_t fitness) const { return lambda_of_.at(fitness); }
  double lambda_for(std::size_t fitness) const { return lambda_of_.at(fitness); }
  const std::vector<int>& lambdas() const noexcept { return lambda_of_; }

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

 private:
  std::size_t n_;
  std::vector<int> lambda_of_;
};

// Nearest portfolio member to pi_cont at every fitness; ties go to the smaller lambda.
inline PolicyTable discretize_policy(std::size_t n) {
  if (n < 2) throw InvalidParameterError("discretize_policy: n must be >= 2");
  const Portfolio pf(n);
  std::vector<int> table(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double target = pi_cont(f, n);
    int best = pf[0];
    for (int lambda : pf.lambdas()) {
      if (std::abs(lambda - target) < std::abs(best - target)) best = lambda;
    }
    table[f] = best;
  }
  return {n, std::move(table)};
}

// Greedy policy argmax_a Q(f/n, a) for every fitness.
inline PolicyTable greedy_from_q(const QNetwork& q, std::size_t n) {
  const Portfolio pf(n);
  if (q.output_dim() != pf.size()) {
    throw DimensionError("greedy_from_q: network has " + std::to_string(q.output_dim()) +
                         " outputs but the portfolio has " + std::to_string(pf.size()) + " actions");
  }
  Matrix states(1, static_cast<Eigen::Index>(n));
  for (std::size_t f = 0; f < n; ++f) states(0, static_cast<Eigen::Index>(f)) = encode_fitness(f, n);
  const Matrix qs = q.forward(states);
  std::vector<int> table(n);
  for (std::size_t f = 0; f < n; ++f) table[f] = pf[argmax_first(qs.col(static_cast<Eigen::Index>(f)))];
  return {n, std::move(table)};
}

// Policy file:
//   n=<int>
//   f=<int> lambda=<int>      (exactly n lines, fitness 0..n-1 ascending)
// Blank lines and lines starting with '#' are ignored.
inline void save_policy(const PolicyTable& p, std::ostream& os) {
  os << "n=" << p.n() << "\n";
  for (std::size_t f = 0; f < p.n(); ++f) os << "f=" << f << " lambda=" << p[f] << "\n";
}

inline void save_policy(const PolicyTable& p, const std::string& path, const std::string& comment = {}) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  if (!comment.empty()) os << "# " << comment << "\n";
  save_policy(p, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline bool parse_int_field(const std::string& token, const std::string& key, long& out) {
  if (token.rfind(key + "=", 0) != 0) return false;
  const std::string digits = token.substr(key.size() + 1);
  if (digits.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stol(digits, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == digits.size();
}

}  // namespace detail

inline PolicyTable load_policy(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  long n = -1;
  std::vector<int> table;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (n < 0) {
      if (tokens.size() != 1 || !detail::parse_int_field(tokens[0], "n", n) || n < 2) {
        throw ParseError("expected header 'n=<int>' with n >= 2", lineno);
      }
      continue;
    }
    long f = 0, lambda = 0;
    if (tokens.size() != 2 || !detail::parse_int_field(tokens[0], "f", f) ||
        !detail::parse_int_field(tokens[1], "lambda", lambda)) {
      throw ParseError("expected 'f=<int> lambda=<int>'", lineno);
    }
    const long expected = static_cast<long>(table.size());
    if (f != expected) {
      throw ParseError("missing or out-of-order fitness row " + std::to_string(expected) + " (found f=" +
                           std::to_string(f) + ")",
                       lineno);
    }
    if (f >= n) throw ParseError("fitness " + std::to_string(f) + " out of range for n=" + std::to_string(n), lineno);
    if (!Portfolio(static_cast<std::size_t>(n)).contains(static_cast<int>(lambda))) {
      throw ParseError("lambda " + std::to_string(lambda) + " is not a power of two <= n", lineno);
    }
    table.push_back(static_cast<int>(lambda));
  }
  if (n < 0) throw ParseError("empty policy file", 0);
  if (static_cast<long>(table.size()) != n) {
    throw ParseError("missing fitness row " + std::to_string(table.size()) + " (file ends early)", lineno);
  }
  return {static_cast<std::size_t>(n), std::move(table)};
}

inline PolicyTable load_policy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open policy file " + path);
  return load_policy(is);
}

}  // namespace onell

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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "onell/ddqn_agent.hpp"
#include "onell/errors.hpp"
#include "onell/onell_env.hpp"
#include "onell/rewards.hpp"
#include "onell/seeding.hpp"

namespace onell {

// Thrown for invalid configuration values; the CLI maps it to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One experiment, read from a `key = value` file ('#' starts a comment).
// Every key is optional; see canonical() for the full list and defaults.
struct ExperimentConfig {
  std::size_t n = 50;
  RewardVariant reward = RewardVariant::kNaive;
  double bias = 0.0;
  double adaptive_factor = 0.2;
  AgentConfig agent;
  std::optional<std::uint64_t> budget;  // unset: AgentConfig::default_budget(n)
  double cutoff_factor = 0.8;
  std::size_t eval_seeds = 100;
  std::size_t final_eval_seeds = 1000;
  std::size_t top_k = 5;
  std::uint64_t base_seed = 0;
  std::string output_dir = "runs/default";
  std::size_t eval_workers = 20;
  bool save_networks = false;

  std::string source_text;  // the config file as read, if any

  std::uint64_t train_budget() const { return budget ? *budget : AgentConfig::default_budget(n); }
  std::uint64_t cutoff() const { return default_cutoff(n, cutoff_factor); }

  AgentConfig resolved_agent() const {
    AgentConfig a = agent;
    a.train_budget = train_budget();
    return a;
  }

  RewardSpec reward_spec() const { return RewardSpec(reward, bias, adaptive_factor); }

  void set(const std::string& key, const std::string& value) {
    try {
      if (key == "n") n = to_size(value);
      else if (key == "reward") reward = parse_reward_variant(value);
      else if (key == "bias") bias = std::stod(value);
      else if (key == "adaptive_factor") adaptive_factor = std::stod(value);
      else if (key == "epsilon") agent.epsilon = std::stod(value);
      else if (key == "gamma") agent.gamma = std::stod(value);
      else if (key == "lr") agent.lr = std::stod(value);
      else if (key == "batch") agent.batch = to_size(value);
      else if (key == "tau") agent.tau = std::stod(value);
      else if (key == "warmup") agent.warmup_transitions = to_size(value);
      else if (key == "budget") budget = value == "auto" ? std::nullopt : std::optional<std::uint64_t>(to_u64(value));
      else if (key == "buffer_capacity") agent.buffer_capacity = to_size(value);
      else if (key == "hidden") agent.hidden = to_int_list(value);
      else if (key == "checkpoint_every") agent.checkpoint_every = to_u64(value);
      else if (key == "cutoff_factor") cutoff_factor = std::stod(value);
      else if (key == "eval_seeds") eval_seeds = to_size(value);
      else if (key == "final_eval_seeds") final_eval_seeds = to_size(value);
      else if (key == "top_k") top_k = to_size(value);
      else if (key == "seed") base_seed = to_u64(value);
      else if (key == "out") output_dir = value;
      else if (key == "eval_workers") eval_workers = to_size(value);
      else if (key == "save_networks") save_networks = to_bool(value);
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("bad value '" + value + "' for key '" + key + "': " + e.what());
    }
  }

  static ExperimentConfig parse(std::istream& is) {
    ExperimentConfig cfg;
    std::ostringstream source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      source << line << "\n";
      const auto hash = line.find('#');
      std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      try {
        cfg.set(key, value);
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), lineno);
      }
    }
    cfg.source_text = source.str();
    return cfg;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    return parse(is);
  }

  void validate() const {
    if (n < 2) throw ConfigError("n must be >= 2");
    if (!(cutoff_factor > 0.0)) throw ConfigError("cutoff_factor must be positive");
    if (eval_seeds < 1 || final_eval_seeds < 1) throw ConfigError("seed counts must be >= 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (eval_workers < 1) throw ConfigError("eval_workers must be >= 1");
    if (!(adaptive_factor >= 0.0)) throw ConfigError("adaptive_factor must be >= 0");
    try {
      resolved_agent().validate();
    } catch (const InvalidParameterError& e) {
      throw ConfigError(e.what());
    }
  }

  // Fully resolved key = value listing. The hash covers every line except
  // output location and worker count, which cannot change any result.
  std::string canonical(bool include_unhashed = true) const {
    std::ostringstream os;
    os.precision(17);
    os << "n = " << n << "\n";
    os << "reward = " << to_string(reward) << "\n";
    os << "bias = " << bias << "\n";
    os << "adaptive_factor = " << adaptive_factor << "\n";
    os << "epsilon = " << agent.epsilon << "\n";
    os << "gamma = " << agent.gamma << "\n";
    os << "lr = " << agent.lr << "\n";
    os << "batch = " << agent.batch << "\n";
    os << "tau = " << agent.tau << "\n";
    os << "warmup = " << agent.warmup_transitions << "\n";
    os << "budget = " << train_budget() << "\n";
    os << "buffer_capacity = " << agent.buffer_capacity << "\n";
    os << "hidden = ";
    for (std::size_t i = 0; i < agent.hidden.size(); ++i) os << (i ? "," : "") << agent.hidden[i];
    os << "\n";
    os << "checkpoint_every = " << agent.checkpoint_every << "\n";
    os << "cutoff_factor = " << cutoff_factor << "\n";
    os << "eval_seeds = " << eval_seeds << "\n";
    os << "final_eval_seeds = " << final_eval_seeds << "\n";
    os << "top_k = " << top_k << "\n";
    os << "seed = " << base_seed << "\n";
    os << "save_networks = " << (save_networks ? "true" : "false") << "\n";
    if (include_unhashed) {
      os << "out = " << output_dir << "\n";
      os << "eval_workers = " << eval_workers << "\n";
    }
    return os.str();
  }

  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical(false))));
    return buf;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static std::uint64_t to_u64(const std::string& s) {
    std::size_t used = 0;
    if (!s.empty() && s[0] == '-') throw ConfigError("negative value");
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw ConfigError("trailing characters");
    return v;
  }
  static std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }
  static bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("expected true/false");
  }
  static std::vector<int> to_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(static_cast<int>(to_u64(trim(item))));
    if (out.empty()) throw ConfigError("empty list");
    return out;
  }
};

}  // namespace onell

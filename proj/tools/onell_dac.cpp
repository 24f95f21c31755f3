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

// Command-line front end: train, evaluate, baseline, best, verify.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 verify failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "onell/onell.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;
constexpr int kVerifyFailed = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::string> n, reward, bias, epsilon, budget, seed, out, workers;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key = value experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--n", n, "problem size");
    cmd->add_option("--reward", reward, "naive | scaled | shift_fixed | shift_adaptive | scaled_shift_adaptive");
    cmd->add_option("--bias", bias, "fixed shift for reward=shift_fixed");
    cmd->add_option("--epsilon", epsilon, "exploration rate");
    cmd->add_option("--budget", budget, "training steps (or 'auto')");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--workers", workers, "evaluation threads");
  }

  onell::ExperimentConfig resolve() const {
    onell::ExperimentConfig cfg = config.empty() ? onell::ExperimentConfig{} : onell::ExperimentConfig::load(config);
    auto apply = [&](const char* key, const std::optional<std::string>& v) {
      if (v) cfg.set(key, *v);
    };
    apply("n", n);
    apply("reward", reward);
    apply("bias", bias);
    apply("epsilon", epsilon);
    apply("budget", budget);
    apply("seed", seed);
    apply("out", out);
    apply("eval_workers", workers);
    cfg.validate();
    return cfg;
  }
};

void print_report(const std::string& label, const onell::EvalReport& rep) {
  std::printf("%s: seeds=%zu successes=%zu ert=%s mean=%.2f std=%.2f\n", label.c_str(), rep.runtimes.size(),
              rep.successes, onell::format_double(rep.ert).c_str(), rep.mean, rep.std);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDQN control of lambda in the (1+(lambda,lambda)) GA on OneMax"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, base_opts, best_opts, verify_opts;

  auto* train_cmd = app.add_subcommand("train", "train an agent and write a run directory");
  train_opts.attach(train_cmd);
  bool quiet = false;
  train_cmd->add_flag("--quiet", quiet, "no per-checkpoint progress");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a policy file");
  eval_opts.attach(eval_cmd);
  std::string eval_policy;
  std::optional<std::size_t> eval_seeds;
  eval_cmd->add_option("--policy", eval_policy, "policy file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--seeds", eval_seeds, "episodes (default final_eval_seeds)");

  auto* base_cmd = app.add_subcommand("baseline", "evaluate pi_cont, pi_disc or a policy file");
  base_opts.attach(base_cmd);
  std::string base_kind = "disc";
  std::optional<std::string> base_policy;
  std::optional<std::size_t> base_seeds;
  base_cmd->add_option("--kind", base_kind, "cont | disc | file");
  base_cmd->add_option("--policy", base_policy, "policy file for --kind file")->check(CLI::ExistingFile);
  base_cmd->add_option("--seeds", base_seeds, "episodes (default final_eval_seeds)");

  auto* best_cmd = app.add_subcommand("best", "pick the best of a run's top checkpoints");
  best_opts.attach(best_cmd);
  std::optional<std::string> best_run;
  best_cmd->add_option("--run", best_run, "run directory (default: --out)")->check(CLI::ExistingDirectory);

  auto* verify_cmd = app.add_subcommand("verify", "run the built-in correctness checks");
  verify_opts.attach(verify_cmd);
  std::optional<std::string> verify_json;
  verify_cmd->add_option("--json", verify_json, "also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*train_cmd) {
      const auto cfg = train_opts.resolve();
      const auto dir = onell::run_training(cfg, quiet ? nullptr : &std::cout);
      std::cout << "run written to " << dir.string() << "\n";
    } else if (*eval_cmd) {
      const auto cfg = eval_opts.resolve();
      const auto policy = onell::load_policy(eval_policy);
      if (policy.n() != cfg.n) throw onell::ConfigError("policy file is for n=" + std::to_string(policy.n()));
      const auto rep = onell::evaluate_policy(policy, onell::ProblemInstance::all_ones(cfg.n), cfg.cutoff(),
                                              eval_seeds.value_or(cfg.final_eval_seeds),
                                              {cfg.base_seed, onell::purpose::kFinalEval, cfg.eval_workers});
      std::filesystem::create_directories(cfg.output_dir);
      const auto stem = std::filesystem::path(cfg.output_dir) /
                        ("eval_" + std::filesystem::path(eval_policy).stem().string());
      onell::write_eval_csv(stem.string() + ".csv", rep, cfg.hash());
      auto j = onell::report_json(rep);
      j["config_hash"] = cfg.hash();
      j["policy_file"] = eval_policy;
      onell::write_text(stem.string() + ".json", j.dump(2) + "\n");
      print_report("evaluate", rep);
    } else if (*base_cmd) {
      const auto cfg = base_opts.resolve();
      const auto rep = onell::run_baseline(onell::parse_baseline_kind(base_kind), cfg,
                                           base_seeds.value_or(cfg.final_eval_seeds), base_policy);
      print_report("baseline " + base_kind + " n=" + std::to_string(cfg.n), rep);
    } else if (*best_cmd) {
      const auto cfg = best_opts.resolve();
      const std::string run = best_run.value_or(cfg.output_dir);
      const auto best = onell::select_best(run, best_opts.workers ? std::optional<std::size_t>(cfg.eval_workers)
                                                                  : std::nullopt);
      std::cout << "best checkpoint: step " << best.train_step << "\n";
      print_report("best", best.report);
    } else if (*verify_cmd) {
      const auto cfg = verify_opts.resolve();
      const auto results = onell::verify_all({cfg.base_seed, cfg.eval_workers});
      bool ok = true;
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : results) {
        std::printf("%s %s observed=%.6g tolerance=%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.observed,
                    r.tolerance.c_str());
        ok = ok && r.passed;
        j.push_back({{"name", r.name}, {"observed", r.observed}, {"tolerance", r.tolerance}, {"passed", r.passed}});
      }
      if (verify_json) onell::write_text(*verify_json, j.dump(2) + "\n");
      std::printf("verify: %s\n", ok ? "all checks passed" : "FAILED");
      return ok ? kOk : kVerifyFailed;
    }
  } catch (const onell::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidationError;
  } catch (const onell::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

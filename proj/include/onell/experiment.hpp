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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "onell/config.hpp"
#include "onell/ddqn_agent.hpp"
#include "onell/metrics.hpp"
#include "onell/policies.hpp"

namespace onell {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// JSON has no infinity; unreachable values are written as null.
inline nlohmann::json json_number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

struct CurveRow {
  std::uint64_t train_step = 0;
  double mean_runtime = 0.0;
  double std_runtime = 0.0;
  double success_rate = 0.0;
  bool hit = false;
  double entropy = 0.0;
  std::size_t pairwise_diff_to_prev = 0;
};

inline constexpr const char* kCurveHeader =
    "train_step,mean_runtime,std_runtime,success_rate,hit,entropy,pairwise_diff_to_prev,config_hash";

inline std::string curve_csv_line(const CurveRow& r, const std::string& hash) {
  std::ostringstream os;
  os << r.train_step << ',' << format_double(r.mean_runtime) << ',' << format_double(r.std_runtime) << ','
     << format_double(r.success_rate) << ',' << (r.hit ? 1 : 0) << ',' << format_double(r.entropy) << ','
     << r.pairwise_diff_to_prev << ',' << hash;
  return os.str();
}

inline std::vector<CurveRow> read_curve_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line != kCurveHeader) throw ParseError("unexpected curve CSV header", 1);
  std::vector<CurveRow> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 8) throw ParseError("expected 8 columns", lineno);
    try {
      CurveRow r;
      r.train_step = std::stoull(cells[0]);
      r.mean_runtime = std::stod(cells[1]);
      r.std_runtime = std::stod(cells[2]);
      r.success_rate = std::stod(cells[3]);
      r.hit = cells[4] == "1";
      r.entropy = std::stod(cells[5]);
      r.pairwise_diff_to_prev = std::stoull(cells[6]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad curve row: ") + e.what(), lineno);
    }
  }
  return rows;
}

inline LearningCurve to_learning_curve(const std::vector<CurveRow>& rows) {
  LearningCurve c;
  for (const auto& r : rows) c.push_back({r.train_step, r.mean_runtime, r.hit});
  return c;
}

// seed_index,runtime,success,config_hash
inline void write_eval_csv(const fs::path& path, const EvalReport& rep, const std::string& hash) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "seed_index,runtime,success,config_hash\n";
  for (std::size_t i = 0; i < rep.runtimes.size(); ++i) {
    os << i << ',' << rep.runtimes[i] << ',' << (rep.success[i] ? 1 : 0) << ',' << hash << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline nlohmann::json report_json(const EvalReport& rep) {
  return {{"seeds", rep.runtimes.size()}, {"successes", rep.successes}, {"ert", json_number(rep.ert)},
          {"mean", rep.mean},           {"std", rep.std}};
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline std::string checkpoint_name(std::uint64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "policy_%09llu.txt", static_cast<unsigned long long>(step));
  return buf;
}

// Statistics of pi_disc used as the reference line for hits, AUC and steps-to-surpass.
inline EvalReport disc_baseline(const ExperimentConfig& cfg) {
  return evaluate_policy(discretize_policy(cfg.n), ProblemInstance::all_ones(cfg.n), cfg.cutoff(),
                         cfg.final_eval_seeds,
                         {cfg.base_seed, purpose::kBaselineEval, cfg.eval_workers});
}

// Trains one agent and writes into cfg.output_dir:
//   config.input, config.resolved  configuration as given / fully resolved
//   curve.csv                      one row per checkpoint, flushed as produced
//   checkpoints/policy_*.txt       greedy policy at every checkpoint
//   checkpoints/qnet_*.txt         networks, when save_networks is set
//   qnet_final.txt                 final online network
//   summary.json
inline fs::path run_training(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string hash = cfg.hash();
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir / "checkpoints");
  write_text(dir / "config.input", cfg.source_text);
  write_text(dir / "config.resolved", cfg.canonical());

  const ProblemInstance inst = ProblemInstance::all_ones(cfg.n);
  const EvalReport baseline = disc_baseline(cfg);
  if (log) *log << "pi_disc baseline: mean " << baseline.mean << " std " << baseline.std << "\n";

  std::ofstream curve_os(dir / "curve.csv");
  if (!curve_os) throw std::runtime_error("cannot open curve.csv for writing");
  curve_os << kCurveHeader << "\n" << std::flush;

  const AgentConfig agent = cfg.resolved_agent();
  OneLLEnv env(inst, cfg.cutoff(), derive_seed(cfg.base_seed, purpose::kTraining, 0));
  Rng agent_rng(derive_seed(cfg.base_seed, purpose::kTraining, 1));
  RewardSpec spec = cfg.reward_spec();

  std::vector<CurveRow> rows;
  std::optional<PolicyTable> previous;
  auto sink = [&](const Checkpoint& cp) {
    const EvalReport rep = evaluate_policy(cp.policy, inst, cfg.cutoff(), cfg.eval_seeds,
                                           {cfg.base_seed, purpose::kCheckpointEval, cfg.eval_workers});
    CurveRow row;
    row.train_step = cp.step;
    row.mean_runtime = rep.mean;
    row.std_runtime = rep.std;
    row.success_rate = rep.success_rate();
    row.hit = is_hit(rep.mean, baseline.mean, baseline.std);
    row.entropy = q_entropy(cp.online, cfg.n);
    row.pairwise_diff_to_prev = previous ? pairwise_diff(cp.policy, *previous) : 0;
    previous = cp.policy;
    rows.push_back(row);

    save_policy(cp.policy, (dir / "checkpoints" / checkpoint_name(cp.step)).string(), "config_hash=" + hash);
    if (cfg.save_networks) {
      cp.online.save((dir / "checkpoints" / ("qnet_" + checkpoint_name(cp.step))).string());
    }
    curve_os << curve_csv_line(row, hash) << "\n" << std::flush;
    if (!curve_os) throw std::runtime_error("write failed: curve.csv");
    if (log) {
      *log << "step " << cp.step << " mean_runtime " << rep.mean << (row.hit ? " hit" : "") << "\n" << std::flush;
    }
  };

  // The first row has no predecessor and records a diff of 0.
  TrainResult res = train(env, agent, spec, agent_rng, sink);
  res.online.save((dir / "qnet_final.txt").string());

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["n"] = cfg.n;
  summary["reward"] = to_string(cfg.reward);
  summary["resolved_bias"] = res.resolved_bias ? json_number(*res.resolved_bias) : nlohmann::json(nullptr);
  summary["env_steps"] = res.env_steps;
  summary["gradient_steps"] = res.gradient_steps;
  summary["episodes"] = res.episodes;
  summary["checkpoints"] = res.checkpoints;
  summary["parameters_finite"] = res.finite;
  summary["baseline_pi_disc"] = report_json(baseline);
  if (!rows.empty()) {
    const LearningCurve curve = to_learning_curve(rows);
    const auto best = std::min_element(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
      return a.mean_runtime < b.mean_runtime;
    });
    summary["best_checkpoint"] = {{"train_step", best->train_step}, {"mean_runtime", best->mean_runtime}};
    summary["auc"] = auc(curve, baseline.ert);
    summary["hitting_rate"] = {{"0-100", hitting_rate(curve, baseline.mean, baseline.std, {0.0, 1.0})},
                               {"50-100", hitting_rate(curve, baseline.mean, baseline.std, {0.5, 1.0})},
                               {"75-100", hitting_rate(curve, baseline.mean, baseline.std, {0.75, 1.0})}};
    const auto surpass = steps_to_surpass({curve}, baseline.ert);
    summary["steps_to_surpass"] = surpass ? nlohmann::json(*surpass) : nlohmann::json(nullptr);
  }
  summary["wall_time_seconds"] = wall;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return dir;
}

struct BestCandidate {
  std::uint64_t train_step = 0;
  double curve_mean = 0.0;
  EvalReport report;
};

struct BestResult {
  std::uint64_t train_step = 0;
  PolicyTable policy;
  EvalReport report;
  std::vector<BestCandidate> candidates;
};

// Ranks a run's checkpoints by curve mean runtime, re-evaluates the best
// top_k on final_eval_seeds fresh seeds and keeps the lowest ERT.
inline BestResult select_best(const fs::path& run_dir, std::optional<std::size_t> workers = std::nullopt) {
  ExperimentConfig cfg = ExperimentConfig::load((run_dir / "config.resolved").string());
  if (workers) cfg.eval_workers = *workers;
  std::vector<CurveRow> rows = read_curve_csv(run_dir / "curve.csv");
  if (rows.empty()) throw StateError("run has no checkpoints: " + run_dir.string());
  std::stable_sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
    return a.mean_runtime < b.mean_runtime;
  });
  rows.resize(std::min(rows.size(), cfg.top_k));

  const ProblemInstance inst = ProblemInstance::all_ones(cfg.n);
  std::vector<BestCandidate> cands;
  std::optional<BestResult> best;
  for (const auto& row : rows) {
    PolicyTable p = load_policy((run_dir / "checkpoints" / checkpoint_name(row.train_step)).string());
    EvalReport rep = evaluate_policy(p, inst, cfg.cutoff(), cfg.final_eval_seeds,
                                     {cfg.base_seed, purpose::kFinalEval, cfg.eval_workers});
    cands.push_back({row.train_step, row.mean_runtime, rep});
    const bool better = !best || rep.ert < best->report.ert ||
                        (rep.ert == best->report.ert && row.train_step < best->train_step);
    if (better) best = BestResult{row.train_step, std::move(p), std::move(rep), {}};
  }
  best->candidates = std::move(cands);

  const std::string hash = cfg.hash();
  save_policy(best->policy, (run_dir / "best_policy.txt").string(), "config_hash=" + hash);
  write_eval_csv(run_dir / "best_eval.csv", best->report, hash);
  nlohmann::json j;
  j["config_hash"] = hash;
  j["train_step"] = best->train_step;
  j["report"] = report_json(best->report);
  j["gap_to_pi_disc"] = nullptr;
  const EvalReport baseline = disc_baseline(cfg);
  if (std::isfinite(best->report.ert) && baseline.ert > 0 && std::isfinite(baseline.ert)) {
    j["gap_to_pi_disc"] = gap(best->report.ert, baseline.ert);
  }
  j["baseline_pi_disc"] = report_json(baseline);
  for (const auto& c : best->candidates) {
    j["candidates"].push_back({{"train_step", c.train_step}, {"curve_mean", c.curve_mean},
                               {"ert", json_number(c.report.ert)}, {"mean", c.report.mean}});
  }
  write_text(run_dir / "best.json", j.dump(2) + "\n");
  return *best;
}

enum class BaselineKind { kCont, kDisc, kFile };

inline BaselineKind parse_baseline_kind(const std::string& s) {
  if (s == "cont") return BaselineKind::kCont;
  if (s == "disc") return BaselineKind::kDisc;
  if (s == "file") return BaselineKind::kFile;
  throw ConfigError("unknown baseline kind '" + s + "' (expected cont, disc or file)");
}

// Evaluates a baseline on `seeds` episodes (purpose final-eval), writes
// <out>/baseline_<kind>_n<n>.csv and a matching .json.
inline EvalReport run_baseline(BaselineKind kind, const ExperimentConfig& cfg, std::size_t seeds,
                               const std::optional<std::string>& policy_file = std::nullopt) {
  const ProblemInstance inst = ProblemInstance::all_ones(cfg.n);
  const EvalOptions opts{cfg.base_seed, purpose::kFinalEval, cfg.eval_workers};
  EvalReport rep;
  std::string name;
  switch (kind) {
    case BaselineKind::kCont:
      rep = evaluate_policy(ContinuousPolicy{cfg.n}, inst, cfg.cutoff(), seeds, opts);
      name = "cont";
      break;
    case BaselineKind::kDisc:
      rep = evaluate_policy(discretize_policy(cfg.n), inst, cfg.cutoff(), seeds, opts);
      name = "disc";
      break;
    case BaselineKind::kFile: {
      if (!policy_file) throw ConfigError("baseline kind 'file' requires a policy path");
      const PolicyTable p = load_policy(*policy_file);
      if (p.n() != cfg.n) throw ConfigError("policy file is for n=" + std::to_string(p.n()));
      rep = evaluate_policy(p, inst, cfg.cutoff(), seeds, opts);
      name = "file";
      break;
    }
  }
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const std::string stem = "baseline_" + name + "_n" + std::to_string(cfg.n);
  const std::string hash = cfg.hash();
  write_eval_csv(dir / (stem + ".csv"), rep, hash);
  nlohmann::json j = report_json(rep);
  j["config_hash"] = hash;
  j["kind"] = name;
  j["n"] = cfg.n;
  if (policy_file) j["policy_file"] = *policy_file;
  write_text(dir / (stem + ".json"), j.dump(2) + "\n");
  return rep;
}

}  // namespace onell

#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "shire/bench/report.hpp"
#include "shire/bench/solve.hpp"
#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/intuition/targets.hpp"
#include "shire/ppo/config.hpp"
#include "shire/ppo/trainer.hpp"

namespace shire::bench {

/// Upper bound on a BBR threshold; the baseline best is used when it falls short.
inline std::optional<double> default_bbr_cap(const std::string& env) {
  if (env == "taxi") return 8.1;
  return std::nullopt;
}

struct ComparisonReport {
  std::uint64_t seed = 0;
  SolveCriterion criterion;
  RunReport baseline;
  RunReport shire;
  std::optional<std::int64_t> baseline_steps;
  std::optional<std::int64_t> shire_steps;
  std::optional<double> baseline_seconds;
  std::optional<double> shire_seconds;
  std::optional<double> sample_gain_percent;  // only when both arms solved
  std::optional<double> time_gain_percent;
  bool inconclusive = false;  // neither arm solved
};

struct ComparisonSummary {
  std::string env;
  SolveKind kind = SolveKind::SSR;
  std::vector<ComparisonReport> runs;
  std::optional<double> median_baseline_steps;
  std::optional<double> median_shire_steps;
  std::optional<double> median_sample_gain_percent;
  std::optional<double> median_time_gain_percent;
  std::optional<double> median_baseline_minutes;
  std::optional<double> median_shire_minutes;
};

struct CompareOptions {
  int jobs = 1;
  std::optional<double> bbr_cap;  // see default_bbr_cap
  std::function<void(std::uint64_t seed, bool shire, const CurveRow&)> progress;
};

inline void fill_gains(ComparisonReport& r) {
  const double t = r.criterion.threshold;
  r.baseline_steps = r.baseline.curve.empty() ? std::nullopt : steps_to_solve(r.baseline.curve, t);
  r.shire_steps = r.shire.curve.empty() ? std::nullopt : steps_to_solve(r.shire.curve, t);
  r.baseline_seconds = time_to_solve(r.baseline.curve, t);
  r.shire_seconds = time_to_solve(r.shire.curve, t);
  r.baseline.steps_to_solve = r.baseline_steps;
  r.baseline.time_to_solve_seconds = r.baseline_seconds;
  r.baseline.solve_threshold = t;
  r.shire.steps_to_solve = r.shire_steps;
  r.shire.time_to_solve_seconds = r.shire_seconds;
  r.shire.solve_threshold = t;
  r.inconclusive = !r.baseline_steps && !r.shire_steps;
  if (r.baseline_steps && r.shire_steps) {
    r.sample_gain_percent = gain_percent(static_cast<double>(*r.baseline_steps), static_cast<double>(*r.shire_steps));
    if (r.baseline_seconds && *r.baseline_seconds > 0.0) {
      r.time_gain_percent = gain_percent(*r.baseline_seconds, *r.shire_seconds);
    }
  }
}

/// Baseline arm for one seed: stops at the SSR when the environment has one, otherwise
/// runs the whole budget so its best eval mean can serve as the BBR threshold.
inline RunReport run_baseline(const std::string& env_name, ppo::PPOConfig config, std::uint64_t seed,
                              const CompareOptions& opts = {}) {
  const envs::EnvSpec spec = envs::env_spec(env_name);
  config.seed = seed;
  config.intuition_enabled = false;
  config.stop_at_reward = spec.ssr;
  ppo::ProgressFn progress;
  if (opts.progress) progress = [&opts, seed](const CurveRow& row) { opts.progress(seed, false, row); };
  return ppo::train(env_name, nullptr, config, progress).report;
}

/// SHIRE arm for one seed against an already finished baseline run. The arms share every
/// config field except the intuition flag. In BBR mode the baseline's best eval mean
/// (capped by opts.bbr_cap) becomes the SHIRE arm's stopping threshold.
inline ComparisonReport compare_against_baseline(const std::string& env_name, const intuition::IntuitionPipeline& pipeline,
                                                 ppo::PPOConfig config, std::uint64_t seed, RunReport baseline,
                                                 const CompareOptions& opts = {}) {
  const envs::EnvSpec spec = envs::env_spec(env_name);
  config.seed = seed;
  config.intuition_enabled = true;
  ComparisonReport r;
  r.seed = seed;
  r.criterion.eval_episodes = config.eval_episodes;
  r.baseline = std::move(baseline);
  if (spec.ssr) {
    r.criterion.kind = SolveKind::SSR;
    r.criterion.threshold = *spec.ssr;
  } else {
    r.criterion.kind = SolveKind::BBR;
    double threshold = r.baseline.curve.empty() ? 0.0 : best_eval_reward(r.baseline.curve);
    if (opts.bbr_cap) threshold = std::min(threshold, *opts.bbr_cap);
    r.criterion.threshold = threshold;
  }
  config.stop_at_reward = r.criterion.threshold;
  ppo::ProgressFn progress;
  if (opts.progress) progress = [&opts, seed](const CurveRow& row) { opts.progress(seed, true, row); };
  r.shire = ppo::train(env_name, &pipeline, config, progress).report;
  fill_gains(r);
  return r;
}

/// Baseline and SHIRE arms for one seed.
inline ComparisonReport compare_seed(const std::string& env_name, const intuition::IntuitionPipeline& pipeline,
                                     const ppo::PPOConfig& config, std::uint64_t seed, const CompareOptions& opts = {}) {
  return compare_against_baseline(env_name, pipeline, config, seed, run_baseline(env_name, config, seed, opts), opts);
}

inline ComparisonSummary summarize(const std::string& env_name, std::vector<ComparisonReport> runs) {
  ComparisonSummary s;
  s.env = env_name;
  s.kind = runs.empty() ? SolveKind::SSR : runs.front().criterion.kind;
  std::vector<double> bs, ss, g, tg, bm, sm;
  for (const auto& r : runs) {
    if (r.baseline_steps) bs.push_back(static_cast<double>(*r.baseline_steps));
    if (r.shire_steps) ss.push_back(static_cast<double>(*r.shire_steps));
    if (r.sample_gain_percent) g.push_back(*r.sample_gain_percent);
    if (r.time_gain_percent) tg.push_back(*r.time_gain_percent);
    if (r.baseline_seconds) bm.push_back(*r.baseline_seconds / 60.0);
    if (r.shire_seconds) sm.push_back(*r.shire_seconds / 60.0);
  }
  auto med = [](const std::vector<double>& v) { return v.empty() ? std::nullopt : std::optional<double>(median(v)); };
  s.median_baseline_steps = med(bs);
  s.median_shire_steps = med(ss);
  s.median_sample_gain_percent = med(g);
  s.median_time_gain_percent = med(tg);
  s.median_baseline_minutes = med(bm);
  s.median_shire_minutes = med(sm);
  s.runs = std::move(runs);
  return s;
}

/// Per-seed comparisons, optionally spread over `opts.jobs` worker threads.
inline ComparisonSummary compare(const std::string& env_name, const intuition::IntuitionPipeline& pipeline,
                                 const ppo::PPOConfig& config, const std::vector<std::uint64_t>& seeds,
                                 CompareOptions opts = {}) {
  if (seeds.empty()) throw ConfigError("compare: need at least one seed");
  if (opts.jobs < 1) throw ConfigError("compare: jobs must be >= 1");
  std::vector<ComparisonReport> runs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::mutex progress_mu;
  if (opts.progress) {
    opts.progress = [&progress_mu, inner = opts.progress](std::uint64_t seed, bool shire, const CurveRow& row) {
      std::lock_guard<std::mutex> lock(progress_mu);
      inner(seed, shire, row);
    };
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        runs[i] = compare_seed(env_name, pipeline, config, seeds[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(opts.jobs, static_cast<int>(seeds.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return summarize(env_name, std::move(runs));
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  return {{"seed", r.seed},
          {"criterion", {{"kind", to_string(r.criterion.kind)}, {"threshold", r.criterion.threshold},
                         {"eval_episodes", r.criterion.eval_episodes}}},
          {"baseline_steps", optional_json(r.baseline_steps)},
          {"shire_steps", optional_json(r.shire_steps)},
          {"baseline_seconds", optional_json(r.baseline_seconds)},
          {"shire_seconds", optional_json(r.shire_seconds)},
          {"sample_gain_percent", optional_json(r.sample_gain_percent)},
          {"time_gain_percent", optional_json(r.time_gain_percent)},
          {"inconclusive", r.inconclusive},
          {"baseline", to_json(r.baseline)},
          {"shire", to_json(r.shire)}};
}

inline nlohmann::json to_json(const ComparisonSummary& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  return {{"env", s.env},
          {"kind", to_string(s.kind)},
          {"median_baseline_steps", optional_json(s.median_baseline_steps)},
          {"median_shire_steps", optional_json(s.median_shire_steps)},
          {"median_sample_gain_percent", optional_json(s.median_sample_gain_percent)},
          {"median_time_gain_percent", optional_json(s.median_time_gain_percent)},
          {"median_baseline_minutes", optional_json(s.median_baseline_minutes)},
          {"median_shire_minutes", optional_json(s.median_shire_minutes)},
          {"runs", runs}};
}

inline const char* kSummaryCsvHeader =
    "environment,criterion,seed,baseline_steps,shire_steps,gain_percent,baseline_minutes,shire_minutes,time_gain_percent";

/// One row per seed plus a "median" row. Unsolved or undefined cells are empty.
inline void write_summary_csv(std::ostream& out, const ComparisonSummary& s) {
  auto cell = [&out](const auto& v) {
    if (v) out << *v;
  };
  auto minutes = [](const std::optional<double>& sec) {
    return sec ? std::optional<double>(*sec / 60.0) : std::nullopt;
  };
  out << kSummaryCsvHeader << '\n' << std::setprecision(10);
  for (const auto& r : s.runs) {
    out << s.env << ',' << to_string(r.criterion.kind) << ',' << r.seed << ',';
    cell(r.baseline_steps);
    out << ',';
    cell(r.shire_steps);
    out << ',';
    cell(r.sample_gain_percent);
    out << ',';
    cell(minutes(r.baseline_seconds));
    out << ',';
    cell(minutes(r.shire_seconds));
    out << ',';
    cell(r.time_gain_percent);
    out << '\n';
  }
  out << s.env << ',' << to_string(s.kind) << ",median,";
  cell(s.median_baseline_steps);
  out << ',';
  cell(s.median_shire_steps);
  out << ',';
  cell(s.median_sample_gain_percent);
  out << ',';
  cell(s.median_baseline_minutes);
  out << ',';
  cell(s.median_shire_minutes);
  out << ',';
  cell(s.median_time_gain_percent);
  out << '\n';
}

}  // namespace shire::bench

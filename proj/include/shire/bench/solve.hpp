#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shire/bench/report.hpp"
#include "shire/error.hpp"

namespace shire::bench {

enum class SolveKind { SSR, BBR };

inline const char* to_string(SolveKind k) { return k == SolveKind::SSR ? "SSR" : "BBR"; }

struct SolveCriterion {
  SolveKind kind = SolveKind::SSR;
  double threshold = 0.0;
  int eval_episodes = 100;

  void validate() const {
    if (eval_episodes < 1) throw ConfigError("solve criterion: eval_episodes must be >= 1");
  }
};

/// First cumulative step whose eval mean reaches the threshold.
inline std::optional<std::int64_t> steps_to_solve(const std::vector<CurveRow>& curve, double threshold) {
  if (curve.empty()) throw UsageError("steps_to_solve: empty learning curve");
  for (const auto& row : curve) {
    if (row.mean_eval_reward >= threshold) return row.step;
  }
  return std::nullopt;
}

inline std::optional<std::int64_t> steps_to_solve(const std::vector<CurveRow>& curve, const SolveCriterion& c) {
  return steps_to_solve(curve, c.threshold);
}

/// Wall-clock seconds at the first crossing.
inline std::optional<double> time_to_solve(const std::vector<CurveRow>& curve, double threshold) {
  for (const auto& row : curve) {
    if (row.mean_eval_reward >= threshold) return row.wall_seconds;
  }
  return std::nullopt;
}

inline double best_eval_reward(const std::vector<CurveRow>& curve) {
  if (curve.empty()) throw UsageError("best_eval_reward: empty learning curve");
  double best = curve.front().mean_eval_reward;
  for (const auto& row : curve) best = std::max(best, row.mean_eval_reward);
  return best;
}

/// 100 * (base - shire) / base.
inline double gain_percent(double base, double shire) {
  if (base == 0.0) throw UsageError("gain_percent: zero baseline");
  return 100.0 * (base - shire) / base;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw UsageError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace shire::bench

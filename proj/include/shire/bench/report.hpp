#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shire::bench {

/// One evaluation point: cumulative training interactions and the update metrics that
/// produced the evaluated policy.
struct CurveRow {
  std::int64_t step = 0;
  double mean_eval_reward = 0.0;
  double std_eval_reward = 0.0;
  double loss_policy = 0.0;
  double loss_value = 0.0;
  double loss_entropy = 0.0;
  double loss_intuition = 0.0;
  double agreement_rate = 0.0;
  double clip_fraction = 0.0;
  double wall_seconds = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

struct RunReport {
  std::string env;
  std::uint64_t seed = 0;
  bool intuition_enabled = false;
  std::string net_name;
  std::string net_hash;
  std::int64_t total_steps = 0;
  std::optional<double> solve_threshold;
  std::optional<std::int64_t> steps_to_solve;
  std::optional<double> time_to_solve_seconds;
  double wall_clock_seconds = 0.0;
  std::optional<double> overhead_us_per_sample;
  double final_eval_mean = 0.0;
  double final_eval_std = 0.0;
  std::vector<CurveRow> curve;
  nlohmann::json config;
};

inline const char* kCurveCsvHeader =
    "step,mean_eval_reward,loss_policy,loss_value,loss_entropy,loss_intuition,agreement_rate";

inline void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << kCurveCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : curve) {
    out << r.step << ',' << r.mean_eval_reward << ',' << r.loss_policy << ',' << r.loss_value << ','
        << r.loss_entropy << ',' << r.loss_intuition << ',' << r.agreement_rate << '\n';
  }
}

inline nlohmann::json to_json(const CurveRow& r) {
  return {{"step", r.step},
          {"mean_eval_reward", r.mean_eval_reward},
          {"std_eval_reward", r.std_eval_reward},
          {"loss_policy", r.loss_policy},
          {"loss_value", r.loss_value},
          {"loss_entropy", r.loss_entropy},
          {"loss_intuition", r.loss_intuition},
          {"agreement_rate", r.agreement_rate},
          {"clip_fraction", r.clip_fraction},
          {"wall_seconds", r.wall_seconds}};
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& row : r.curve) curve.push_back(to_json(row));
  return {{"env", r.env},
          {"seed", r.seed},
          {"intuition_enabled", r.intuition_enabled},
          {"net", r.net_name},
          {"net_hash", r.net_hash},
          {"total_steps", r.total_steps},
          {"solve_threshold", optional_json(r.solve_threshold)},
          {"steps_to_solve", optional_json(r.steps_to_solve)},
          {"time_to_solve_seconds", optional_json(r.time_to_solve_seconds)},
          {"wall_clock_seconds", r.wall_clock_seconds},
          {"overhead_us_per_sample", optional_json(r.overhead_us_per_sample)},
          {"final_eval_mean", r.final_eval_mean},
          {"final_eval_std", r.final_eval_std},
          {"config", r.config},
          {"curve", curve}};
}

/// 64-bit FNV-1a, hex. Identifies the exact net file a run used.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

}  // namespace shire::bench

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/intuition/loss.hpp"
#include "shire/intuition/targets.hpp"
#include "shire/random.hpp"

namespace shire::bench {

struct OverheadResult {
  double us_per_sample = 0.0;          // median over repeats
  double min_us_per_sample = 0.0;
  std::vector<double> repeats_us;
  std::int64_t n_samples = 0;
};

/// Observations visited by a uniformly random policy, with auto-reset.
inline Eigen::MatrixXd random_policy_observations(const std::string& env_name, std::int64_t n, std::uint64_t seed) {
  auto env = envs::make_env(env_name);
  Rng rng(derive_seed(seed, 0));
  Eigen::MatrixXd out(n, env->spec().obs_dim);
  envs::Observation obs = env->reset(derive_seed(seed, 1));
  for (std::int64_t i = 0; i < n; ++i) {
    out.row(i) = obs.transpose();
    auto r = env->step(static_cast<int>(uniform_index(rng, env->spec().n_actions)));
    obs = r.done() ? env->reset() : std::move(r.obs);
  }
  return out;
}

/// Times encode -> inference -> target choice -> hinge loss and gradient over buffered
/// observations. Environment stepping and the PPO update are outside the timed region.
/// One untimed warmup pass precedes `repeats` timed passes.
inline OverheadResult measure_overhead(const intuition::IntuitionPipeline& pipeline, std::int64_t n_samples,
                                       int repeats = 5, std::uint64_t seed = 0) {
  using Clock = std::chrono::steady_clock;
  if (n_samples < 1) throw ConfigError("measure_overhead: n_samples must be positive");
  if (repeats < 1) throw ConfigError("measure_overhead: repeats must be positive");
  const std::string& env_name = pipeline.net().env;
  const Eigen::MatrixXd obs = random_policy_observations(env_name, n_samples, seed);
  Rng logit_rng(derive_seed(seed, 2));
  Eigen::MatrixXd logits(n_samples, envs::env_spec(env_name).n_actions);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = standard_normal(logit_rng);

  Rng rng(derive_seed(seed, 3));
  auto pass = [&]() {
    const intuition::IntuitionTargets t = pipeline.compute_targets(obs, intuition::TargetMode::Map, rng);
    const auto h = intuition::intuition_loss_with_grad(logits, t, 1.0);
    return h.value;
  };
  volatile double sink = pass();
  OverheadResult res;
  res.n_samples = n_samples;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    sink = sink + pass();
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    res.repeats_us.push_back(1e6 * sec / static_cast<double>(n_samples));
  }
  std::vector<double> sorted = res.repeats_us;
  std::sort(sorted.begin(), sorted.end());
  res.min_us_per_sample = sorted.front();
  res.us_per_sample = sorted[sorted.size() / 2];
  return res;
}

}  // namespace shire::bench

#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shire/adam.hpp"
#include "shire/bench/evaluate.hpp"
#include "shire/bench/report.hpp"
#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/intuition/targets.hpp"
#include "shire/nn.hpp"
#include "shire/ppo/buffer.hpp"
#include "shire/ppo/config.hpp"
#include "shire/ppo/loss.hpp"
#include "shire/random.hpp"

namespace shire::ppo {

/// Independent random streams derived from the run seed.
enum Stream : std::uint64_t { kInitStream = 1, kEnvStream, kActionStream, kShuffleStream, kIntuitionStream, kEvalStream };

struct UpdateMetrics {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double intuition = 0.0;
  double ppo_total = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double agreement_rate = 0.0;
  double first_ratio_deviation = 0.0;  // max |ratio - 1| on the first minibatch of the first epoch
  double advantage_mean = 0.0;         // after normalisation
  double advantage_std = 0.0;
  double max_clipped_grad_norm = 0.0;
  double intuition_seconds = 0.0;      // time spent evaluating the intuition loss
  int minibatches = 0;
};

inline nlohmann::json to_json(const PPOConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_eps", c.clip_eps},
          {"lr", c.lr},
          {"n_steps", c.n_steps},
          {"minibatch_size", c.minibatch_size},
          {"n_epochs", c.n_epochs},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"intuition_enabled", c.intuition_enabled},
          {"intuition_coef", c.intuition_coef},
          {"intuition_margin", c.intuition_margin},
          {"target_mode", intuition::to_string(c.target_mode)},
          {"seed", c.seed},
          {"total_steps", c.total_steps},
          {"eval_episodes", c.eval_episodes},
          {"stop_at_reward", c.stop_at_reward ? nlohmann::json(*c.stop_at_reward) : nlohmann::json(nullptr)}};
}

/// n_epochs passes of shuffled minibatch Adam steps on the clipped surrogate
/// (+ lambda_I * intuition hinge when `targets` is given).
inline UpdateMetrics ppo_update(nn::ActorCriticParams& params, nn::AdamState& adam, const RolloutBuffer& buf,
                                const PPOConfig& cfg, const intuition::IntuitionTargets* targets, Rng& shuffle_rng) {
  using Clock = std::chrono::steady_clock;
  const int n = buf.size();
  if (n % cfg.minibatch_size != 0) throw ConfigError("minibatch_size must divide the buffer size");
  if (targets && static_cast<int>(targets->size()) != n) throw ConfigError("intuition targets do not cover the buffer");

  UpdateMetrics m;
  Eigen::VectorXd adv = buf.advantages;
  const double mean = adv.mean();
  adv.array() -= mean;
  if (n > 1) {
    const double sd = std::sqrt(adv.squaredNorm() / (n - 1));
    adv /= sd + 1e-8;
  }
  m.advantage_mean = adv.mean();
  m.advantage_std = n > 1 ? std::sqrt((adv.array() - m.advantage_mean).square().sum() / (n - 1)) : 0.0;

  if (targets) m.agreement_rate = intuition::agreement_rate(intuition::mismatch_vector(buf.actions, *targets));

  LossCoefficients coef{cfg.clip_eps, cfg.value_coef, cfg.entropy_coef, cfg.intuition_coef, cfg.intuition_margin};
  std::vector<int> order(static_cast<std::size_t>(n));
  const int mb_size = cfg.minibatch_size;
  Eigen::MatrixXd x(mb_size, buf.features.cols());
  MinibatchData mb;
  mb.actions.resize(static_cast<std::size_t>(mb_size));
  mb.old_logprobs.resize(mb_size);
  mb.advantages.resize(mb_size);
  mb.returns.resize(mb_size);
  intuition::IntuitionTargets mb_targets;
  if (targets) {
    mb_targets.actions.resize(static_cast<std::size_t>(mb_size));
    mb_targets.weights.resize(static_cast<std::size_t>(mb_size));
    mb.targets = &mb_targets;
  }

  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(uniform_index(shuffle_rng, i + 1))]);

    for (int start = 0; start < n; start += mb_size) {
      for (int j = 0; j < mb_size; ++j) {
        const int idx = order[static_cast<std::size_t>(start + j)];
        const auto k = static_cast<std::size_t>(idx);
        x.row(j) = buf.features.row(idx);
        mb.actions[static_cast<std::size_t>(j)] = buf.actions[k];
        mb.old_logprobs(j) = buf.logprobs(idx);
        mb.advantages(j) = adv(idx);
        mb.returns(j) = buf.returns(idx);
        if (targets) {
          mb_targets.actions[static_cast<std::size_t>(j)] = targets->actions[k];
          mb_targets.weights[static_cast<std::size_t>(j)] = targets->weights[k];
        }
      }
      const nn::ForwardCache cache = nn::forward_cached(params, x);
      const auto t0 = Clock::now();
      const LossBreakdown loss = ppo_loss(cache.logits, cache.values, mb, coef);
      if (targets) m.intuition_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
      if (!std::isfinite(loss.total)) throw NumericalError("ppo_update: non-finite loss");

      nn::Gradients g = nn::backward(params, cache, loss.dlogits, loss.dvalues);
      nn::clip_global_norm(g, cfg.max_grad_norm);
      m.max_clipped_grad_norm = std::max(m.max_clipped_grad_norm, g.norm());
      nn::adam_step(params, g, adam, cfg.lr);

      if (m.minibatches == 0) m.first_ratio_deviation = loss.max_ratio_deviation;
      m.policy += loss.policy;
      m.value += loss.value;
      m.entropy += loss.entropy;
      m.intuition += loss.intuition;
      m.ppo_total += loss.ppo_total;
      m.total += loss.total;
      m.clip_fraction += loss.clip_fraction;
      ++m.minibatches;
    }
  }
  const double k = 1.0 / m.minibatches;
  m.policy *= k;
  m.value *= k;
  m.entropy *= k;
  m.intuition *= k;
  m.ppo_total *= k;
  m.total *= k;
  m.clip_fraction *= k;
  return m;
}

struct TrainResult {
  nn::ActorCriticParams params;
  bench::RunReport report;
  std::vector<UpdateMetrics> updates;
};

using ProgressFn = std::function<void(const bench::CurveRow&)>;

/// Collect -> (targets) -> GAE -> update -> evaluate, repeated until the step budget
/// is spent or an evaluation reaches cfg.stop_at_reward.
inline TrainResult train(const std::string& env_name, const intuition::IntuitionPipeline* pipeline,
                         const PPOConfig& cfg, const ProgressFn& progress = {}) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  auto env = envs::make_env(env_name);
  const auto& spec = env->spec();
  if (cfg.intuition_enabled) {
    if (!pipeline) throw ConfigError("intuition enabled but no intuition net given");
    if (pipeline->net().env != env_name) {
      throw ConfigError("intuition net '" + pipeline->net().name + "' is for '" + pipeline->net().env +
                        "', not '" + env_name + "'");
    }
  }
  const bool use_intuition = cfg.intuition_enabled && pipeline;

  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  Rng action_rng(derive_seed(cfg.seed, kActionStream));
  Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
  Rng intuition_rng(derive_seed(cfg.seed, kIntuitionStream));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, kEvalStream);

  nn::NetworkShape shape{spec.feature_dim, spec.n_actions, {64, 64}};
  TrainResult result{nn::init_params(shape, init_rng), {}, {}};
  nn::AdamState adam(result.params.size());

  auto& report = result.report;
  report.env = env_name;
  report.seed = cfg.seed;
  report.intuition_enabled = use_intuition;
  report.config = to_json(cfg);
  report.solve_threshold = cfg.stop_at_reward;
  if (pipeline) report.net_name = pipeline->net().name;

  RolloutSource src{*env, env->reset(derive_seed(cfg.seed, kEnvStream)), 0.0, {}};
  const auto start = Clock::now();
  double intuition_seconds = 0.0;
  std::int64_t intuition_samples = 0;
  std::int64_t steps = 0;

  while (steps + cfg.n_steps <= cfg.total_steps) {
    RolloutBuffer buf = collect_rollout(src, result.params, cfg.n_steps, action_rng);
    std::optional<intuition::IntuitionTargets> targets;
    if (use_intuition) {
      const auto t0 = Clock::now();
      targets = pipeline->compute_targets(buf.raw_obs, cfg.target_mode, intuition_rng);
      intuition_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
      intuition_samples += buf.size();
    }
    compute_gae(buf, cfg.gamma, cfg.gae_lambda, buf.last_value);
    UpdateMetrics m = ppo_update(result.params, adam, buf, cfg, targets ? &*targets : nullptr, shuffle_rng);
    intuition_seconds += m.intuition_seconds;
    steps += cfg.n_steps;

    const bench::EvalResult ev = bench::evaluate(result.params, env_name, cfg.eval_episodes, eval_seed);
    bench::CurveRow row;
    row.step = steps;
    row.mean_eval_reward = ev.mean;
    row.std_eval_reward = ev.std;
    row.loss_policy = m.policy;
    row.loss_value = m.value;
    row.loss_entropy = m.entropy;
    row.loss_intuition = m.intuition;
    row.agreement_rate = m.agreement_rate;
    row.clip_fraction = m.clip_fraction;
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.curve.push_back(row);
    result.updates.push_back(m);
    report.final_eval_mean = ev.mean;
    report.final_eval_std = ev.std;
    if (progress) progress(row);

    if (cfg.stop_at_reward && ev.mean >= *cfg.stop_at_reward) {
      report.steps_to_solve = steps;
      report.time_to_solve_seconds = row.wall_seconds;
      break;
    }
  }
  report.total_steps = steps;
  report.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (use_intuition && intuition_samples > 0) {
    report.overhead_us_per_sample = 1e6 * intuition_seconds / static_cast<double>(intuition_samples);
  }
  return result;
}

}  // namespace shire::ppo

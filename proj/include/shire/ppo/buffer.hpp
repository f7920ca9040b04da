#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "shire/envs/environment.hpp"
#include "shire/error.hpp"
#include "shire/nn.hpp"
#include "shire/random.hpp"

namespace shire::ppo {

struct Transition {
  Eigen::VectorXd obs;
  int action = 0;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  double logprob = 0.0;
  double value = 0.0;
};

/// Fixed-capacity on-policy storage, column-per-field.
struct RolloutBuffer {
  Eigen::MatrixXd raw_obs;   // n x obs_dim, what intuition encoders read
  Eigen::MatrixXd features;  // n x feature_dim, what the network reads
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  Eigen::VectorXd logprobs;
  Eigen::VectorXd values;
  Eigen::VectorXd bootstrap_values;  // critic value of the final observation on truncation, else 0
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  double last_value = 0.0;  // critic value after the last transition (0 if it ended an episode)

  RolloutBuffer() = default;
  RolloutBuffer(int n, int obs_dim, int feature_dim)
      : raw_obs(n, obs_dim),
        features(n, feature_dim),
        actions(static_cast<std::size_t>(n)),
        rewards(n),
        terminated(static_cast<std::size_t>(n)),
        truncated(static_cast<std::size_t>(n)),
        logprobs(n),
        values(n),
        bootstrap_values(Eigen::VectorXd::Zero(n)),
        advantages(Eigen::VectorXd::Zero(n)),
        returns(Eigen::VectorXd::Zero(n)) {}

  int size() const { return static_cast<int>(actions.size()); }

  Transition at(int i) const {
    const auto k = static_cast<std::size_t>(i);
    return {raw_obs.row(i).transpose(), actions[k], rewards(i), terminated[k] != 0,
            truncated[k] != 0,          logprobs(i), values(i)};
  }
};

/// Environment plus the observation carried between rollouts.
struct RolloutSource {
  envs::Environment& env;
  envs::Observation obs;
  double episode_return = 0.0;
  std::vector<double> finished_returns;
};

/// Steps the policy for exactly n_steps transitions, auto-resetting finished episodes.
inline RolloutBuffer collect_rollout(RolloutSource& src, const nn::ActorCriticParams& params, int n_steps,
                                     Rng& rng) {
  const auto& spec = src.env.spec();
  if (params.obs_dim() != spec.feature_dim || params.n_actions() != spec.n_actions) {
    throw ConfigError("collect_rollout: network shape does not match environment '" + spec.name + "'");
  }
  RolloutBuffer buf(n_steps, spec.obs_dim, spec.feature_dim);
  Eigen::MatrixXd x(1, spec.feature_dim);
  Eigen::VectorXd feat(spec.feature_dim);
  for (int t = 0; t < n_steps; ++t) {
    src.env.features(src.obs, feat);
    x.row(0) = feat.transpose();
    const nn::PolicyOutput out = nn::forward(params, x);
    const nn::SampledAction sampled = nn::sample_action(out.logits.row(0).transpose(), rng);

    buf.raw_obs.row(t) = src.obs.transpose();
    buf.features.row(t) = feat.transpose();
    buf.actions[static_cast<std::size_t>(t)] = sampled.action;
    buf.logprobs(t) = sampled.logprob;
    buf.values(t) = out.values(0);

    envs::StepResult r = src.env.step(sampled.action);
    buf.rewards(t) = r.reward;
    buf.terminated[static_cast<std::size_t>(t)] = r.terminated;
    buf.truncated[static_cast<std::size_t>(t)] = r.truncated && !r.terminated;
    src.episode_return += r.reward;
    if (r.truncated && !r.terminated) {
      src.env.features(r.obs, feat);
      x.row(0) = feat.transpose();
      buf.bootstrap_values(t) = nn::critic_values(params, x)(0);
    }
    if (r.done()) {
      src.finished_returns.push_back(src.episode_return);
      src.episode_return = 0.0;
      src.obs = src.env.reset();
    } else {
      src.obs = std::move(r.obs);
    }
  }
  const auto last = static_cast<std::size_t>(n_steps - 1);
  if (buf.terminated[last] || buf.truncated[last]) {
    buf.last_value = 0.0;
  } else {
    src.env.features(src.obs, feat);
    x.row(0) = feat.transpose();
    buf.last_value = nn::critic_values(params, x)(0);
  }
  return buf;
}

/// Generalised advantage estimation over the buffer. Terminations cut bootstrapping;
/// truncations bootstrap from the stored value of the final observation.
inline void compute_gae(RolloutBuffer& buf, double gamma, double lambda, double last_value) {
  const int n = buf.size();
  double next_advantage = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const auto k = static_cast<std::size_t>(t);
    double next_value;
    double carry;
    if (buf.terminated[k]) {
      next_value = 0.0;
      carry = 0.0;
    } else if (buf.truncated[k]) {
      next_value = buf.bootstrap_values(t);
      carry = 0.0;
    } else {
      next_value = t == n - 1 ? last_value : buf.values(t + 1);
      carry = t == n - 1 ? 0.0 : next_advantage;
    }
    const double delta = buf.rewards(t) + gamma * next_value - buf.values(t);
    next_advantage = delta + gamma * lambda * carry;
    buf.advantages(t) = next_advantage;
  }
  buf.returns = buf.advantages + buf.values;
}

}  // namespace shire::ppo

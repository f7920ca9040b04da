#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "shire/error.hpp"
#include "shire/intuition/inference.hpp"

namespace shire::ppo {

struct PPOConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double lr = 3e-4;
  int n_steps = 2048;
  int minibatch_size = 64;
  int n_epochs = 10;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;

  bool intuition_enabled = false;
  double intuition_coef = 0.1;  // lambda_I
  double intuition_margin = 1.0;
  intuition::TargetMode target_mode = intuition::TargetMode::Map;

  std::uint64_t seed = 0;
  std::int64_t total_steps = 200'000;
  int eval_episodes = 100;
  /// Stop as soon as an evaluation reaches this mean return.
  std::optional<double> stop_at_reward;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must be in [0, 1]");
    if (!(clip_eps > 0.0)) throw ConfigError("clip_eps must be positive");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (n_steps < 1 || minibatch_size < 1 || n_epochs < 1) {
      throw ConfigError("n_steps, minibatch_size and n_epochs must be positive");
    }
    if (n_steps % minibatch_size != 0) throw ConfigError("minibatch_size must divide n_steps");
    if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw ConfigError("loss coefficients must be >= 0");
    if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm must be positive");
    if (!(intuition_coef >= 0.0)) throw ConfigError("intuition_coef must be >= 0");
    if (!(intuition_margin > 0.0)) throw ConfigError("intuition_margin must be positive");
    if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  }
};

/// Shipped per-environment defaults: step budget and intuition coefficient.
inline PPOConfig default_config(const std::string& env) {
  PPOConfig c;
  if (env == "cartpole") {
    c.total_steps = 200'000;
    c.intuition_coef = 0.01;
  } else if (env == "mountaincar") {
    c.total_steps = 600'000;
    c.intuition_coef = 0.3;
  } else if (env == "lander") {
    c.total_steps = 400'000;
    c.intuition_coef = 0.03;
  } else if (env == "taxi") {
    c.total_steps = 1'500'000;
    c.intuition_coef = 0.1;
  } else {
    throw ConfigError("no defaults for environment '" + env + "'");
  }
  return c;
}

/// Default intuition net file name for an environment.
inline std::string default_net_name(const std::string& env) {
  if (env == "lander") return "lander_basic.net";
  return env + ".net";
}

}  // namespace shire::ppo

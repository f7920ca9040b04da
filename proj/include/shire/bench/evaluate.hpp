#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/nn.hpp"
#include "shire/random.hpp"

namespace shire::bench {

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> returns;
};

/// Greedy (argmax) rollouts of `episodes` fresh episodes; episode k is seeded with
/// derive_seed(seed, k). Episodes run in lockstep so each step is one batched forward.
inline EvalResult evaluate(const nn::ActorCriticParams& params, const std::string& env_name, int episodes,
                           std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("evaluate: need at least one episode");
  std::vector<std::unique_ptr<envs::Environment>> envs;
  std::vector<envs::Observation> obs;
  for (int k = 0; k < episodes; ++k) {
    envs.push_back(envs::make_env(env_name));
    obs.push_back(envs.back()->reset(derive_seed(seed, static_cast<std::uint64_t>(k))));
  }
  const auto& spec = envs.front()->spec();
  if (params.obs_dim() != spec.feature_dim || params.n_actions() != spec.n_actions) {
    throw ConfigError("evaluate: network shape does not match environment '" + env_name + "'");
  }
  EvalResult result;
  result.returns.assign(static_cast<std::size_t>(episodes), 0.0);
  std::vector<int> live(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) live[static_cast<std::size_t>(k)] = k;

  Eigen::MatrixXd x;
  Eigen::VectorXd feat(spec.feature_dim);
  while (!live.empty()) {
    x.resize(static_cast<Eigen::Index>(live.size()), spec.feature_dim);
    for (std::size_t r = 0; r < live.size(); ++r) {
      const auto k = static_cast<std::size_t>(live[r]);
      envs[k]->features(obs[k], feat);
      x.row(static_cast<Eigen::Index>(r)) = feat.transpose();
    }
    const Eigen::MatrixXd logits = nn::policy_logits(params, x);
    std::vector<int> still;
    still.reserve(live.size());
    for (std::size_t r = 0; r < live.size(); ++r) {
      const auto k = static_cast<std::size_t>(live[r]);
      const int action = nn::greedy_action(logits.row(static_cast<Eigen::Index>(r)).transpose());
      envs::StepResult s = envs[k]->step(action);
      result.returns[k] += s.reward;
      if (!s.done()) {
        obs[k] = std::move(s.obs);
        still.push_back(live[r]);
      }
    }
    live.swap(still);
  }

  double sum = 0.0;
  for (double r : result.returns) sum += r;
  result.mean = sum / episodes;
  double sq = 0.0;
  for (double r : result.returns) sq += (r - result.mean) * (r - result.mean);
  result.std = std::sqrt(sq / episodes);
  return result;
}

}  // namespace shire::bench

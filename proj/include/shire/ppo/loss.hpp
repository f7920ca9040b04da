#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shire/error.hpp"
#include "shire/intuition/loss.hpp"
#include "shire/nn.hpp"

namespace shire::ppo {

struct LossCoefficients {
  double clip_eps = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double intuition_coef = 0.0;
  double margin = 1.0;
};

/// Inputs for one minibatch, already gathered.
struct MinibatchData {
  std::vector<int> actions;
  Eigen::VectorXd old_logprobs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  const intuition::IntuitionTargets* targets = nullptr;  // null when intuition is off
};

struct LossBreakdown {
  double policy = 0.0;
  double value = 0.0;      // mean squared error, before value_coef
  double entropy = 0.0;    // mean entropy, before entropy_coef
  double intuition = 0.0;  // hinge loss, before intuition_coef
  double ppo_total = 0.0;  // policy + value_coef * value - entropy_coef * entropy
  double total = 0.0;      // ppo_total + intuition_coef * intuition
  double clip_fraction = 0.0;
  double max_ratio_deviation = 0.0;
  Eigen::MatrixXd dlogits;
  Eigen::VectorXd dvalues;
};

/// Clipped-surrogate PPO loss with optional intuition hinge, and its gradient with
/// respect to logits and values.
inline LossBreakdown ppo_loss(const Eigen::MatrixXd& logits, const Eigen::VectorXd& values, const MinibatchData& mb,
                              const LossCoefficients& k) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index na = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossBreakdown out;
  out.dlogits = Eigen::MatrixXd::Zero(n, na);
  out.dvalues = Eigen::VectorXd::Zero(n);

  const Eigen::MatrixXd logp = nn::log_softmax(logits);
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = mb.actions[static_cast<std::size_t>(i)];
    const double adv = mb.advantages(i);
    const double ratio = std::exp(logp(i, a) - mb.old_logprobs(i));
    const double clipped_ratio = std::clamp(ratio, 1.0 - k.clip_eps, 1.0 + k.clip_eps);
    const double unclipped_obj = ratio * adv;
    const double clipped_obj = clipped_ratio * adv;
    out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(ratio - 1.0));
    if (std::abs(ratio - 1.0) > k.clip_eps) ++clipped;

    // d(-min(...))/dlogp_a; zero when the clipped branch is the active minimum.
    double dlogp = 0.0;
    if (unclipped_obj <= clipped_obj) {
      out.policy -= unclipped_obj;
      dlogp = -adv * ratio * inv_n;
    } else {
      out.policy -= clipped_obj;
    }

    double h = 0.0;
    for (Eigen::Index j = 0; j < na; ++j) {
      const double p = std::exp(logp(i, j));
      if (p > 0.0) h -= p * logp(i, j);
    }
    out.entropy += h;

    for (Eigen::Index j = 0; j < na; ++j) {
      const double p = std::exp(logp(i, j));
      const double onehot = j == a ? 1.0 : 0.0;
      out.dlogits(i, j) += dlogp * (onehot - p);
      // d(-c * H)/dz_j = c * p_j * (log p_j + H)
      if (k.entropy_coef != 0.0 && p > 0.0) out.dlogits(i, j) += k.entropy_coef * inv_n * p * (logp(i, j) + h);
    }

    const double err = values(i) - mb.returns(i);
    out.value += err * err;
    out.dvalues(i) = k.value_coef * 2.0 * err * inv_n;
  }
  out.policy *= inv_n;
  out.entropy *= inv_n;
  out.value *= inv_n;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  out.ppo_total = out.policy + k.value_coef * out.value - k.entropy_coef * out.entropy;
  out.total = out.ppo_total;

  if (mb.targets) {
    const auto hinge = intuition::intuition_loss_with_grad(logits, *mb.targets, k.margin);
    out.intuition = hinge.value;
    out.total = out.ppo_total + k.intuition_coef * out.intuition;
    out.dlogits += k.intuition_coef * hinge.grad;
  }
  if (!std::isfinite(out.total)) throw NumericalError("ppo_loss: non-finite loss");
  return out;
}

}  // namespace shire::ppo

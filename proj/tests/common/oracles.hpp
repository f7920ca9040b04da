#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "shire/intuition/net.hpp"
#include "shire/nn.hpp"
#include "shire/ppo/loss.hpp"

namespace shire::testing {

/// Joint posterior over the action nodes by enumerating every assignment of the action
/// nodes (odometer order, last action node fastest) and multiplying CPT entries.
inline std::vector<double> brute_force_posterior(const intuition::IntuitionNet& net, const std::vector<int>& evidence) {
  const std::size_t n_nodes = net.nodes.size();
  std::vector<int> full = evidence;
  std::vector<int> actions = net.action_nodes;
  std::vector<double> out;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == actions.size()) {
      double p = 1.0;
      for (std::size_t v = 0; v < n_nodes; ++v) {
        if (!net.nodes[v].is_action) continue;
        const auto& cpt = net.cpts[v];
        std::size_t row = 0;
        for (std::size_t j = 0; j < cpt.parents.size(); ++j) {
          const auto parent = static_cast<std::size_t>(cpt.parents[j]);
          row = row * net.nodes[parent].states.size() + static_cast<std::size_t>(full[parent]);
        }
        p *= cpt.rows.at(row).at(static_cast<std::size_t>(full[v]));
      }
      out.push_back(p);
      return;
    }
    const auto node = static_cast<std::size_t>(actions[k]);
    for (std::size_t s = 0; s < net.nodes[node].states.size(); ++s) {
      full[node] = static_cast<int>(s);
      rec(k + 1);
    }
  };
  rec(0);
  double total = 0.0;
  for (double p : out) total += p;
  for (double& p : out) p /= total;
  return out;
}

/// Every full evidence vector over the parent nodes of a net.
inline std::vector<std::vector<int>> all_evidence(const intuition::IntuitionNet& net) {
  std::vector<std::vector<int>> out;
  const auto parents = net.parent_nodes();
  std::vector<int> ev(net.size(), -1);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == parents.size()) {
      out.push_back(ev);
      return;
    }
    const auto p = static_cast<std::size_t>(parents[k]);
    for (std::size_t s = 0; s < net.nodes[p].states.size(); ++s) {
      ev[p] = static_cast<int>(s);
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  int checked = 0;
};

/// Compares an analytic gradient with central differences of `f`, over parameters whose
/// analytic or numeric gradient exceeds `floor` in magnitude.
inline GradCheck finite_difference_check(const std::function<double(const nn::ActorCriticParams&)>& f,
                                         const nn::ActorCriticParams& params, const nn::Gradients& analytic,
                                         double h = 1e-5, double floor = 1e-6) {
  GradCheck out;
  nn::ActorCriticParams p = params;
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
    const double orig = p.flat()(i);
    p.flat()(i) = orig + h;
    const double up = f(p);
    p.flat()(i) = orig - h;
    const double down = f(p);
    p.flat()(i) = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max(std::abs(numeric), std::abs(analytic(i)));
    if (scale <= floor) continue;
    out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic(i)) / scale);
    ++out.checked;
  }
  return out;
}

/// A random minibatch together with its loss closure, for gradient checks on one loss term.
struct LossProblem {
  nn::ActorCriticParams params;
  Eigen::MatrixXd obs;
  ppo::MinibatchData mb;
  intuition::IntuitionTargets targets;
  ppo::LossCoefficients coef;
  bool with_targets = false;

  ppo::MinibatchData data() const {
    ppo::MinibatchData m = mb;
    m.targets = with_targets ? &targets : nullptr;
    return m;
  }

  double loss(const nn::ActorCriticParams& p) const {
    const auto out = nn::forward(p, obs);
    return ppo::ppo_loss(out.logits, out.values, data(), coef).total;
  }

  nn::Gradients gradient() const {
    const auto cache = nn::forward_cached(params, obs);
    const auto l = ppo::ppo_loss(cache.logits, cache.values, data(), coef);
    return nn::backward(params, cache, l.dlogits, l.dvalues);
  }

  /// Smallest distance of any sample from a kink of the clipped objective or the hinge.
  double kink_distance() const {
    const auto out = nn::forward(params, obs);
    const Eigen::MatrixXd logp = nn::log_softmax(out.logits);
    double d = 1e300;
    for (Eigen::Index i = 0; i < obs.rows(); ++i) {
      const int a = mb.actions[static_cast<std::size_t>(i)];
      const double ratio = std::exp(logp(i, a) - mb.old_logprobs(i));
      d = std::min({d, std::abs(ratio - 1.0 - coef.clip_eps), std::abs(ratio - 1.0 + coef.clip_eps)});
      if (with_targets) {
        const int e = targets.actions[static_cast<std::size_t>(i)];
        double first = -1e300, second = -1e300;
        for (Eigen::Index j = 0; j < out.logits.cols(); ++j) {
          if (j == e) continue;
          const double z = out.logits(i, j);
          if (z > first) {
            second = first;
            first = z;
          } else if (z > second) {
            second = z;
          }
        }
        d = std::min({d, std::abs(coef.margin - (out.logits(i, e) - first)), first - second});
      }
    }
    return d;
  }
};

inline LossProblem draw_loss_problem(const std::string& term, Rng& rng, int n) {
  nn::NetworkShape shape{5, 4, {8, 6}};
  LossProblem lp;
  lp.params = nn::init_params(shape, rng, 1.0, 1.0, 1.0);
  lp.obs = Eigen::MatrixXd(n, shape.obs_dim);
  for (Eigen::Index i = 0; i < lp.obs.size(); ++i) lp.obs.data()[i] = standard_normal(rng);
  const auto out = nn::forward(lp.params, lp.obs);
  const Eigen::MatrixXd logp = nn::log_softmax(out.logits);
  lp.mb.old_logprobs.resize(n);
  lp.mb.advantages.resize(n);
  lp.mb.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    const int a = uniform_index(rng, shape.n_actions);
    lp.mb.actions.push_back(a);
    lp.mb.old_logprobs(i) = logp(i, a) + uniform(rng, -0.4, 0.4);
    lp.mb.advantages(i) = standard_normal(rng);
    lp.mb.returns(i) = standard_normal(rng);
    lp.targets.actions.push_back(uniform_index(rng, shape.n_actions));
    lp.targets.weights.push_back(uniform(rng, 0.5, 2.0));
  }
  lp.coef = {0.2, 0.0, 0.0, 0.0, 1.0};
  if (term == "value") {
    lp.mb.advantages.setZero();
    lp.coef.value_coef = 0.5;
  } else if (term == "entropy") {
    lp.mb.advantages.setZero();
    lp.coef.entropy_coef = 0.01;
  } else if (term == "intuition") {
    lp.mb.advantages.setZero();
    lp.coef.intuition_coef = 0.7;
    lp.with_targets = true;
  }
  return lp;
}

/// Builds a problem that exercises exactly one loss term. `term` is one of
/// "policy", "value", "entropy", "intuition". Draws from the seed's stream are repeated
/// until every sample sits more than 1e-3 from a kink.
inline LossProblem make_loss_problem(const std::string& term, std::uint64_t seed, int n = 16) {
  Rng rng(seed);
  for (;;) {
    LossProblem lp = draw_loss_problem(term, rng, n);
    if (lp.kink_distance() > 1e-3) return lp;
  }
}

/// GAE by explicit double sums over the episode segments, no recursion.
inline Eigen::VectorXd gae_reference(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                                     const std::vector<std::uint8_t>& terminated,
                                     const std::vector<std::uint8_t>& truncated,
                                     const Eigen::VectorXd& bootstrap, double last_value, double gamma,
                                     double lambda) {
  const Eigen::Index n = rewards.size();
  Eigen::VectorXd adv = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double coef = 1.0;
    for (Eigen::Index k = t; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      double next_value;
      if (terminated[kk]) {
        next_value = 0.0;
      } else if (truncated[kk]) {
        next_value = bootstrap(k);
      } else {
        next_value = k + 1 < n ? values(k + 1) : last_value;
      }
      const double delta = rewards(k) + gamma * next_value - values(k);
      adv(t) += coef * delta;
      if (terminated[kk] || truncated[kk]) break;
      coef *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace shire::testing

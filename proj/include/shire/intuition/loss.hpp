#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

#include "shire/error.hpp"

namespace shire::intuition {

/// Per-sample intuitive action e_i and mismatch weight w_i.
struct IntuitionTargets {
  std::vector<int> actions;
  std::vector<double> weights;

  std::size_t size() const { return actions.size(); }
};

struct HingeResult {
  double value = 0.0;
  Eigen::MatrixXd grad;  // dL/dlogits
};

/// Weighted multiclass hinge on policy logits:
///   L = (1/n) sum_i w_i * max(0, margin - (z_i[e_i] - max_{j != e_i} z_i[j]))
/// With two actions and s = z[1] - z[0], m = +1 for action 1 and -1 for action 0, each
/// term is exactly max(0, 1 - m s). The subgradient at the hinge point is zero.
inline HingeResult intuition_loss_with_grad(const Eigen::MatrixXd& logits, const IntuitionTargets& targets,
                                            double margin = 1.0, bool want_grad = true) {
  const Eigen::Index n = logits.rows();
  if (n < 1) throw UsageError("intuition_loss: empty batch");
  if (logits.cols() < 2) throw ConfigError("intuition_loss: need at least two actions");
  if (static_cast<Eigen::Index>(targets.actions.size()) != n || static_cast<Eigen::Index>(targets.weights.size()) != n) {
    throw ConfigError("intuition_loss: target count does not match logit rows");
  }
  HingeResult out;
  if (want_grad) out.grad = Eigen::MatrixXd::Zero(n, logits.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int e = targets.actions[static_cast<std::size_t>(i)];
    if (e < 0 || e >= logits.cols()) throw UsageError("intuition_loss: target action out of range");
    Eigen::Index rival = e == 0 ? 1 : 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (j != e && logits(i, j) > logits(i, rival)) rival = j;
    }
    const double slack = margin - (logits(i, e) - logits(i, rival));
    if (slack > 0.0) {
      const double w = targets.weights[static_cast<std::size_t>(i)];
      total += w * slack;
      if (want_grad) {
        out.grad(i, e) -= w * inv_n;
        out.grad(i, rival) += w * inv_n;
      }
    }
  }
  out.value = total * inv_n;
  return out;
}

inline double intuition_loss(const Eigen::MatrixXd& logits, const IntuitionTargets& targets, double margin = 1.0) {
  return intuition_loss_with_grad(logits, targets, margin, false).value;
}

/// m_i = +1 where the executed action matches the intuitive one, else -1.
inline std::vector<int> mismatch_vector(const std::vector<int>& actions, const IntuitionTargets& targets) {
  if (actions.size() != targets.actions.size()) throw ConfigError("mismatch_vector: length mismatch");
  std::vector<int> m(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) m[i] = actions[i] == targets.actions[i] ? 1 : -1;
  return m;
}

inline double agreement_rate(const std::vector<int>& mismatch) {
  if (mismatch.empty()) return 0.0;
  return static_cast<double>(std::count(mismatch.begin(), mismatch.end(), 1)) / static_cast<double>(mismatch.size());
}

}  // namespace shire::intuition

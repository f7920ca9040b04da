#pragma once

#include <cmath>
#include <cstdint>

#include "shire/error.hpp"
#include "shire/nn.hpp"

namespace shire::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators, same layout as the parameter vector.
struct AdamState {
  Vector m;
  Vector v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(Vector::Zero(static_cast<Eigen::Index>(n))), v(m) {}
};

/// One bias-corrected Adam update in place.
inline void adam_step(ActorCriticParams& params, const Gradients& grads, AdamState& state,
                      double lr, const AdamConfig& cfg = {}) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ConfigError("adam_step: gradient/moment shape does not match parameters");
  }
  state.step += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.flat().array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
  if (!params.all_finite()) throw NumericalError("adam_step: parameters became non-finite");
}

}  // namespace shire::nn

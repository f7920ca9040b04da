#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "shire/envs/environment.hpp"

namespace shire::envs {

/// Classic cart-pole with Euler integration. Actions: 0 = push left, 1 = push right.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kMassPole * kHalfLength;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 12.0 * 2.0 * std::numbers::pi / 360.0;

  enum Action { Left = 0, Right = 1 };

  const EnvSpec& spec() const override { return spec_; }

  /// (x, x_dot, theta, theta_dot)
  const std::array<double, 4>& state() const { return state_; }

  void set_state(const std::array<double, 4>& s) {
    state_ = s;
    mark_live();
  }

 protected:
  Observation reset_state() override {
    for (double& v : state_) v = uniform(rng(), -0.05, 0.05);
    return observe();
  }

  StepResult step_state(int action) override {
    auto [x, x_dot, theta, theta_dot] = state_;
    const double force = action == Right ? kForce : -kForce;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
    const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                             (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    x += kDt * x_dot;
    x_dot += kDt * x_acc;
    theta += kDt * theta_dot;
    theta_dot += kDt * theta_acc;
    state_ = {x, x_dot, theta, theta_dot};

    StepResult r;
    r.obs = observe();
    r.reward = 1.0;
    r.terminated = x < -kXLimit || x > kXLimit || theta < -kThetaLimit || theta > kThetaLimit;
    return r;
  }

 private:
  Observation observe() const { return Eigen::Map<const Eigen::Vector4d>(state_.data()); }

  EnvSpec spec_{"cartpole", 4, 4, 2, 500, 500.0, {"left", "right"}};
  std::array<double, 4> state_{};
};

}  // namespace shire::envs

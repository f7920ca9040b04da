#pragma once

#include <algorithm>
#include <cmath>

#include "shire/envs/environment.hpp"

namespace shire::envs {

/// Moore's mountain car. Actions: 0 = push left, 1 = no push, 2 = push right.
class MountainCar final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.5;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;

  const EnvSpec& spec() const override { return spec_; }

  double position() const { return position_; }
  double velocity() const { return velocity_; }

  // Both inputs rescaled to roughly [-1, 1]; raw velocity is two orders of magnitude smaller.
  void features(const Observation& obs, Eigen::Ref<Eigen::VectorXd> out) const override {
    out(0) = (obs(0) + 0.3) / 0.9;
    out(1) = obs(1) / kMaxSpeed;
  }
  using Environment::features;

  void set_state(double position, double velocity) {
    position_ = position;
    velocity_ = velocity;
    mark_live();
  }

 protected:
  Observation reset_state() override {
    position_ = uniform(rng(), -0.6, -0.4);
    velocity_ = 0.0;
    return observe();
  }

  StepResult step_state(int action) override {
    velocity_ += (action - 1) * kForce - kGravity * std::cos(3.0 * position_);
    velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
    position_ = std::clamp(position_ + velocity_, kMinPosition, kMaxPosition);
    if (position_ == kMinPosition && velocity_ < 0.0) velocity_ = 0.0;

    StepResult r;
    r.obs = observe();
    r.reward = -1.0;
    r.terminated = position_ >= kGoalPosition;
    return r;
  }

 private:
  Observation observe() const { return Eigen::Vector2d(position_, velocity_); }

  EnvSpec spec_{"mountaincar", 2, 2, 3, 200, -110.0, {"push_left", "no_push", "push_right"}};
  double position_ = -0.5;
  double velocity_ = 0.0;
};

}  // namespace shire::envs

#pragma once

#include <cmath>

#include "shire/envs/environment.hpp"

namespace shire::envs {

/// Planar point-mass lander with attitude. No contact solver: the episode ends on the
/// first ground contact, scored as a soft landing on the pad or a crash.
///
/// Observation: (x, y, vx, vy, theta, omega, left_contact, right_contact).
/// Actions: 0 = noop, 1 = fire left orientation engine, 2 = fire main, 3 = fire right.
/// theta is measured counter-clockwise from vertical; body-up is (-sin theta, cos theta).
class Lander final : public Environment {
 public:
  static constexpr double kGravity = 1.625;
  static constexpr double kMainAccel = 3.0;
  static constexpr double kSideAngularAccel = 0.15;
  static constexpr double kDt = 0.02;
  static constexpr double kStartHeight = 10.0;
  static constexpr double kPadHalfWidth = 0.5;
  static constexpr double kSoftSpeed = 0.5;
  static constexpr double kSoftAngle = 0.2;
  static constexpr double kMaxAbsX = 10.0;
  static constexpr double kMaxY = 15.0;
  static constexpr double kMainFuelCost = 0.3;
  static constexpr double kSideFuelCost = 0.03;
  static constexpr double kLandingBonus = 100.0;

  enum Action { Noop = 0, FireLeft = 1, FireMain = 2, FireRight = 3 };

  struct State {
    double x = 0, y = kStartHeight, vx = 0, vy = 0, theta = 0, omega = 0;
  };

  const EnvSpec& spec() const override { return spec_; }

  // Positions and speeds scaled toward unit range for the network.
  void features(const Observation& obs, Eigen::Ref<Eigen::VectorXd> out) const override {
    out = obs;
    out(0) /= kMaxAbsX;
    out(1) /= kStartHeight;
    out(2) /= 5.0;
    out(3) /= 5.0;
  }
  using Environment::features;

  const State& state() const { return state_; }

  void set_state(const State& s) {
    state_ = s;
    contact_ = false;
    mark_live();
  }

  /// Shaping potential of an observation.
  static double potential(const Observation& obs) {
    return -100.0 * std::hypot(obs(0), obs(1)) - 100.0 * std::hypot(obs(2), obs(3)) -
           100.0 * std::abs(obs(4));
  }

  /// Shaping component (potential difference) of the last step's reward.
  double last_shaping() const { return last_shaping_; }
  /// Outcome of the last terminal step: +1 soft landing, -1 crash/out of bounds, 0 otherwise.
  int last_outcome() const { return last_outcome_; }

 protected:
  Observation reset_state() override {
    state_ = State{};
    state_.vx = uniform(rng(), -1.0, 1.0);
    contact_ = false;
    last_shaping_ = 0.0;
    last_outcome_ = 0;
    return observe();
  }

  StepResult step_state(int action) override {
    const double before = potential(observe());
    double ax = 0.0;
    double ay = -kGravity;
    double alpha = 0.0;
    double fuel = 0.0;
    switch (action) {
      case FireMain:
        ax -= std::sin(state_.theta) * kMainAccel;
        ay += std::cos(state_.theta) * kMainAccel;
        fuel = kMainFuelCost;
        break;
      case FireLeft:
        alpha = kSideAngularAccel;
        fuel = kSideFuelCost;
        break;
      case FireRight:
        alpha = -kSideAngularAccel;
        fuel = kSideFuelCost;
        break;
      default:
        break;
    }
    state_.vx += ax * kDt;
    state_.vy += ay * kDt;
    state_.x += state_.vx * kDt;
    state_.y += state_.vy * kDt;
    state_.omega += alpha * kDt;
    state_.theta += state_.omega * kDt;

    StepResult r;
    last_outcome_ = 0;
    if (state_.y <= 0.0) {
      contact_ = true;
      r.terminated = true;
      const bool soft = std::abs(state_.x) <= kPadHalfWidth && std::abs(state_.vx) <= kSoftSpeed &&
                        std::abs(state_.vy) <= kSoftSpeed && std::abs(state_.theta) <= kSoftAngle;
      last_outcome_ = soft ? 1 : -1;
    } else if (std::abs(state_.x) > kMaxAbsX || state_.y > kMaxY) {
      r.terminated = true;
      last_outcome_ = -1;
    }
    r.obs = observe();
    last_shaping_ = potential(r.obs) - before;
    r.reward = last_shaping_ - fuel + kLandingBonus * last_outcome_;
    return r;
  }

 private:
  Observation observe() const {
    Observation o(8);
    const double c = contact_ ? 1.0 : 0.0;
    o << state_.x, state_.y, state_.vx, state_.vy, state_.theta, state_.omega, c, c;
    return o;
  }

  EnvSpec spec_{"lander", 8, 8, 4, 1000, std::nullopt, {"noop", "fire_left", "fire_main", "fire_right"}};
  State state_;
  bool contact_ = false;
  double last_shaping_ = 0.0;
  int last_outcome_ = 0;
};

}  // namespace shire::envs

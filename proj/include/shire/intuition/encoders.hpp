#pragma once

// Abstract-state encoders: deterministic discretisation of raw observations into the
// states of an intuition net's parent nodes.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shire/envs/taxi.hpp"
#include "shire/error.hpp"
#include "shire/intuition/net.hpp"

namespace shire::intuition {

struct ParentSchema {
  std::string name;
  std::vector<std::string> labels;
};

class StateEncoder {
 public:
  virtual ~StateEncoder() = default;

  virtual std::string_view env_name() const = 0;
  virtual const std::vector<ParentSchema>& schema() const = 0;

  /// Writes one label index per schema entry.
  virtual void encode(const Eigen::Ref<const Eigen::VectorXd>& obs, std::span<int> labels) const = 0;

  AbstractAssignment assign(const Eigen::Ref<const Eigen::VectorXd>& obs) const {
    std::vector<int> idx(schema().size());
    encode(obs, idx);
    AbstractAssignment out;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[schema()[k].name] = schema()[k].labels[static_cast<std::size_t>(idx[k])];
    }
    return out;
  }
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

/// Quadrant of an angle after wrapping: q1 [0, pi/2), q2 [pi/2, pi], q3 (-pi, -pi/2), q4 [-pi/2, 0).
/// Returns 0..3 for q1..q4.
inline int angle_quadrant(double a) {
  a = wrap_angle(a);
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (a >= 0.0) return a < half_pi ? 0 : 1;
  return a < -half_pi ? 2 : 3;
}

/// lean = right if theta > 0 else left.
class CartPoleEncoder final : public StateEncoder {
 public:
  std::string_view env_name() const override { return "cartpole"; }
  const std::vector<ParentSchema>& schema() const override { return schema_; }
  void encode(const Eigen::Ref<const Eigen::VectorXd>& obs, std::span<int> labels) const override {
    labels[0] = obs(2) > 0.0 ? 1 : 0;
  }

 private:
  std::vector<ParentSchema> schema_{{"lean", {"left", "right"}}};
};

/// Sign of the car's velocity, with a dedicated state for rest.
class MountainCarEncoder final : public StateEncoder {
 public:
  static constexpr double kRestTolerance = 1e-12;

  std::string_view env_name() const override { return "mountaincar"; }
  const std::vector<ParentSchema>& schema() const override { return schema_; }
  void encode(const Eigen::Ref<const Eigen::VectorXd>& obs, std::span<int> labels) const override {
    const double v = obs(1);
    labels[0] = std::abs(v) <= kRestTolerance ? 1 : (v > 0.0 ? 2 : 0);
  }

 private:
  std::vector<ParentSchema> schema_{{"vel_dir", {"negative", "rest", "positive"}}};
};

enum class LanderVariant { Basic, Antiparallel };

/// Direction-to-pad steering for the lander.
///
/// a: sign of the wrapped angle from the velocity direction to the direction of the pad
///    (positive = the velocity must turn counter-clockwise); "stationary" when |v| ~ 0.
/// theta: quadrant of the craft orientation.
/// vtheta (antiparallel only): quadrant of the velocity direction.
class LanderEncoder final : public StateEncoder {
 public:
  static constexpr double kStationarySpeed = 1e-12;

  explicit LanderEncoder(LanderVariant variant = LanderVariant::Basic) : variant_(variant) {
    schema_ = {{"a", {"positive", "negative", "stationary"}}, {"theta", {"q1", "q2", "q3", "q4"}}};
    if (variant_ == LanderVariant::Antiparallel) schema_.push_back({"vtheta", {"q1", "q2", "q3", "q4"}});
  }

  LanderVariant variant() const { return variant_; }

  std::string_view env_name() const override { return "lander"; }
  const std::vector<ParentSchema>& schema() const override { return schema_; }

  /// Angle of the direction from the craft to the pad at the origin.
  static double pad_direction(double x, double y) { return std::atan2(-y, -x); }

  /// Wrapped angle from the velocity direction to the pad direction.
  static double steering_error(double x, double y, double vx, double vy) {
    return wrap_angle(pad_direction(x, y) - std::atan2(vy, vx));
  }

  void encode(const Eigen::Ref<const Eigen::VectorXd>& obs, std::span<int> labels) const override {
    const double x = obs(0), y = obs(1), vx = obs(2), vy = obs(3), theta = obs(4);
    const double heading = std::atan2(vy, vx);
    if (std::hypot(vx, vy) <= kStationarySpeed) {
      labels[0] = 2;
    } else {
      labels[0] = wrap_angle(pad_direction(x, y) - heading) > 0.0 ? 0 : 1;
    }
    labels[1] = angle_quadrant(theta);
    if (variant_ == LanderVariant::Antiparallel) labels[2] = angle_quadrant(heading);
  }

 private:
  LanderVariant variant_;
  std::vector<ParentSchema> schema_;
};

/// Taxi position relative to its current target depot, and the trip phase.
class TaxiEncoder final : public StateEncoder {
 public:
  std::string_view env_name() const override { return "taxi"; }
  const std::vector<ParentSchema>& schema() const override { return schema_; }
  void encode(const Eigen::Ref<const Eigen::VectorXd>& obs, std::span<int> labels) const override {
    const double raw = obs(0);
    if (!(raw >= 0.0 && raw < envs::kTaxiStates) || raw != std::floor(raw)) {
      throw UsageError("taxi encoder: invalid state code");
    }
    const envs::TaxiState s = envs::taxi_decode(static_cast<int>(raw));
    const bool fetch = s.passenger != envs::kPassengerInTaxi;
    const auto& target = envs::kTaxiDepots[static_cast<std::size_t>(fetch ? s.passenger : s.destination)];
    labels[0] = s.row < target[0] ? 0 : (s.row == target[0] ? 1 : 2);
    labels[1] = s.col < target[1] ? 0 : (s.col == target[1] ? 1 : 2);
    labels[2] = fetch ? 0 : 1;
  }

 private:
  std::vector<ParentSchema> schema_{{"row_rel", {"above", "same", "below"}},
                                    {"col_rel", {"left", "same", "right"}},
                                    {"phase", {"fetch", "deliver"}}};
};

/// Encoder for an environment; the lander variant follows from whether the net has a
/// velocity-quadrant node.
inline std::shared_ptr<const StateEncoder> make_encoder(const IntuitionNet& net) {
  if (net.env == "cartpole") return std::make_shared<CartPoleEncoder>();
  if (net.env == "mountaincar") return std::make_shared<MountainCarEncoder>();
  if (net.env == "taxi") return std::make_shared<TaxiEncoder>();
  if (net.env == "lander") {
    return std::make_shared<LanderEncoder>(net.node_index("vtheta") >= 0 ? LanderVariant::Antiparallel
                                                                          : LanderVariant::Basic);
  }
  throw ConfigError("no abstract-state encoder for environment '" + net.env + "'");
}

}  // namespace shire::intuition

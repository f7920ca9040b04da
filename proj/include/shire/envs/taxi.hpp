#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "shire/envs/environment.hpp"

namespace shire::envs {

struct TaxiState {
  int row = 0;
  int col = 0;
  int passenger = 0;    // 0..3 = waiting at that depot, 4 = in the taxi
  int destination = 0;  // 0..3

  friend bool operator==(const TaxiState&, const TaxiState&) = default;
};

inline constexpr int kTaxiStates = 500;
inline constexpr int kPassengerInTaxi = 4;

inline int taxi_encode(int row, int col, int passenger, int destination) {
  if (row < 0 || row > 4 || col < 0 || col > 4 || passenger < 0 || passenger > 4 ||
      destination < 0 || destination > 3) {
    throw UsageError("taxi_encode: component out of range");
  }
  return ((row * 5 + col) * 5 + passenger) * 4 + destination;
}

inline int taxi_encode(const TaxiState& s) { return taxi_encode(s.row, s.col, s.passenger, s.destination); }

inline TaxiState taxi_decode(int code) {
  if (code < 0 || code >= kTaxiStates) throw UsageError("taxi_decode: code " + std::to_string(code) + " out of range");
  TaxiState s;
  s.destination = code % 4;
  code /= 4;
  s.passenger = code % 5;
  code /= 5;
  s.col = code % 5;
  s.row = code / 5;
  return s;
}

/// Depot cells R, G, Y, B as (row, col).
inline constexpr std::array<std::array<int, 2>, 4> kTaxiDepots{{{0, 0}, {0, 4}, {4, 0}, {4, 3}}};

/// The 5x5 taxi grid on the standard map:
///
///   +---------+
///   |R: | : :G|
///   | : | : : |
///   | : : : : |
///   | | : | : |
///   |Y| : |B: |
///   +---------+
///
/// Actions: 0 south, 1 north, 2 east, 3 west, 4 pickup, 5 dropoff.
/// The observation is the single encoded state integer (as a 1-vector).
class Taxi final : public Environment {
 public:
  enum Action { South = 0, North = 1, East = 2, West = 3, Pickup = 4, Dropoff = 5 };

  static constexpr int kFeatureDim = kTaxiStates;

  const EnvSpec& spec() const override { return spec_; }

  /// True when a wall blocks moving east out of (row, col).
  static bool wall_east(int row, int col) {
    return ((row == 0 || row == 1) && col == 1) || ((row == 3 || row == 4) && (col == 0 || col == 2));
  }

  static int depot_at(int row, int col) {
    for (int d = 0; d < 4; ++d) {
      if (kTaxiDepots[d][0] == row && kTaxiDepots[d][1] == col) return d;
    }
    return -1;
  }

  // One-hot over the encoded state.
  void features(const Observation& obs, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.setZero();
    out(static_cast<int>(obs(0))) = 1.0;
  }
  using Environment::features;

  const TaxiState& state() const { return state_; }

  void set_state(const TaxiState& s) {
    taxi_encode(s);
    state_ = s;
    mark_live();
  }

 protected:
  Observation reset_state() override {
    state_.row = uniform_index(rng(), 5);
    state_.col = uniform_index(rng(), 5);
    state_.passenger = uniform_index(rng(), 4);
    const int other = uniform_index(rng(), 3);
    state_.destination = other >= state_.passenger ? other + 1 : other;
    return observe();
  }

  StepResult step_state(int action) override {
    StepResult r;
    r.reward = -1.0;
    TaxiState& s = state_;
    switch (action) {
      case South:
        s.row = std::min(s.row + 1, 4);
        break;
      case North:
        s.row = std::max(s.row - 1, 0);
        break;
      case East:
        if (s.col < 4 && !wall_east(s.row, s.col)) ++s.col;
        break;
      case West:
        if (s.col > 0 && !wall_east(s.row, s.col - 1)) --s.col;
        break;
      case Pickup:
        if (s.passenger < 4 && depot_at(s.row, s.col) == s.passenger) {
          s.passenger = kPassengerInTaxi;
        } else {
          r.reward = -10.0;
        }
        break;
      case Dropoff: {
        const int depot = depot_at(s.row, s.col);
        if (s.passenger == kPassengerInTaxi && depot == s.destination) {
          s.passenger = s.destination;
          r.reward = 20.0;
          r.terminated = true;
        } else if (s.passenger == kPassengerInTaxi && depot >= 0) {
          s.passenger = depot;
        } else {
          r.reward = -10.0;
        }
        break;
      }
      default:
        break;
    }
    r.obs = observe();
    return r;
  }

 private:
  Observation observe() const {
    Observation o(1);
    o(0) = taxi_encode(state_);
    return o;
  }

  EnvSpec spec_{"taxi", 1, kFeatureDim, 6, 200, std::nullopt,
                {"south", "north", "east", "west", "pickup", "dropoff"}};
  TaxiState state_;
};

}  // namespace shire::envs

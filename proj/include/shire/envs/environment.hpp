#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shire/error.hpp"
#include "shire/random.hpp"

namespace shire::envs {

using Observation = Eigen::VectorXd;

struct EnvSpec {
  std::string name;
  int obs_dim = 0;      // raw observation width (what encoders see)
  int feature_dim = 0;  // network input width after featurisation
  int n_actions = 0;
  int max_episode_steps = 0;
  std::optional<double> ssr;  // absent for environments judged by best-baseline reward
  std::vector<std::string> action_names;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

/// Single-owner simulator with its own seeded random stream.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  /// Reseed the stream, then start a new episode.
  Observation reset(std::uint64_t seed) {
    rng_.seed(seed);
    return reset();
  }

  /// Start a new episode, continuing the current random stream.
  Observation reset() {
    steps_ = 0;
    done_ = false;
    return reset_state();
  }

  StepResult step(int action) {
    if (done_) throw UsageError(spec().name + ": step() called on a finished episode; reset first");
    if (action < 0 || action >= spec().n_actions) {
      throw UsageError(spec().name + ": action " + std::to_string(action) + " out of range");
    }
    StepResult r = step_state(action);
    ++steps_;
    if (!r.terminated && steps_ >= spec().max_episode_steps) r.truncated = true;
    done_ = r.done();
    return r;
  }

  /// Network input for a raw observation. Identity unless overridden.
  virtual void features(const Observation& obs, Eigen::Ref<Eigen::VectorXd> out) const {
    out = obs;
  }

  Eigen::VectorXd features(const Observation& obs) const {
    Eigen::VectorXd out(spec().feature_dim);
    features(obs, out);
    return out;
  }

  int elapsed_steps() const { return steps_; }
  bool episode_done() const { return done_; }

 protected:
  virtual Observation reset_state() = 0;
  virtual StepResult step_state(int action) = 0;

  Rng& rng() { return rng_; }

  // Lets subclasses place the simulator in an arbitrary live state (tests, mirroring).
  void mark_live() {
    steps_ = 0;
    done_ = false;
  }

 private:
  Rng rng_{0};
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace shire::envs

#pragma once

// Dense actor-critic network with hand-written reverse-mode gradients.
//
// All parameters live in one contiguous vector. Each layer's weight matrix is stored
// row-major (out x in) followed by its bias, actor layers first, then critic layers.
// That flat layout is shared by gradients, Adam moments, and the checkpoint format.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shire/error.hpp"
#include "shire/random.hpp"

namespace shire::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMap = Eigen::Map<RowMajorMatrix>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;

struct NetworkShape {
  int obs_dim = 0;
  int n_actions = 0;
  std::vector<int> hidden{64, 64};

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct LayerSlice {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

enum class Head { Actor, Critic };

struct ParameterLayout {
  std::vector<LayerSlice> actor;
  std::vector<LayerSlice> critic;
  std::size_t size = 0;
};

inline ParameterLayout make_layout(const NetworkShape& shape) {
  if (shape.obs_dim < 1 || shape.n_actions < 1 || shape.hidden.empty()) {
    throw ConfigError("network shape needs obs_dim >= 1, n_actions >= 1 and a hidden layer");
  }
  for (int h : shape.hidden) {
    if (h < 1) throw ConfigError("hidden layer width must be positive");
  }
  ParameterLayout layout;
  auto build = [&](std::vector<LayerSlice>& layers, int out_dim) {
    int in = shape.obs_dim;
    std::vector<int> widths = shape.hidden;
    widths.push_back(out_dim);
    for (int out : widths) {
      LayerSlice slice{in, out, layout.size, layout.size + static_cast<std::size_t>(in) * out};
      layout.size = slice.bias_offset + out;
      layers.push_back(slice);
      in = out;
    }
  };
  build(layout.actor, shape.n_actions);
  build(layout.critic, 1);
  return layout;
}

/// Trainable policy + value network. Two separate tanh trunks, no weight sharing.
class ActorCriticParams {
 public:
  ActorCriticParams() = default;
  explicit ActorCriticParams(NetworkShape shape)
      : shape_(std::move(shape)), layout_(make_layout(shape_)), flat_(Vector::Zero(layout_.size)) {}

  const NetworkShape& shape() const { return shape_; }
  const ParameterLayout& layout() const { return layout_; }
  int obs_dim() const { return shape_.obs_dim; }
  int n_actions() const { return shape_.n_actions; }
  std::size_t size() const { return layout_.size; }

  Vector& flat() { return flat_; }
  const Vector& flat() const { return flat_; }

  const std::vector<LayerSlice>& layers(Head head) const {
    return head == Head::Actor ? layout_.actor : layout_.critic;
  }

  WeightMap weight(const LayerSlice& s) { return {flat_.data() + s.weight_offset, s.out, s.in}; }
  ConstWeightMap weight(const LayerSlice& s) const {
    return {flat_.data() + s.weight_offset, s.out, s.in};
  }
  Eigen::Map<Vector> bias(const LayerSlice& s) { return {flat_.data() + s.bias_offset, s.out}; }
  Eigen::Map<const Vector> bias(const LayerSlice& s) const {
    return {flat_.data() + s.bias_offset, s.out};
  }

  bool all_finite() const { return flat_.allFinite(); }

 private:
  NetworkShape shape_;
  ParameterLayout layout_;
  Vector flat_;
};

/// Partial derivatives, shape-congruent with ActorCriticParams::flat().
using Gradients = Vector;

// Orthogonal matrix scaled by gain, as in the usual PPO initialisation.
inline void orthogonal_fill(WeightMap w, double gain, Rng& rng) {
  const int rows = static_cast<int>(w.rows());
  const int cols = static_cast<int>(w.cols());
  const bool transpose = rows < cols;
  const int m = transpose ? cols : rows;
  const int n = transpose ? rows : cols;
  Matrix gaussian(m, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) gaussian(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(m, n);
  Matrix r = qr.matrixQR().topLeftCorner(n, n);
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  if (transpose) {
    w = gain * q.transpose();
  } else {
    w = gain * q;
  }
}

inline ActorCriticParams init_params(const NetworkShape& shape, Rng& rng,
                                     double hidden_gain = std::sqrt(2.0), double actor_gain = 0.01,
                                     double critic_gain = 1.0) {
  ActorCriticParams params(shape);
  for (Head head : {Head::Actor, Head::Critic}) {
    const auto& layers = params.layers(head);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const bool last = k + 1 == layers.size();
      const double gain = !last ? hidden_gain : (head == Head::Actor ? actor_gain : critic_gain);
      orthogonal_fill(params.weight(layers[k]), gain, rng);
      params.bias(layers[k]).setZero();
    }
  }
  return params;
}

/// Activations kept for the backward pass. Rows are samples.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> actor_hidden;
  std::vector<Matrix> critic_hidden;
  Matrix logits;
  Vector values;
};

struct PolicyOutput {
  Matrix logits;
  Vector values;
};

namespace detail {

inline Matrix dense(const Matrix& x, const ActorCriticParams& p, const LayerSlice& s) {
  Matrix z = x * p.weight(s).transpose();
  z.rowwise() += p.bias(s).transpose();
  return z;
}

inline Matrix trunk(const ActorCriticParams& p, Head head, const Matrix& obs,
                    std::vector<Matrix>* hidden) {
  const auto& layers = p.layers(head);
  Matrix a = obs;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    a = dense(a, p, layers[k]).array().tanh().matrix();
    if (hidden) hidden->push_back(a);
  }
  return dense(a, p, layers.back());
}

inline void check_input(const ActorCriticParams& p, const Matrix& obs) {
  if (obs.rows() < 1) throw ConfigError("forward: empty observation batch");
  if (obs.cols() != p.obs_dim()) {
    throw ConfigError("forward: observation width " + std::to_string(obs.cols()) +
                      " does not match network obs_dim " + std::to_string(p.obs_dim()));
  }
}

}  // namespace detail

inline ForwardCache forward_cached(const ActorCriticParams& params, const Matrix& obs) {
  detail::check_input(params, obs);
  ForwardCache cache;
  cache.input = obs;
  cache.logits = detail::trunk(params, Head::Actor, obs, &cache.actor_hidden);
  cache.values = detail::trunk(params, Head::Critic, obs, &cache.critic_hidden).col(0);
  return cache;
}

inline PolicyOutput forward(const ActorCriticParams& params, const Matrix& obs) {
  detail::check_input(params, obs);
  return {detail::trunk(params, Head::Actor, obs, nullptr),
          detail::trunk(params, Head::Critic, obs, nullptr).col(0)};
}

/// Actor head only; used by evaluation where values are not needed.
inline Matrix policy_logits(const ActorCriticParams& params, const Matrix& obs) {
  detail::check_input(params, obs);
  return detail::trunk(params, Head::Actor, obs, nullptr);
}

inline Vector critic_values(const ActorCriticParams& params, const Matrix& obs) {
  detail::check_input(params, obs);
  return detail::trunk(params, Head::Critic, obs, nullptr).col(0);
}

/// Row-wise log-softmax, max-shifted.
inline Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

inline Matrix softmax(const Matrix& logits) { return log_softmax(logits).array().exp().matrix(); }

struct LogprobEntropy {
  Vector logprobs;
  Vector entropies;
};

inline LogprobEntropy logprob_entropy(const Matrix& logits, const std::vector<int>& actions) {
  if (static_cast<Eigen::Index>(actions.size()) != logits.rows()) {
    throw ConfigError("logprob_entropy: action count does not match logit rows");
  }
  const Matrix logp = log_softmax(logits);
  LogprobEntropy out{Vector(logits.rows()), Vector(logits.rows())};
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= logits.cols()) throw UsageError("logprob_entropy: action index out of range");
    out.logprobs(i) = logp(i, a);
    double h = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const double p = std::exp(logp(i, j));
      if (p > 0.0) h -= p * logp(i, j);
    }
    out.entropies(i) = h;
  }
  return out;
}

struct SampledAction {
  int action = 0;
  double logprob = 0.0;
};

/// Draws from softmax(logits) by inverse CDF on one uniform draw.
inline SampledAction sample_action(const Eigen::Ref<const Vector>& logits, Rng& rng) {
  if (logits.hasNaN()) throw NumericalError("sample_action: NaN logits");
  if (!logits.allFinite()) throw NumericalError("sample_action: non-finite logits");
  const double m = logits.maxCoeff();
  const Vector shifted = (logits.array() - m).matrix();
  const double lse = std::log(shifted.array().exp().sum());
  const double u = uniform01(rng);
  double cumulative = 0.0;
  int chosen = static_cast<int>(logits.size()) - 1;
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    cumulative += std::exp(shifted(k) - lse);
    if (u < cumulative) {
      chosen = static_cast<int>(k);
      break;
    }
  }
  return {chosen, shifted(chosen) - lse};
}

inline int greedy_action(const Eigen::Ref<const Vector>& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

namespace detail {

inline void backward_trunk(const ActorCriticParams& p, Head head, const Matrix& input,
                           const std::vector<Matrix>& hidden, Matrix delta, Gradients& grads) {
  const auto& layers = p.layers(head);
  for (std::size_t k = layers.size(); k-- > 0;) {
    const LayerSlice& s = layers[k];
    const Matrix& below = k == 0 ? input : hidden[k - 1];
    Eigen::Map<RowMajorMatrix>(grads.data() + s.weight_offset, s.out, s.in) +=
        delta.transpose() * below;
    Eigen::Map<Vector>(grads.data() + s.bias_offset, s.out) += delta.colwise().sum().transpose();
    if (k == 0) break;
    Matrix upstream = delta * p.weight(s);
    delta = upstream.array() * (1.0 - below.array().square());
  }
}

}  // namespace detail

/// Reverse-mode pass: given dL/dlogits (n x A) and dL/dvalues (n) for the activations in
/// `cache`, returns dL/dparams.
inline Gradients backward(const ActorCriticParams& params, const ForwardCache& cache,
                          const Matrix& dlogits, const Vector& dvalues) {
  if (dlogits.rows() != cache.logits.rows() || dlogits.cols() != cache.logits.cols() ||
      dvalues.size() != cache.values.size()) {
    throw ConfigError("backward: upstream gradient shape does not match forward cache");
  }
  if (!dlogits.allFinite() || !dvalues.allFinite()) {
    throw NumericalError("backward: non-finite upstream gradient");
  }
  Gradients grads = Gradients::Zero(static_cast<Eigen::Index>(params.size()));
  detail::backward_trunk(params, Head::Actor, cache.input, cache.actor_hidden, dlogits, grads);
  detail::backward_trunk(params, Head::Critic, cache.input, cache.critic_hidden,
                         Matrix(dvalues), grads);
  if (!grads.allFinite()) throw NumericalError("backward: non-finite gradient");
  return grads;
}

inline double global_norm(const Gradients& g) { return g.norm(); }

/// Scales g in place so its L2 norm is at most max_norm. Returns the pre-clip norm.
inline double clip_global_norm(Gradients& g, double max_norm) {
  const double norm = g.norm();
  if (norm > max_norm) g *= max_norm / (norm + 1e-12);
  return norm;
}

}  // namespace shire::nn

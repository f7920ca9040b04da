#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "shire/error.hpp"
#include "shire/intuition/encoders.hpp"
#include "shire/intuition/inference.hpp"
#include "shire/intuition/loss.hpp"
#include "shire/intuition/net.hpp"
#include "shire/random.hpp"

namespace shire::intuition {

/// An intuition net bound to the encoder of its environment: the full observation ->
/// intuitive-action pipeline. Immutable once built.
class IntuitionPipeline {
 public:
  IntuitionPipeline(IntuitionNet net, std::shared_ptr<const StateEncoder> encoder)
      : net_(std::move(net)), encoder_(std::move(encoder)) {
    if (!encoder_) throw ConfigError("intuition pipeline: null encoder");
    if (encoder_->env_name() != net_.env) {
      throw ConfigError("intuition net '" + net_.name + "' is for '" + net_.env + "' but the encoder is for '" +
                        std::string(encoder_->env_name()) + "'");
    }
    const auto parents = net_.parent_nodes();
    const auto& schema = encoder_->schema();
    if (parents.size() != schema.size()) {
      throw ConfigError("intuition net '" + net_.name + "' has " + std::to_string(parents.size()) +
                        " parent nodes; the encoder produces " + std::to_string(schema.size()));
    }
    for (const auto& entry : schema) {
      const int node = net_.node_index(entry.name);
      if (node < 0 || net_.nodes[static_cast<std::size_t>(node)].is_action) {
        throw ConfigError("intuition net '" + net_.name + "' lacks parent node '" + entry.name + "'");
      }
      const auto& states = net_.nodes[static_cast<std::size_t>(node)].states;
      if (states.size() != entry.labels.size()) {
        throw ConfigError("node '" + entry.name + "' must have exactly the states the encoder produces");
      }
      std::vector<int> label_to_state;
      for (const auto& label : entry.labels) {
        const int s = net_.nodes[static_cast<std::size_t>(node)].state_index(label);
        if (s < 0) throw ConfigError("node '" + entry.name + "' lacks encoder state '" + label + "'");
        label_to_state.push_back(s);
      }
      slot_node_.push_back(node);
      slot_states_.push_back(std::move(label_to_state));
    }
  }

  explicit IntuitionPipeline(IntuitionNet net) : IntuitionPipeline(net, make_encoder(net)) {}

  const IntuitionNet& net() const { return net_; }
  const StateEncoder& encoder() const { return *encoder_; }

  /// Evidence vector for one raw observation.
  void evidence(const Eigen::Ref<const Eigen::VectorXd>& obs, std::vector<int>& labels, std::vector<int>& out) const {
    labels.resize(slot_node_.size());
    encoder_->encode(obs, labels);
    out.assign(net_.size(), -1);
    for (std::size_t k = 0; k < slot_node_.size(); ++k) {
      out[static_cast<std::size_t>(slot_node_[k])] = slot_states_[k][static_cast<std::size_t>(labels[k])];
    }
  }

  std::vector<double> posterior(const Eigen::Ref<const Eigen::VectorXd>& obs) const {
    std::vector<int> labels, ev;
    evidence(obs, labels, ev);
    return infer_action_posterior(net_, ev);
  }

  /// Intuitive actions and weights for a batch of raw observations (rows are samples).
  IntuitionTargets compute_targets(const Eigen::MatrixXd& obs_batch, TargetMode mode, Rng& rng) const {
    IntuitionTargets out;
    const auto n = static_cast<std::size_t>(obs_batch.rows());
    out.actions.resize(n);
    out.weights.resize(n);
    std::vector<int> labels, ev, scratch(net_.size());
    std::vector<double> post(net_.config_count());
    Eigen::VectorXd row(obs_batch.cols());
    for (std::size_t i = 0; i < n; ++i) {
      row = obs_batch.row(static_cast<Eigen::Index>(i)).transpose();
      evidence(row, labels, ev);
      infer_posterior_into(net_, ev, scratch, post);
      const IntuitiveChoice choice = choose_intuitive(net_, post, mode, rng);
      out.actions[i] = choice.action;
      out.weights[i] = net_.config_weight(choice.config);
    }
    return out;
  }

 private:
  IntuitionNet net_;
  std::shared_ptr<const StateEncoder> encoder_;
  std::vector<int> slot_node_;
  std::vector<std::vector<int>> slot_states_;
};

inline IntuitionTargets compute_targets(const IntuitionNet& net, std::shared_ptr<const StateEncoder> encoder,
                                        const Eigen::MatrixXd& obs_batch, TargetMode mode, Rng& rng) {
  return IntuitionPipeline(net, std::move(encoder)).compute_targets(obs_batch, mode, rng);
}

}  // namespace shire::intuition

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shire/error.hpp"
#include "shire/intuition/net.hpp"
#include "shire/random.hpp"

namespace shire::intuition {

enum class TargetMode { Map, Sample };

inline const char* to_string(TargetMode m) { return m == TargetMode::Map ? "map" : "sample"; }

inline TargetMode parse_target_mode(const std::string& s) {
  if (s == "map") return TargetMode::Map;
  if (s == "sample") return TargetMode::Sample;
  throw ConfigError("unknown target mode '" + s + "' (valid: map, sample)");
}

/// Evidence vector: one state index per node, -1 for action nodes.
inline std::vector<int> evidence_from(const IntuitionNet& net, const AbstractAssignment& assignment) {
  std::vector<int> evidence(net.size(), -1);
  for (const auto& [name, label] : assignment) {
    const int idx = net.node_index(name);
    if (idx < 0) throw UsageError("assignment names unknown node '" + name + "'");
    const auto& node = net.nodes[static_cast<std::size_t>(idx)];
    if (node.is_action) throw UsageError("assignment sets action node '" + name + "'");
    const int s = node.state_index(label);
    if (s < 0) throw UsageError("node '" + name + "' has no state '" + label + "'");
    evidence[static_cast<std::size_t>(idx)] = s;
  }
  for (int p : net.parent_nodes()) {
    if (evidence[static_cast<std::size_t>(p)] < 0) {
      throw UsageError("assignment is missing parent node '" + net.nodes[static_cast<std::size_t>(p)].name + "'");
    }
  }
  return evidence;
}

/// Joint posterior over child configurations given fully observed parent nodes.
/// `scratch` must hold net.size() ints and is overwritten. Writes config_count() values.
inline void infer_posterior_into(const IntuitionNet& net, std::span<const int> evidence, std::span<int> scratch,
                                 std::span<double> out) {
  std::copy(evidence.begin(), evidence.end(), scratch.begin());
  const std::size_t configs = net.config_count();
  double total = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    std::size_t rest = c;
    for (std::size_t k = net.action_nodes.size(); k-- > 0;) {
      const auto a = static_cast<std::size_t>(net.action_nodes[k]);
      const auto radix = net.nodes[a].states.size();
      scratch[a] = static_cast<int>(rest % radix);
      rest /= radix;
    }
    double p = 1.0;
    for (int a : net.action_nodes) {
      const Cpt& cpt = net.cpts[static_cast<std::size_t>(a)];
      const std::size_t row = cpt.row_index([&](int parent) { return scratch[static_cast<std::size_t>(parent)]; });
      p *= cpt.rows[row][static_cast<std::size_t>(scratch[static_cast<std::size_t>(a)])];
    }
    out[c] = p;
    total += p;
  }
  for (std::size_t c = 0; c < configs; ++c) out[c] /= total;
}

inline std::vector<double> infer_action_posterior(const IntuitionNet& net, const std::vector<int>& evidence) {
  if (evidence.size() != net.size()) throw UsageError("evidence vector does not match net size");
  for (int p : net.parent_nodes()) {
    const int s = evidence[static_cast<std::size_t>(p)];
    if (s < 0 || s >= static_cast<int>(net.nodes[static_cast<std::size_t>(p)].states.size())) {
      throw UsageError("evidence is missing parent node '" + net.nodes[static_cast<std::size_t>(p)].name + "'");
    }
  }
  std::vector<int> scratch(net.size());
  std::vector<double> out(net.config_count());
  infer_posterior_into(net, evidence, scratch, out);
  return out;
}

inline std::vector<double> infer_action_posterior(const IntuitionNet& net, const AbstractAssignment& assignment) {
  return infer_action_posterior(net, evidence_from(net, assignment));
}

/// MAP configuration, ties to the lowest configuration index.
inline std::size_t map_config(std::span<const double> posterior) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < posterior.size(); ++c) {
    if (posterior[c] > posterior[best]) best = c;
  }
  return best;
}

inline std::size_t sample_config(std::span<const double> posterior, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t c = 0; c < posterior.size(); ++c) {
    cumulative += posterior[c];
    if (u < cumulative) return c;
  }
  return posterior.size() - 1;
}

/// Marginal posterior P(node = state) from the joint over configurations.
inline double config_marginal(const IntuitionNet& net, std::span<const double> posterior, int node, int state) {
  std::size_t k = 0;
  while (net.action_nodes[k] != node) ++k;
  std::size_t inner = 1;
  for (std::size_t j = k + 1; j < net.action_nodes.size(); ++j) {
    inner *= net.nodes[static_cast<std::size_t>(net.action_nodes[j])].states.size();
  }
  const auto radix = net.nodes[static_cast<std::size_t>(node)].states.size();
  double m = 0.0;
  for (std::size_t c = 0; c < posterior.size(); ++c) {
    if ((c / inner) % radix == static_cast<std::size_t>(state)) m += posterior[c];
  }
  return m;
}

/// Environment action for a configuration, resolving marginal-based rules.
inline int config_action(const IntuitionNet& net, std::size_t config, std::span<const double> posterior) {
  const ActionRule& rule = net.action_map[config];
  if (rule.candidates.empty()) return rule.action;
  const ActionCandidate* best = &rule.candidates.front();
  double best_marginal = config_marginal(net, posterior, best->node, best->state);
  for (std::size_t i = 1; i < rule.candidates.size(); ++i) {
    const double m = config_marginal(net, posterior, rule.candidates[i].node, rule.candidates[i].state);
    if (m > best_marginal) {
      best_marginal = m;
      best = &rule.candidates[i];
    }
  }
  return best->action;
}

struct IntuitiveChoice {
  std::size_t config = 0;
  int action = 0;
};

inline IntuitiveChoice choose_intuitive(const IntuitionNet& net, std::span<const double> posterior, TargetMode mode,
                                        Rng& rng) {
  const std::size_t config = mode == TargetMode::Map ? map_config(posterior) : sample_config(posterior, rng);
  return {config, config_action(net, config, posterior)};
}

/// Environment action index chosen from a posterior.
inline int intuitive_action(const IntuitionNet& net, std::span<const double> posterior, TargetMode mode, Rng& rng) {
  return choose_intuitive(net, posterior, mode, rng).action;
}

}  // namespace shire::intuition

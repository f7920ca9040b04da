#pragma once

// Intuition nets: small discrete Bayesian networks whose child ("action") nodes
// describe the intuitive action for an abstract state given by the remaining nodes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "shire/error.hpp"

namespace shire::intuition {

struct IntuitionNode {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  bool is_action = false;

  /// Index of a state label, or -1.
  int state_index(const std::string& label) const {
    auto it = std::find(states.begin(), states.end(), label);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
  }
};

/// Conditional table for one node. Rows are indexed by the joint parent assignment in
/// mixed radix, first declared parent most significant. An empty row means "not given".
struct Cpt {
  std::vector<int> parents;
  std::vector<int> radix;
  std::vector<std::vector<double>> rows;

  std::size_t row_count() const {
    std::size_t n = 1;
    for (int r : radix) n *= static_cast<std::size_t>(r);
    return n;
  }

  template <typename StateOf>
  std::size_t row_index(StateOf&& state_of) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      idx = idx * static_cast<std::size_t>(radix[k]) + static_cast<std::size_t>(state_of(parents[k]));
    }
    return idx;
  }
};

/// One candidate in a marginal-resolved mapping: pick `action` if node=state has the
/// highest marginal posterior among the candidates.
struct ActionCandidate {
  int node = -1;
  int state = -1;
  int action = -1;
};

/// Environment action for one child configuration: either fixed or resolved by marginals.
struct ActionRule {
  int action = -1;
  std::vector<ActionCandidate> candidates;

  bool defined() const { return action >= 0 || !candidates.empty(); }
};

inline constexpr double kRowSumTolerance = 1e-9;

class IntuitionNet {
 public:
  std::string name;
  std::string env;
  std::vector<IntuitionNode> nodes;
  std::vector<Cpt> cpts;                      // one per node
  std::vector<int> action_nodes;              // declaration order
  std::vector<std::vector<double>> weights;   // per node, per state; default 1
  std::vector<std::string> env_actions;       // action names of `env`
  std::vector<ActionRule> action_map;         // one per child configuration

  int node_index(const std::string& node_name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].name == node_name) return static_cast<int>(i);
    }
    return -1;
  }

  const IntuitionNode& node(const std::string& node_name) const {
    const int idx = node_index(node_name);
    if (idx < 0) throw UsageError("intuition net '" + name + "' has no node '" + node_name + "'");
    return nodes[static_cast<std::size_t>(idx)];
  }

  std::size_t size() const { return nodes.size(); }

  /// Nodes that are not action nodes: the abstract-state inputs.
  std::vector<int> parent_nodes() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].is_action) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  std::size_t config_count() const {
    std::size_t n = 1;
    for (int a : action_nodes) n *= nodes[static_cast<std::size_t>(a)].states.size();
    return n;
  }

  /// State of the k-th action node in configuration `config` (first action node most significant).
  std::vector<int> config_states(std::size_t config) const {
    std::vector<int> out(action_nodes.size());
    for (std::size_t k = action_nodes.size(); k-- > 0;) {
      const auto radix = nodes[static_cast<std::size_t>(action_nodes[k])].states.size();
      out[k] = static_cast<int>(config % radix);
      config /= radix;
    }
    return out;
  }

  std::string config_label(std::size_t config) const {
    const auto states = config_states(config);
    std::string out = "(";
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto& n = nodes[static_cast<std::size_t>(action_nodes[k])];
      out += (k ? ", " : "") + n.name + "=" + n.states[static_cast<std::size_t>(states[k])];
    }
    return out + ")";
  }

  /// Product of the per-(node, state) weights over a configuration.
  double config_weight(std::size_t config) const {
    const auto states = config_states(config);
    double w = 1.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
      w *= weights[static_cast<std::size_t>(action_nodes[k])][static_cast<std::size_t>(states[k])];
    }
    return w;
  }

  /// Checks every structural invariant; throws ParseError (line 0) on violation.
  void validate() const;

  /// Throws ParseError if the parent relation has a cycle. Parents must resolve.
  void check_acyclic() const;
};

inline void IntuitionNet::check_acyclic() const {
  std::vector<int> mark(nodes.size(), 0);
  std::function<void(int)> visit = [&](int v) {
    mark[static_cast<std::size_t>(v)] = 1;
    for (const auto& p : nodes[static_cast<std::size_t>(v)].parents) {
      const int u = node_index(p);
      if (mark[static_cast<std::size_t>(u)] == 1) throw ParseError("cycle detected through node '" + p + "'", 0, 0);
      if (mark[static_cast<std::size_t>(u)] == 0) visit(u);
    }
    mark[static_cast<std::size_t>(v)] = 2;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (mark[i] == 0) visit(static_cast<int>(i));
  }
}

inline void IntuitionNet::validate() const {
  auto fail = [](const std::string& msg) { throw ParseError(msg, 0, 0); };
  if (nodes.empty()) fail("intuition net has no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.states.size() < 2) fail("node '" + n.name + "' needs at least two states");
    for (std::size_t j = 0; j < n.states.size(); ++j) {
      if (std::count(n.states.begin(), n.states.end(), n.states[j]) != 1) {
        fail("node '" + n.name + "' repeats state '" + n.states[j] + "'");
      }
    }
    if (n.is_action && n.parents.empty()) fail("action node '" + n.name + "' has no parents");
    for (const auto& p : n.parents) {
      if (p == n.name) fail("cycle: node '" + n.name + "' lists itself as a parent");
      if (node_index(p) < 0) fail("node '" + n.name + "' has unknown parent '" + p + "'");
    }
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[j].name == n.name) fail("duplicate node '" + n.name + "'");
    }
  }

  check_acyclic();

  if (action_nodes.empty()) fail("intuition net has no action nodes");
  if (cpts.size() != nodes.size() || weights.size() != nodes.size()) fail("CPT/weight tables not sized to nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const auto& cpt = cpts[i];
    if (cpt.rows.size() != cpt.row_count()) fail("CPT of '" + n.name + "' has wrong row count");
    for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
      const auto& row = cpt.rows[r];
      if (row.empty()) {
        if (!n.parents.empty()) fail("missing CPT row " + std::to_string(r) + " for node '" + n.name + "'");
        continue;
      }
      if (row.size() != n.states.size()) fail("CPT row of '" + n.name + "' has wrong length");
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) fail("CPT entry of '" + n.name + "' outside [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) fail("CPT row of '" + n.name + "' does not sum to 1");
    }
    for (double w : weights[i]) {
      if (!(w > 0.0) || !std::isfinite(w)) fail("weights must be positive and finite");
    }
  }
  if (action_map.size() != config_count()) fail("action mapping is not total over child configurations");
  for (std::size_t c = 0; c < action_map.size(); ++c) {
    if (!action_map[c].defined()) fail("no action mapped for configuration " + config_label(c));
  }
}

/// Named parent assignment, e.g. {"lean": "right"}.
using AbstractAssignment = std::map<std::string, std::string>;

}  // namespace shire::intuition

#pragma once

// Reader for the intuition-net text format. See docs/net-format.md for the grammar.
//
//   net "cartpole" env "cartpole"
//   node lean { states: [left, right] }
//   action node push { states: [left, right], parents: [lean] }
//   cpt push | lean=left -> [0.9, 0.1]
//   cpt push | lean=right -> [0.1, 0.9]
//   weight push=right -> 1.0
//   map (push=left) -> left

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/intuition/net.hpp"

namespace shire::intuition {

namespace detail {

enum class Tok { Ident, String, Number, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
  int column = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t{Tok::End, "", line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                 (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '>')) {
        t.kind = Tok::Number;
        t.text += advance();
        while (pos_ < src_.size()) {
          const char d = src_[pos_];
          const bool exp_sign = (d == '-' || d == '+') && !t.text.empty() && (t.text.back() == 'e' || t.text.back() == 'E');
          if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' || d == 'E' || exp_sign) {
            t.text += advance();
          } else {
            break;
          }
        }
      } else if (c == '"') {
        t.kind = Tok::String;
        advance();
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') t.text += advance();
        if (pos_ >= src_.size() || src_[pos_] != '"') throw ParseError("unterminated string", t.line, t.column);
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        t.kind = Tok::Symbol;
        t.text = "->";
        advance();
        advance();
      } else if (std::string_view("{}[]():,|=").find(c) != std::string_view::npos) {
        t.kind = Tok::Symbol;
        t.text = std::string(1, advance());
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct PendingCpt {
  Token at;
  std::string node;
  std::vector<std::pair<std::string, std::string>> given;
  std::vector<double> probs;
};

struct PendingMap {
  Token at;
  std::vector<std::pair<std::string, std::string>> config;
  std::string action;
  std::vector<std::pair<std::pair<std::string, std::string>, std::string>> candidates;
};

struct PendingWeight {
  Token at;
  std::string node;
  std::string state;
  double value = 1.0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  IntuitionNet parse() {
    IntuitionNet net;
    std::vector<Token> node_at;
    bool have_header = false;
    while (peek().kind != Tok::End) {
      const Token& t = peek();
      if (t.kind != Tok::Ident) error("expected a statement keyword", t);
      if (t.text == "net") {
        if (have_header) error("duplicate net header", t);
        next();
        net.name = expect(Tok::String, "net name string").text;
        expect_word("env");
        const Token env = expect(Tok::String, "environment name string");
        net.env = env.text;
        try {
          net.env_actions = envs::env_spec(net.env).action_names;
        } catch (const ConfigError& e) {
          error(e.what(), env);
        }
        have_header = true;
      } else if (t.text == "node" || t.text == "action") {
        node_at.push_back(t);
        net.nodes.push_back(parse_node());
      } else if (t.text == "cpt") {
        cpts_.push_back(parse_cpt());
      } else if (t.text == "weight") {
        weights_.push_back(parse_weight());
      } else if (t.text == "map") {
        maps_.push_back(parse_map());
      } else {
        error("unknown statement '" + t.text + "'", t);
      }
    }
    if (!have_header) throw ParseError("missing 'net \"<name>\" env \"<env>\"' header", 1, 1);

    // Structural checks that can be tied to a source position.
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (net.nodes[j].name == net.nodes[i].name) error("duplicate node '" + net.nodes[i].name + "'", node_at[i]);
      }
      for (const auto& p : net.nodes[i].parents) {
        if (p == net.nodes[i].name) error("cycle: node '" + p + "' lists itself as a parent", node_at[i]);
        if (net.node_index(p) < 0) error("unknown parent '" + p + "'", node_at[i]);
      }
      if (net.nodes[i].is_action) net.action_nodes.push_back(static_cast<int>(i));
    }

    net.check_acyclic();
    build_tables(net);
    net.validate();
    return net;
  }

 private:
  [[noreturn]] static void error(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.column);
  }

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) error("expected " + what, peek());
    return next();
  }

  Token expect_symbol(const std::string& sym) {
    if (peek().kind != Tok::Symbol || peek().text != sym) error("expected '" + sym + "'", peek());
    return next();
  }

  void expect_word(const std::string& word) {
    if (peek().kind != Tok::Ident || peek().text != word) error("expected '" + word + "'", peek());
    next();
  }

  bool accept_symbol(const std::string& sym) {
    if (peek().kind == Tok::Symbol && peek().text == sym) {
      next();
      return true;
    }
    return false;
  }

  std::vector<std::string> ident_list() {
    expect_symbol("[");
    std::vector<std::string> out;
    if (accept_symbol("]")) return out;
    do {
      out.push_back(expect(Tok::Ident, "identifier").text);
    } while (accept_symbol(","));
    expect_symbol("]");
    return out;
  }

  double number() {
    const Token t = expect(Tok::Number, "number");
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) error("malformed number '" + t.text + "'", t);
    return v;
  }

  std::pair<std::string, std::string> binding() {
    std::string lhs = expect(Tok::Ident, "node name").text;
    expect_symbol("=");
    std::string rhs = expect(Tok::Ident, "state label").text;
    return {lhs, rhs};
  }

  IntuitionNode parse_node() {
    IntuitionNode n;
    if (peek().text == "action") {
      next();
      n.is_action = true;
    }
    expect_word("node");
    n.name = expect(Tok::Ident, "node name").text;
    expect_symbol("{");
    bool have_states = false;
    do {
      const Token key = expect(Tok::Ident, "'states' or 'parents'");
      expect_symbol(":");
      if (key.text == "states") {
        n.states = ident_list();
        have_states = true;
      } else if (key.text == "parents") {
        n.parents = ident_list();
      } else {
        error("unknown node field '" + key.text + "'", key);
      }
    } while (accept_symbol(","));
    expect_symbol("}");
    if (!have_states) error("node '" + n.name + "' declares no states", peek());
    return n;
  }

  PendingCpt parse_cpt() {
    PendingCpt c;
    c.at = next();
    c.node = expect(Tok::Ident, "node name").text;
    if (accept_symbol("|")) {
      do {
        c.given.push_back(binding());
      } while (accept_symbol(","));
    }
    expect_symbol("->");
    expect_symbol("[");
    do {
      c.probs.push_back(number());
    } while (accept_symbol(","));
    expect_symbol("]");
    return c;
  }

  PendingWeight parse_weight() {
    PendingWeight w;
    w.at = next();
    auto [node, state] = binding();
    w.node = node;
    w.state = state;
    expect_symbol("->");
    w.value = number();
    return w;
  }

  PendingMap parse_map() {
    PendingMap m;
    m.at = next();
    expect_symbol("(");
    do {
      m.config.push_back(binding());
    } while (accept_symbol(","));
    expect_symbol(")");
    expect_symbol("->");
    if (accept_symbol("{")) {
      do {
        auto cand = binding();
        expect_symbol(":");
        m.candidates.push_back({cand, expect(Tok::Ident, "environment action").text});
      } while (accept_symbol(","));
      expect_symbol("}");
    } else {
      m.action = expect(Tok::Ident, "environment action").text;
    }
    return m;
  }

  int resolve_state(const IntuitionNet& net, const std::string& node, const std::string& state, const Token& at,
                    int* node_out = nullptr) const {
    const int idx = net.node_index(node);
    if (idx < 0) error("unknown node '" + node + "'", at);
    const int s = net.nodes[static_cast<std::size_t>(idx)].state_index(state);
    if (s < 0) error("node '" + node + "' has no state '" + state + "'", at);
    if (node_out) *node_out = idx;
    return s;
  }

  int resolve_action(const IntuitionNet& net, const std::string& name, const Token& at) const {
    for (std::size_t a = 0; a < net.env_actions.size(); ++a) {
      if (net.env_actions[a] == name) return static_cast<int>(a);
    }
    error("environment '" + net.env + "' has no action '" + name + "'", at);
  }

  void build_tables(IntuitionNet& net) {
    const std::size_t n = net.nodes.size();
    net.cpts.assign(n, Cpt{});
    net.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = net.nodes[i];
      Cpt& cpt = net.cpts[i];
      for (const auto& p : node.parents) {
        const int pi = net.node_index(p);
        cpt.parents.push_back(pi);
        cpt.radix.push_back(static_cast<int>(net.nodes[static_cast<std::size_t>(pi)].states.size()));
      }
      cpt.rows.assign(cpt.row_count(), {});
      net.weights[i].assign(node.states.size(), 1.0);
    }

    for (const auto& c : cpts_) {
      const int ni = net.node_index(c.node);
      if (ni < 0) error("cpt for unknown node '" + c.node + "'", c.at);
      const auto& node = net.nodes[static_cast<std::size_t>(ni)];
      Cpt& cpt = net.cpts[static_cast<std::size_t>(ni)];
      if (c.given.size() != node.parents.size()) {
        error("cpt for '" + c.node + "' must condition on exactly its parents", c.at);
      }
      std::vector<int> parent_state(node.parents.size(), -1);
      for (const auto& [p, label] : c.given) {
        auto it = std::find(node.parents.begin(), node.parents.end(), p);
        if (it == node.parents.end()) error("'" + p + "' is not a parent of '" + c.node + "'", c.at);
        const auto k = static_cast<std::size_t>(it - node.parents.begin());
        if (parent_state[k] >= 0) error("parent '" + p + "' given twice", c.at);
        parent_state[k] = resolve_state(net, p, label, c.at);
      }
      const std::size_t row = cpt.row_index([&](int parent_node) {
        for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
          if (cpt.parents[k] == parent_node) return parent_state[k];
        }
        return 0;
      });
      if (!cpt.rows[row].empty()) error("duplicate cpt row for '" + c.node + "'", c.at);
      if (c.probs.size() != node.states.size()) {
        error("cpt row for '" + c.node + "' has " + std::to_string(c.probs.size()) + " entries, node has " +
                  std::to_string(node.states.size()) + " states",
              c.at);
      }
      double sum = 0.0;
      for (double p : c.probs) {
        if (!(p >= 0.0 && p <= 1.0)) error("probability outside [0, 1]", c.at);
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg << "cpt row for '" << c.node << "' sums to " << sum << ", not 1 (normalization error)";
        error(msg.str(), c.at);
      }
      cpt.rows[row] = c.probs;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Cpt& cpt = net.cpts[i];
      for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
        if (!cpt.rows[r].empty()) continue;
        if (!cpt.parents.empty()) {
          throw ParseError("missing cpt row " + row_label(net, i, r) + " for node '" + net.nodes[i].name + "'", 0, 0);
        }
        // Root priors are optional; they do not affect inference with observed parents.
        const auto k = net.nodes[i].states.size();
        cpt.rows[r].assign(k, 1.0 / static_cast<double>(k));
      }
    }

    for (const auto& w : weights_) {
      int ni = -1;
      const int s = resolve_state(net, w.node, w.state, w.at, &ni);
      if (!net.nodes[static_cast<std::size_t>(ni)].is_action) error("weights apply to action nodes only", w.at);
      if (!(w.value > 0.0)) error("weight must be positive", w.at);
      net.weights[static_cast<std::size_t>(ni)][static_cast<std::size_t>(s)] = w.value;
    }

    net.action_map.assign(net.config_count(), ActionRule{});
    if (maps_.empty() && net.action_nodes.size() == 1 &&
        net.nodes[static_cast<std::size_t>(net.action_nodes[0])].states.size() == net.env_actions.size()) {
      for (std::size_t c = 0; c < net.action_map.size(); ++c) net.action_map[c].action = static_cast<int>(c);
    }
    for (const auto& m : maps_) {
      std::vector<int> states(net.action_nodes.size(), -1);
      for (const auto& [node, label] : m.config) {
        int ni = -1;
        const int s = resolve_state(net, node, label, m.at, &ni);
        auto it = std::find(net.action_nodes.begin(), net.action_nodes.end(), ni);
        if (it == net.action_nodes.end()) error("map configuration uses non-action node '" + node + "'", m.at);
        const auto k = static_cast<std::size_t>(it - net.action_nodes.begin());
        if (states[k] >= 0) error("node '" + node + "' given twice in map", m.at);
        states[k] = s;
      }
      for (std::size_t k = 0; k < states.size(); ++k) {
        if (states[k] < 0) {
          error("map must assign every action node (missing '" +
                    net.nodes[static_cast<std::size_t>(net.action_nodes[k])].name + "')",
                m.at);
        }
      }
      std::size_t config = 0;
      for (std::size_t k = 0; k < states.size(); ++k) {
        config = config * net.nodes[static_cast<std::size_t>(net.action_nodes[k])].states.size() +
                 static_cast<std::size_t>(states[k]);
      }
      ActionRule& rule = net.action_map[config];
      if (rule.defined()) error("duplicate map for configuration " + net.config_label(config), m.at);
      if (m.candidates.empty()) {
        rule.action = resolve_action(net, m.action, m.at);
      } else {
        for (const auto& [nb, act] : m.candidates) {
          ActionCandidate cand;
          cand.state = resolve_state(net, nb.first, nb.second, m.at, &cand.node);
          cand.action = resolve_action(net, act, m.at);
          rule.candidates.push_back(cand);
        }
      }
    }
    for (std::size_t c = 0; c < net.action_map.size(); ++c) {
      if (!net.action_map[c].defined()) {
        throw ParseError("action mapping is not total: no map for configuration " + net.config_label(c), 0, 0);
      }
    }
  }

  static std::string row_label(const IntuitionNet& net, std::size_t node, std::size_t row) {
    const Cpt& cpt = net.cpts[node];
    std::vector<std::string> parts(cpt.parents.size());
    for (std::size_t k = cpt.parents.size(); k-- > 0;) {
      const auto r = static_cast<std::size_t>(cpt.radix[k]);
      const auto& parent = net.nodes[static_cast<std::size_t>(cpt.parents[k])];
      parts[k] = parent.name + "=" + parent.states[row % r];
      row /= r;
    }
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
    return "(" + out + ")";
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<PendingCpt> cpts_;
  std::vector<PendingWeight> weights_;
  std::vector<PendingMap> maps_;
};

}  // namespace detail

/// Parses and validates an intuition net. Throws ParseError with line/column.
inline IntuitionNet parse_net(std::string_view text) {
  return detail::Parser(detail::Lexer(text).run()).parse();
}

inline IntuitionNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open intuition net " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_net(buf.str());
}

}  // namespace shire::intuition

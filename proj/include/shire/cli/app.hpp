#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "shire/bench/compare.hpp"
#include "shire/bench/evaluate.hpp"
#include "shire/bench/overhead.hpp"
#include "shire/checkpoint.hpp"
#include "shire/cli/support.hpp"
#include "shire/envs/registry.hpp"
#include "shire/error.hpp"
#include "shire/intuition/inference.hpp"
#include "shire/intuition/parser.hpp"
#include "shire/intuition/targets.hpp"
#include "shire/ppo/config.hpp"
#include "shire/ppo/trainer.hpp"

namespace shire::cli {

struct TrainArgs {
  std::string env;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> steps;
  std::string out = "runs";
  bool shire = false;
  std::string net;
  std::optional<double> lambda;
  std::string target_mode = "map";
  std::optional<int> eval_episodes;
  std::optional<double> stop_at;
  bool resume = false;
  bool quiet = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string env;
  int episodes = 100;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string env;
  std::string seeds = "1,2,3,4,5";
  std::optional<std::int64_t> steps;
  std::string out = "runs";
  std::string net;
  std::optional<double> lambda;
  std::optional<int> eval_episodes;
  int jobs = 1;
  bool quiet = false;
};

struct OverheadArgs {
  std::vector<std::string> nets;
  std::int64_t samples = 10000;
  int repeats = 5;
  std::uint64_t seed = 0;
};

struct InspectArgs {
  std::string net;
  std::string given;
};

inline intuition::IntuitionNet load_named_net(const std::string& name, std::string* hash = nullptr) {
  const auto path = resolve_net(name);
  const std::string text = read_file(path);
  try {
    auto net = intuition::parse_net(text);
    if (hash) *hash = bench::fnv1a_hex(text);
    return net;
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ppo::PPOConfig config_for(const std::string& env, std::optional<std::int64_t> steps, std::optional<double> lambda,
                                 std::optional<int> eval_episodes) {
  ppo::PPOConfig cfg = ppo::default_config(env);
  if (steps) cfg.total_steps = *steps;
  if (lambda) cfg.intuition_coef = *lambda;
  if (eval_episodes) cfg.eval_episodes = *eval_episodes;
  return cfg;
}

inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.resume) throw UsageError("--resume is refused: completed run directories are immutable; start a new run");
  ppo::PPOConfig cfg = config_for(a.env, a.steps, a.lambda, a.eval_episodes);
  cfg.seed = a.seed;
  cfg.intuition_enabled = a.shire;
  cfg.target_mode = intuition::parse_target_mode(a.target_mode);
  if (a.stop_at) {
    cfg.stop_at_reward = *a.stop_at;
  } else if (const auto ssr = envs::env_spec(a.env).ssr) {
    cfg.stop_at_reward = *ssr;
  }

  std::unique_ptr<intuition::IntuitionPipeline> pipeline;
  std::string hash;
  if (a.shire || !a.net.empty()) {
    const std::string name = a.net.empty() ? ppo::default_net_name(a.env) : a.net;
    pipeline = std::make_unique<intuition::IntuitionPipeline>(load_named_net(name, &hash));
  }
  ppo::ProgressFn progress;
  if (!a.quiet) {
    progress = [&err](const bench::CurveRow& r) {
      err << "step " << r.step << "  eval " << std::fixed << std::setprecision(2) << r.mean_eval_reward << " +- "
          << r.std_eval_reward << "  agree " << std::setprecision(3) << r.agreement_rate << '\n'
          << std::defaultfloat;
    };
  }
  auto result = ppo::train(a.env, pipeline.get(), cfg, progress);
  result.report.net_hash = hash;
  const auto dir = make_run_dir(a.out, timestamp_utc() + "_seed" + std::to_string(a.seed));
  write_run(dir, result.report, result.params);

  out << "run: " << dir.string() << '\n';
  out << "steps: " << result.report.total_steps << '\n';
  out << "final eval: " << result.report.final_eval_mean << " +- " << result.report.final_eval_std << '\n';
  if (result.report.steps_to_solve) {
    out << "solved at: " << *result.report.steps_to_solve << " steps\n";
  } else {
    out << "solved at: unsolved\n";
  }
  return kOk;
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto spec = envs::env_spec(a.env);
  const auto params = load_checkpoint_for(a.checkpoint, spec.feature_dim, spec.n_actions);
  const auto r = bench::evaluate(params, a.env, a.episodes, a.seed);
  out << std::setprecision(6) << r.mean << " +- " << r.std << " over " << a.episodes << " episodes\n";
  return kOk;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto seeds = parse_seeds(a.seeds);
  ppo::PPOConfig cfg = config_for(a.env, a.steps, a.lambda, a.eval_episodes);
  std::string hash;
  const std::string name = a.net.empty() ? ppo::default_net_name(a.env) : a.net;
  const intuition::IntuitionPipeline pipeline(load_named_net(name, &hash));

  bench::CompareOptions opts;
  opts.jobs = a.jobs;
  opts.bbr_cap = bench::default_bbr_cap(a.env);
  if (!a.quiet) {
    opts.progress = [&err](std::uint64_t seed, bool shire, const bench::CurveRow& r) {
      err << "seed " << seed << (shire ? " shire   " : " baseline") << "  step " << r.step << "  eval "
          << r.mean_eval_reward << '\n';
    };
  }
  auto summary = bench::compare(a.env, pipeline, cfg, seeds, opts);
  for (auto& r : summary.runs) r.shire.net_hash = hash;

  const auto dir = make_run_dir(a.out, timestamp_utc() + "_bench_" + a.env);
  write_text(dir / "comparison.json", bench::to_json(summary).dump(2) + "\n");
  std::ostringstream csv;
  bench::write_summary_csv(csv, summary);
  write_text(dir / "summary.csv", csv.str());
  out << "bench: " << dir.string() << '\n' << csv.str();
  return kOk;
}

inline int cmd_overhead(const OverheadArgs& a, std::ostream& out) {
  out << "net,env,nodes,us_per_sample,min_us_per_sample\n";
  for (const auto& name : a.nets) {
    const intuition::IntuitionPipeline pipeline(load_named_net(name));
    const auto r = bench::measure_overhead(pipeline, a.samples, a.repeats, a.seed);
    out << pipeline.net().name << ',' << pipeline.net().env << ',' << pipeline.net().size() << ','
        << r.us_per_sample << ',' << r.min_us_per_sample << '\n';
  }
  return kOk;
}

inline void print_net(const intuition::IntuitionNet& net, std::ostream& out) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };
  out << "net \"" << net.name << "\" env \"" << net.env << "\" (" << net.size() << " nodes, "
      << net.config_count() << " child configurations)\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& n = net.nodes[i];
    out << (n.is_action ? "action node " : "node ") << n.name << " [" << join(n.states) << "]";
    if (!n.parents.empty()) out << " | " << join(n.parents);
    out << '\n';
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& n = net.nodes[i];
    const auto& cpt = net.cpts[i];
    for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
      out << "cpt " << n.name;
      std::size_t rem = r;
      std::vector<std::string> cond(cpt.parents.size());
      for (std::size_t k = cpt.parents.size(); k-- > 0;) {
        const auto radix = static_cast<std::size_t>(cpt.radix[k]);
        const auto& p = net.nodes[static_cast<std::size_t>(cpt.parents[k])];
        cond[k] = p.name + "=" + p.states[rem % radix];
        rem /= radix;
      }
      if (!cond.empty()) out << " | " << join(cond);
      out << " -> [";
      for (std::size_t s = 0; s < cpt.rows[r].size(); ++s) out << (s ? ", " : "") << cpt.rows[r][s];
      out << "]\n";
    }
  }
}

inline int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const auto net = load_named_net(a.net);
  print_net(net, out);
  if (a.given.empty()) return kOk;
  const auto evidence = intuition::evidence_from(net, parse_given(a.given));
  const auto post = intuition::infer_action_posterior(net, evidence);
  out << "posterior given " << a.given << ":\n";
  for (std::size_t c = 0; c < post.size(); ++c) {
    const int action = intuition::config_action(net, c, post);
    out << "  " << net.config_label(c) << "  " << post[c] << "  -> " << net.env_actions[static_cast<std::size_t>(action)]
        << "  (weight " << net.config_weight(c) << ")\n";
  }
  Rng unused(0);
  const auto choice = intuition::choose_intuitive(net, post, intuition::TargetMode::Map, unused);
  out << "intuitive action (map): " << net.env_actions[static_cast<std::size_t>(choice.action)] << '\n';
  return kOk;
}

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SHIRE: PPO with intuition-net losses"};
  app.name("shire");
  app.require_subcommand(1, 1);
  const auto env_check = CLI::IsMember(envs::env_names());

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one policy and write a run directory");
  train->add_option("--env", ta.env, "Environment")->required()->check(env_check);
  train->add_option("--seed", ta.seed, "Run seed");
  train->add_option("--steps", ta.steps, "Environment-step budget (default: per-env)");
  train->add_option("--out", ta.out, "Parent directory for run directories");
  train->add_flag("--shire", ta.shire, "Enable the intuition loss");
  train->add_option("--net", ta.net, "Intuition net file or name (default: shipped net for --env)");
  train->add_option("--lambda", ta.lambda, "Intuition loss coefficient");
  train->add_option("--target-mode", ta.target_mode, "Intuitive action choice")->check(CLI::IsMember({"map", "sample"}));
  train->add_option("--eval-episodes", ta.eval_episodes, "Episodes per evaluation")->check(CLI::PositiveNumber);
  train->add_option("--stop-at", ta.stop_at, "Stop once the eval mean reaches this value");
  train->add_flag("--resume", ta.resume, "Refused: runs are immutable");
  train->add_flag("--quiet", ta.quiet, "No per-update progress");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--env", ea.env, "Environment")->required()->check(env_check);
  eval->add_option("--episodes", ea.episodes, "Episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", ea.seed, "Evaluation seed");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Matched-seed baseline vs SHIRE comparison");
  bench->add_option("--env", ba.env, "Environment")->required()->check(env_check);
  bench->add_option("--seeds", ba.seeds, "Comma-separated seeds");
  bench->add_option("--steps", ba.steps, "Environment-step budget per run");
  bench->add_option("--out", ba.out, "Parent directory for the bench directory");
  bench->add_option("--net", ba.net, "Intuition net file or name");
  bench->add_option("--lambda", ba.lambda, "Intuition loss coefficient");
  bench->add_option("--eval-episodes", ba.eval_episodes, "Episodes per evaluation")->check(CLI::PositiveNumber);
  bench->add_option("--jobs", ba.jobs, "Worker threads (one seed each)")->check(CLI::PositiveNumber);
  bench->add_flag("--quiet", ba.quiet, "No per-update progress");

  OverheadArgs oa;
  auto* overhead = app.add_subcommand("overhead", "Intuition pipeline cost in microseconds per sample");
  overhead->add_option("--net", oa.nets, "Net files or names (repeatable)")->required();
  overhead->add_option("--samples", oa.samples, "Buffered observations per pass")->check(CLI::PositiveNumber);
  overhead->add_option("--repeats", oa.repeats, "Timed passes")->check(CLI::PositiveNumber);
  overhead->add_option("--seed", oa.seed, "Observation seed");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect-net", "Print a net, its CPTs, and a posterior");
  inspect->add_option("--net", ia.net, "Net file or name")->required();
  inspect->add_option("--given", ia.given, "Parent assignment, e.g. a=positive,theta=q2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(ta, out, err);
    if (eval->parsed()) return cmd_eval(ea, out);
    if (bench->parsed()) return cmd_bench(ba, out, err);
    if (overhead->parsed()) return cmd_overhead(oa, out);
    if (inspect->parsed()) return cmd_inspect(ia, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace shire::cli

// Acceptance gate. Prints one "criterion N: PASS|FAIL ..." line per selected criterion
// on stdout; per-seed detail goes to stderr. Exit status is 0 iff every selected
// criterion passes.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "../common/oracles.hpp"
#include "shire/bench/compare.hpp"
#include "shire/bench/overhead.hpp"
#include "shire/envs/cartpole.hpp"
#include "shire/envs/lander.hpp"
#include "shire/envs/mountaincar.hpp"
#include "shire/envs/taxi.hpp"
#include "shire/intuition/loss.hpp"
#include "shire/intuition/parser.hpp"
#include "shire/ppo/trainer.hpp"

using namespace shire;
using Json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  Json data = Json::object();
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

const std::vector<std::string> kShippedNets = {"cartpole", "mountaincar", "lander_basic", "lander_antiparallel", "taxi"};

intuition::IntuitionNet shipped_net(const std::string& name) {
  return intuition::load_net(std::string(SHIRE_CONFIG_DIR) + "/" + name + ".net");
}

intuition::IntuitionPipeline default_pipeline(const std::string& env) {
  return intuition::IntuitionPipeline(intuition::load_net(std::string(SHIRE_CONFIG_DIR) + "/" + ppo::default_net_name(env)));
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string steps_str(const std::optional<std::int64_t>& s) { return s ? std::to_string(*s) : "unsolved"; }

double steps_or_inf(const std::optional<std::int64_t>& s) {
  return s ? static_cast<double>(*s) : std::numeric_limits<double>::infinity();
}

void log_seed(const std::string& env, const bench::ComparisonReport& r, const std::string& arm = "shire") {
  std::cerr << "  " << env << " seed " << r.seed << ": threshold " << fmt(r.criterion.threshold, 6) << ", baseline "
            << steps_str(r.baseline_steps) << ", " << arm << " " << steps_str(r.shire_steps) << ", baseline best "
            << fmt(bench::best_eval_reward(r.baseline.curve), 6) << ", " << arm << " best "
            << fmt(bench::best_eval_reward(r.shire.curve), 6) << "\n";
}

Json seed_json(const bench::ComparisonReport& r) {
  return {{"seed", r.seed},
          {"threshold", r.criterion.threshold},
          {"baseline_steps", r.baseline_steps ? Json(*r.baseline_steps) : Json(nullptr)},
          {"shire_steps", r.shire_steps ? Json(*r.shire_steps) : Json(nullptr)},
          {"baseline_best", bench::best_eval_reward(r.baseline.curve)},
          {"shire_best", bench::best_eval_reward(r.shire.curve)},
          {"baseline_seconds", r.baseline.wall_clock_seconds},
          {"shire_seconds", r.shire.wall_clock_seconds},
          {"gain_percent", r.sample_gain_percent ? Json(*r.sample_gain_percent) : Json(nullptr)}};
}

// 1. Exact posterior equals brute-force enumeration for every evidence assignment.
Outcome oracle_equivalence() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (const auto& name : kShippedNets) {
    const auto net = shipped_net(name);
    for (const auto& ev : shire::testing::all_evidence(net)) {
      const auto exact = intuition::infer_action_posterior(net, ev);
      const auto oracle = shire::testing::brute_force_posterior(net, ev);
      if (exact.size() != oracle.size()) return {false, name + ": posterior size mismatch"};
      for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(exact[i] - oracle[i]));
      ++cases;
    }
  }
  return {worst <= 1e-12, "max abs error " + fmt(worst) + " over " + std::to_string(cases) + " evidence sets (tol 1e-12)"};
}

// 2. Central-difference gradient check for every loss term on three seeds.
Outcome gradient_suite() {
  double worst = 0.0;
  int checked = 0;
  for (const char* term : {"policy", "value", "entropy", "intuition"}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto lp = shire::testing::make_loss_problem(term, seed);
      const auto g = lp.gradient();
      const auto c = shire::testing::finite_difference_check([&](const nn::ActorCriticParams& p) { return lp.loss(p); },
                                                             lp.params, g, 1e-5);
      worst = std::max(worst, c.max_rel_error);
      checked += c.checked;
    }
  }
  return {worst <= 1e-4, "max relative error " + fmt(worst) + " over " + std::to_string(checked) +
                             " parameters, 4 terms x 3 seeds (tol 1e-4)"};
}

// 3. Two-action hinge reduces to max(0, 1 - m s).
Outcome binary_reduction() {
  Rng rng(20240601);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const double s = uniform(rng, -4.0, 4.0);
    const int m = uniform_index(rng, 2) == 1 ? 1 : -1;
    Eigen::MatrixXd z(1, 2);
    z << 0.0, s;
    const intuition::IntuitionTargets t{{m == 1 ? 1 : 0}, {1.0}};
    if (intuition::intuition_loss(z, t) != std::max(0.0, 1.0 - m * s)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 10000 pairs differ (exact equality)"};
}

// 4. Environment fidelity checks.
Outcome environment_fidelity() {
  std::vector<std::string> failures;
  Rng rng(4);

  double mc_err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double p = uniform(rng, -1.2, 0.49), v = uniform(rng, -0.07, 0.07);
    const int a = uniform_index(rng, 3);
    envs::MountainCar env;
    env.set_state(p, v);
    const auto r = env.step(a);
    double v2 = std::clamp(v + (a - 1) * 0.001 - 0.0025 * std::cos(3.0 * p), -0.07, 0.07);
    const double p2 = std::clamp(p + v2, -1.2, 0.6);
    if (p2 == -1.2 && v2 < 0.0) v2 = 0.0;
    mc_err = std::max({mc_err, std::abs(r.obs(0) - p2), std::abs(r.obs(1) - v2)});
  }
  if (mc_err > 1e-12) failures.push_back("mountaincar step error " + fmt(mc_err));

  std::set<int> codes;
  bool roundtrip = true;
  for (int row = 0; row < 5; ++row)
    for (int col = 0; col < 5; ++col)
      for (int p = 0; p < 5; ++p)
        for (int d = 0; d < 4; ++d) {
          const int code = envs::taxi_encode(row, col, p, d);
          codes.insert(code);
          const auto s = envs::taxi_decode(code);
          roundtrip = roundtrip && s.row == row && s.col == col && s.passenger == p && s.destination == d;
        }
  const bool bijection = roundtrip && codes.size() == 500 && *codes.begin() == 0 && *codes.rbegin() == 499;
  if (!bijection) failures.push_back("taxi codec is not a bijection on 0..499");

  double cp_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::array<double, 4> s{uniform(rng, -2, 2), uniform(rng, -1, 1), uniform(rng, -0.2, 0.2), uniform(rng, -1, 1)};
    envs::CartPole a, b;
    a.set_state(s);
    b.set_state({-s[0], -s[1], -s[2], -s[3]});
    for (int t = 0; t < 20; ++t) {
      const int act = uniform_index(rng, 2);
      const auto ra = a.step(act);
      const auto rb = b.step(1 - act);
      for (int i = 0; i < 4; ++i) cp_err = std::max(cp_err, std::abs(ra.obs(i) + rb.obs(i)));
      if (ra.done() != rb.done()) cp_err = std::numeric_limits<double>::infinity();
      if (ra.done() || rb.done()) break;
    }
  }
  if (cp_err > 1e-12) failures.push_back("cartpole mirror error " + fmt(cp_err));

  double ll_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    const envs::Lander::State s{uniform(rng, -3, 3), uniform(rng, 2, 9),       uniform(rng, -1, 1),
                                uniform(rng, -1, 1), uniform(rng, -0.5, 0.5), uniform(rng, -0.3, 0.3)};
    envs::Lander a, b;
    a.set_state(s);
    b.set_state({-s.x, s.y, -s.vx, s.vy, -s.theta, -s.omega});
    for (int t = 0; t < 50; ++t) {
      const int act = uniform_index(rng, 4);
      const int mirrored = act == envs::Lander::FireLeft    ? envs::Lander::FireRight
                           : act == envs::Lander::FireRight ? envs::Lander::FireLeft
                                                            : act;
      const auto ra = a.step(act);
      const auto rb = b.step(mirrored);
      const double sign[6] = {-1, 1, -1, 1, -1, -1};
      for (int i = 0; i < 6; ++i) ll_err = std::max(ll_err, std::abs(ra.obs(i) - sign[i] * rb.obs(i)));
      ll_err = std::max({ll_err, std::abs(ra.obs(6) - rb.obs(7)), std::abs(ra.obs(7) - rb.obs(6))});
      if (ra.done() != rb.done()) ll_err = std::numeric_limits<double>::infinity();
      if (ra.done() || rb.done()) break;
    }
  }
  if (ll_err > 1e-12) failures.push_back("lander mirror error " + fmt(ll_err));

  double tele_err = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    envs::Lander env;
    envs::Observation obs = env.reset(seed);
    const double phi0 = envs::Lander::potential(obs);
    Rng arng(seed + 1000);
    double sum = 0.0;
    for (;;) {
      const auto r = env.step(uniform_index(arng, 4));
      sum += env.last_shaping();
      obs = r.obs;
      if (r.done()) break;
    }
    tele_err = std::max(tele_err, std::abs(sum - (envs::Lander::potential(obs) - phi0)));
  }
  if (tele_err > 1e-9) failures.push_back("lander shaping telescoping error " + fmt(tele_err));

  std::string detail = "mountaincar " + fmt(mc_err) + " (1e-12), taxi bijection " + (bijection ? "ok" : "broken") +
                       ", cartpole mirror " + fmt(cp_err) + " (1e-12), lander mirror " + fmt(ll_err) +
                       " (1e-12), lander telescoping " + fmt(tele_err) + " (1e-9)";
  return {failures.empty(), detail};
}

// 5. CartPole: both arms solve within 200k; SHIRE no slower on >= 3/5; median gain >= 15%.
Outcome cartpole_direction() {
  const auto pipeline = default_pipeline("cartpole");
  const ppo::PPOConfig cfg = ppo::default_config("cartpole");
  std::vector<double> gains;
  int both_solve = 0, no_slower = 0;
  Outcome out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = bench::compare_seed("cartpole", pipeline, cfg, seed);
    log_seed("cartpole", r);
    out.data["seeds"].push_back(seed_json(r));
    const bool solved = r.baseline_steps && r.shire_steps && *r.baseline_steps <= 200'000 && *r.shire_steps <= 200'000;
    if (solved) {
      ++both_solve;
      if (*r.shire_steps <= *r.baseline_steps) ++no_slower;
      gains.push_back(*r.sample_gain_percent);
    } else {
      gains.push_back(-std::numeric_limits<double>::infinity());
    }
  }
  const double med = bench::median(gains);
  out.pass = both_solve == 5 && no_slower >= 3 && med >= 15.0;
  out.detail = "both arms solved on " + std::to_string(both_solve) + "/5 seeds (need 5), SHIRE no slower on " +
               std::to_string(no_slower) + "/5 (need 3), median gain " + fmt(med) + "% (need >= 15%)";
  out.data["median_gain_percent"] = std::isfinite(med) ? Json(med) : Json(nullptr);
  return out;
}

// 6. MountainCar: SHIRE beats -110 on >= 2/3 seeds; >= 30% fewer steps where both solve.
Outcome mountaincar() {
  const intuition::IntuitionPipeline pipeline(shipped_net("mountaincar"));
  ppo::PPOConfig cfg = ppo::default_config("mountaincar");
  cfg.total_steps = 600'000;
  int shire_reached = 0;
  bool gains_ok = true;
  std::string per_seed;
  Outcome out;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = bench::compare_seed("mountaincar", pipeline, cfg, seed);
    log_seed("mountaincar", r);
    out.data["seeds"].push_back(seed_json(r));
    if (!r.shire.curve.empty() && bench::best_eval_reward(r.shire.curve) > -110.0) ++shire_reached;
    if (r.baseline_steps && r.shire_steps) {
      const double g = *r.sample_gain_percent;
      if (g < 30.0) gains_ok = false;
      per_seed += " seed " + std::to_string(seed) + " gain " + fmt(g) + "%;";
    } else {
      per_seed += " seed " + std::to_string(seed) + " baseline " + steps_str(r.baseline_steps) + " shire " +
                  steps_str(r.shire_steps) + ";";
    }
  }
  out.pass = shire_reached >= 2 && gains_ok;
  out.detail = "SHIRE above -110 on " + std::to_string(shire_reached) + "/3 seeds (need 2);" + per_seed +
               " gains where both solve " + (gains_ok ? "all >= 30%" : "below 30%");
  return out;
}

// 7. LunarLander BBR: basic net faster on >= 3/5; antiparallel median <= basic median.
Outcome lander() {
  const intuition::IntuitionPipeline basic(shipped_net("lander_basic"));
  const intuition::IntuitionPipeline anti(shipped_net("lander_antiparallel"));
  ppo::PPOConfig cfg = ppo::default_config("lander");
  cfg.total_steps = 400'000;
  int basic_wins = 0;
  std::vector<double> basic_steps, anti_steps;
  Outcome out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto base = bench::run_baseline("lander", cfg, seed);
    const auto rb = bench::compare_against_baseline("lander", basic, cfg, seed, base);
    const auto ra = bench::compare_against_baseline("lander", anti, cfg, seed, base);
    log_seed("lander", rb, "basic");
    log_seed("lander", ra, "antiparallel");
    Json j = seed_json(rb);
    j["antiparallel_steps"] = ra.shire_steps ? Json(*ra.shire_steps) : Json(nullptr);
    j["antiparallel_best"] = bench::best_eval_reward(ra.shire.curve);
    out.data["seeds"].push_back(j);
    if (rb.shire_steps && rb.baseline_steps && *rb.shire_steps < *rb.baseline_steps) ++basic_wins;
    basic_steps.push_back(steps_or_inf(rb.shire_steps));
    anti_steps.push_back(steps_or_inf(ra.shire_steps));
  }
  const double mb = bench::median(basic_steps), ma = bench::median(anti_steps);
  out.pass = basic_wins >= 3 && std::isfinite(ma) && ma <= mb;
  out.detail = "basic net reached BBR first on " + std::to_string(basic_wins) +
               "/5 seeds (need 3), median steps-to-BBR antiparallel " + fmt(ma, 7) + " vs basic " + fmt(mb, 7) +
               " (need antiparallel <= basic)";
  return out;
}

// 8. Taxi BBR with cap 8.1: median gain >= 15% over 3 seeds.
Outcome taxi() {
  const intuition::IntuitionPipeline pipeline(shipped_net("taxi"));
  ppo::PPOConfig cfg = ppo::default_config("taxi");
  cfg.total_steps = 1'500'000;
  bench::CompareOptions opts;
  opts.bbr_cap = 8.1;
  std::vector<double> gains;
  Outcome out;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = bench::compare_seed("taxi", pipeline, cfg, seed, opts);
    log_seed("taxi", r);
    out.data["seeds"].push_back(seed_json(r));
    gains.push_back(r.sample_gain_percent ? *r.sample_gain_percent : -std::numeric_limits<double>::infinity());
  }
  const double med = bench::median(gains);
  out.pass = med >= 15.0;
  out.detail = "median gain " + fmt(med) + "% over 3 seeds (need >= 15%)";
  return out;
}

// 9. Overhead bound and size ordering. Rounds alternate between nets; each net is
// summarised by the median of its per-round minimum.
Outcome overhead() {
  constexpr int kRounds = 9;
  constexpr std::int64_t kSamples = 20'000;
  std::map<std::string, std::vector<double>> mins, medians;
  std::map<std::string, intuition::IntuitionPipeline> pipelines;
  for (const auto& name : kShippedNets) pipelines.emplace(name, intuition::IntuitionPipeline(shipped_net(name)));
  for (int round = 0; round < kRounds; ++round) {
    for (const auto& name : kShippedNets) {
      const auto r = bench::measure_overhead(pipelines.at(name), kSamples, 3, static_cast<std::uint64_t>(round));
      mins[name].push_back(r.min_us_per_sample);
      medians[name].push_back(r.us_per_sample);
    }
  }
  Outcome out;
  double worst = 0.0;
  std::string per_net;
  std::map<std::string, double> summary;
  for (const auto& name : kShippedNets) {
    summary[name] = bench::median(mins[name]);
    worst = std::max(worst, *std::max_element(medians[name].begin(), medians[name].end()));
    per_net += " " + name + " " + fmt(summary[name]) + ";";
    out.data[name] = {{"median_of_min_us", summary[name]}, {"max_median_us", worst}};
  }
  const bool ordered = summary["lander_antiparallel"] >= summary["lander_basic"];
  out.pass = worst <= 1000.0 && ordered;
  out.detail = "us/sample:" + per_net + " worst " + fmt(worst) + " (need <= 1000); lander 6-node " +
               (ordered ? ">=" : "<") + " 5-node";
  return out;
}

// 10. Disabled intuition and lambda_I = 0 give bit-identical curves.
Outcome flag_off() {
  std::vector<std::string> diffs;
  for (const std::string env : {"cartpole", "lander", "taxi"}) {
    ppo::PPOConfig off = ppo::default_config(env);
    off.total_steps = 30'720;
    off.eval_episodes = 10;
    off.stop_at_reward.reset();
    off.intuition_enabled = false;
    ppo::PPOConfig zero = off;
    zero.intuition_enabled = true;
    zero.intuition_coef = 0.0;
    const auto pipeline = default_pipeline(env);
    const auto a = ppo::train(env, nullptr, off);
    const auto b = ppo::train(env, &pipeline, zero);
    bool same = a.report.curve.size() == b.report.curve.size() && a.params.flat() == b.params.flat();
    for (std::size_t i = 0; same && i < a.report.curve.size(); ++i) {
      const auto& x = a.report.curve[i];
      const auto& y = b.report.curve[i];
      same = x.step == y.step && x.mean_eval_reward == y.mean_eval_reward && x.std_eval_reward == y.std_eval_reward &&
             x.loss_policy == y.loss_policy && x.loss_value == y.loss_value && x.loss_entropy == y.loss_entropy &&
             x.clip_fraction == y.clip_fraction;
    }
    if (!same) diffs.push_back(env);
  }
  return {diffs.empty(), diffs.empty() ? "curves and final parameters identical on cartpole, lander, taxi"
                                       : "curves differ on " + diffs.front()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::string report_dir;
  app.add_option("criteria", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--report-dir", report_dir, "Write criterion_<N>.json with per-seed data here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "inference oracle equivalence", 1.0, oracle_equivalence},
      {2, "gradient suite", 30.0, gradient_suite},
      {3, "binary hinge reduction", 1.0, binary_reduction},
      {4, "environment fidelity", 10.0, environment_fidelity},
      {5, "cartpole direction", 30 * 60.0, cartpole_direction},
      {6, "mountaincar", 3 * 3600.0, mountaincar},
      {7, "lunarlander bbr", 4 * 3600.0, lander},
      {8, "taxi bbr", 4 * 3600.0, taxi},
      {9, "overhead", std::numeric_limits<double>::infinity(), overhead},
      {10, "flag-off equivalence", 5 * 60.0, flag_off},
  };
  if (selected.empty())
    for (const auto& c : all) selected.push_back(c.id);

  bool all_pass = true;
  for (const auto& c : all) {
    if (std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = o.detail + "; runtime " + fmt(sec) + " s";
    if (sec > c.budget_seconds) {
      o.pass = false;
      detail += " exceeds budget " + fmt(c.budget_seconds) + " s";
    }
    all_pass = all_pass && o.pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL") << " " << detail
              << std::endl;
    if (!report_dir.empty()) {
      std::filesystem::create_directories(report_dir);
      Json j = {{"criterion", c.id}, {"name", c.name}, {"pass", o.pass}, {"detail", detail}, {"data", o.data}};
      std::ofstream(std::filesystem::path(report_dir) / ("criterion_" + std::to_string(c.id) + ".json")) << j.dump(2)
                                                                                                        << "\n";
    }
  }
  return all_pass ? 0 : 1;
}

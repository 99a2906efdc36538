// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "restop/baselines.hpp"
#include "restop/discretizer.hpp"
#include "restop/evaluation.hpp"
#include "restop/registry.hpp"
#include "restop/simulator.hpp"
#include "restop/stopping.hpp"
#include "support.hpp"

using namespace restop;
using namespace restop::testing;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << '\n';
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::vector<DiscretizedRun>> oracle_datasets() {
  RngStream rng(2024, 0);
  std::vector<std::vector<DiscretizedRun>> datasets;
  for (int i = 0; i < 100; ++i) datasets.push_back(random_token_runs(rng, 6, 5, 20));
  return datasets;
}

PolicyFactory random_search_factory() {
  return [] {
    return std::make_unique<RestartCurvePolicy>(
        std::make_shared<LengthCurveRule>(LengthCurveRule::unbounded()));
  };
}

// --- criterion 1 + 3 ---------------------------------------------------------

void criterion_1_and_3() {
  auto start = std::chrono::steady_clock::now();
  auto datasets = oracle_datasets();

  bool optimality = true;
  bool signs = true;
  for (const auto& runs : datasets) {
    auto oracle = brute_force_optimal(runs);
    auto trie = WeightedTrie::build(runs);
    auto fit = find_stopping_rule(trie, 0.01);
    if (!(fit.stats.ratio >= oracle.r_star / 1.01 - 1e-12)) optimality = false;

    if (delta(trie, 0.0).value != trie.total_success_mass()) signs = false;
    if (!(delta(trie, oracle.r_star * 0.9).value > 0.0)) signs = false;
    if (!(delta(trie, oracle.r_star * 1.1).value <= 0.0)) signs = false;
    double prev = std::numeric_limits<double>::infinity();
    for (int g = 0; g < 50; ++g) {
      double v = delta(trie, double(g) / 49.0).value;
      if (v > prev + 1e-12) signs = false;
      prev = v;
    }
  }
  double elapsed = seconds_since(start);
  report(1, "bisection within 1.01 of the brute-force optimum on 100 datasets",
         optimality && elapsed < 10.0,
         "runtime " + std::to_string(elapsed) + " s, limit 10 s");
  report(3, "delta sign test, exact delta(0), nonincreasing grid", signs);
}

// --- criterion 2 -------------------------------------------------------------

void criterion_2() {
  auto start = std::chrono::steady_clock::now();
  auto ds = benchmark_dataset();
  SuccessSpec spec{final_value_percentile(ds, kBenchmarkPercentile)};
  auto disc = std::make_shared<QuantileDiscretizer>(QuantileDiscretizer::fit(ds, spec, 3, 4));
  auto runs = disc->discretize_all(ds, spec);
  auto trie = WeightedTrie::build(runs);

  // ten random rules with workable success probability: five thresholds and
  // five delta maximizers
  RngStream rng(99, 0);
  std::vector<int> usable_ts;
  {
    std::vector<int> ts(size_t(ds.horizon));
    for (int t = 1; t <= ds.horizon; ++t) ts[size_t(t) - 1] = t;
    for (const auto& point : threshold_sweep(ds, spec, ts)) {
      if (point.stats.q >= 0.05) usable_ts.push_back(point.t);
    }
  }

  bool ok = true;
  std::string detail;
  for (int j = 0; j < 10; ++j) {
    double exact = 0.0;
    PolicyFactory factory;
    if (j < 5) {
      int t = usable_ts[size_t(rng.bounded(usable_ts.size()))];
      exact = exact_restart_expectation(FixedThresholdRule(t), runs);
      factory = [t] {
        return std::make_unique<RestartCurvePolicy>(std::make_shared<LengthCurveRule>(t));
      };
    } else {
      double r = 0.005 + 0.02 * rng.next_double();
      auto rule = std::make_shared<StoppingTree>(delta(trie, r).maximizer);
      exact = exact_restart_expectation(*rule, runs);
      factory = [disc, rule] { return std::make_unique<RestartTokenPolicy>(disc, rule); };
    }
    if (std::isinf(exact)) {
      ok = false;
      detail = "rule " + std::to_string(j) + " has infinite expectation";
      continue;
    }
    auto sim = simulate_time_to_success(factory, ds, spec, 100000, 1000.0 * ds.horizon,
                                        5000 + uint64_t(j), 4);
    if (!(std::abs(sim.mean_time - exact) <= 3.0 * sim.std_error)) {
      ok = false;
      detail = "rule " + std::to_string(j) + " off by " +
               std::to_string(std::abs(sim.mean_time - exact) / sim.std_error) + " se";
    }
  }
  double elapsed = seconds_since(start);
  report(2, "Monte Carlo matches c/q within 3 std errors for 10 rules",
         ok && elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s, limit 60 s");
}

// --- criterion 4 -------------------------------------------------------------

void criterion_4() {
  auto ds = lossless_dataset();
  SuccessSpec spec{kLosslessTarget};
  auto disc = QuantileDiscretizer::fit(ds, spec, int(ds.curves.size()), 1);
  auto runs = disc.discretize_all(ds, spec);
  auto oracle = brute_force_optimal(runs, {}, 40);
  double bound = 1.0 / oracle.r_star;

  OnlineConfig online;
  online.k_set = {2};
  online.folds = 2;
  online.min_count = 1;
  online.fold_seed = 1;
  PolicyContext ctx{&ds, spec, online};

  std::vector<std::string> names{"random", "fixed:1", "fixed:2",  "fixed:3",
                                 "fixed:4", "luby",    "above-median", "sh",
                                 "hyperband", "explore-exploit", "above-median-online"};
  bool ok = true;
  std::string detail;
  for (const auto& name : names) {
    auto sim = simulate_time_to_success(make_policy_factory(name, ctx), ds, spec, 100000,
                                        1000.0 * ds.horizon, 777, 4);
    if (std::isinf(sim.mean_time)) continue;  // never succeeds: bound holds trivially
    double rel_se = sim.std_error / sim.mean_time;
    if (!(sim.mean_time >= bound * (1.0 - 3.0 * rel_se))) {
      ok = false;
      detail = name + " mean " + std::to_string(sim.mean_time) + " < bound " +
               std::to_string(bound);
    }
  }
  report(4, "every baseline's simulated mean time respects the 1/r* lower bound", ok, detail);
}

// --- criterion 5 -------------------------------------------------------------

void criterion_5() {
  auto est = CvEstimate::from_folds({{0.1, 1.0}, {0.9, 1.0}});
  bool arithmetic = std::abs(est.naive - 50.0 / 9.0) <= 1e-12 * (50.0 / 9.0) &&
                    est.low_variance == 2.0;

  std::vector<Curve> curves;
  for (int i = 0; i < 5; ++i) {
    double bump = 0.001 * i;
    curves.push_back(
        Curve{"s" + std::to_string(i), {0.3 + bump, 0.6 + bump, 0.95 + bump}, {}});
  }
  curves.push_back(Curve{"never", {0.1, 0.1, 0.1}, {}});
  auto ds = CurveDataset::from_curves(curves);
  auto loo = kfold_cv(ds, SuccessSpec{0.9}, 2, int(ds.curves.size()), 1, 0.01, 7);
  bool leave_one_out = std::isinf(loo.naive) && std::isfinite(loo.low_variance);

  report(5, "Appendix-style estimator arithmetic exact; leave-one-out stays finite",
         arithmetic && leave_one_out);
}

// --- criterion 6 -------------------------------------------------------------

void criterion_6() {
  std::vector<long long> expected{1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8, 1};
  bool ok = true;
  for (size_t i = 0; i < expected.size(); ++i) {
    if (luby_length((long long)i + 1) != expected[i]) ok = false;
  }
  report(6, "luby positions 1..16 exact", ok);
}

// --- criterion 7 -------------------------------------------------------------

void criterion_7() {
  bool ok = true;
  std::string detail;
  // unit costs and uniform weights make q and c rationals over the run
  // count; exact integer playout sidesteps float accumulation on ties
  auto int_eval = [](const TokenRule& rule, const std::vector<DiscretizedRun>& runs) {
    long long successes = 0, steps = 0;
    auto walker = rule.make_walker();
    for (const auto& run : runs) {
      walker->reset();
      for (size_t t = 0; t < run.tokens.size(); ++t) {
        ++steps;
        if (run.tokens[t].is_success()) {
          ++successes;
          break;
        }
        if (!walker->advance(run.tokens[t])) break;
      }
    }
    return std::pair<long long, long long>{successes, steps};
  };
  // c1/q1 <= c2/q2 over nonnegative rationals, infinities included
  auto et_leq = [](std::pair<long long, long long> a, std::pair<long long, long long> b) {
    if (a.first == 0) return b.first == 0;
    if (b.first == 0) return true;
    return a.second * b.first <= b.second * a.first;
  };

  auto check_chain = [&](const std::vector<DiscretizedRun>& runs, const std::string& tag) {
    auto trie = WeightedTrie::build(runs);
    auto fit = find_stopping_rule(trie, 1e-9);
    auto fitted = int_eval(fit.rule, runs);
    size_t max_len = 0;
    for (const auto& r : runs) max_len = std::max(max_len, r.tokens.size());
    auto best_fixed = int_eval(FixedThresholdRule(1), runs);
    for (size_t t = 2; t <= max_len; ++t) {
      auto cand = int_eval(FixedThresholdRule((long long)t), runs);
      if (et_leq(cand, best_fixed)) best_fixed = cand;
    }
    auto random_time = int_eval(FixedThresholdRule::unbounded(), runs);
    if (!(et_leq(fitted, best_fixed) && et_leq(best_fixed, random_time))) {
      ok = false;
      detail = tag;
    }
  };

  auto datasets = oracle_datasets();
  for (size_t i = 0; i < datasets.size(); ++i)
    check_chain(datasets[i], "random dataset " + std::to_string(i));
  check_chain(two_sequence_runs(), "two-sequence fixture");
  {
    auto ds = lossless_dataset();
    SuccessSpec spec{kLosslessTarget};
    auto disc = QuantileDiscretizer::fit(ds, spec, int(ds.curves.size()), 1);
    check_chain(disc.discretize_all(ds, spec), "lossless fixture");
  }
  report(7, "fitted <= best fixed threshold <= random search on every test dataset", ok,
         detail);
}

// --- criterion 8 -------------------------------------------------------------

void criterion_8() {
  // regression fixtures, frozen from the first run of this deterministic
  // benchmark (improvement factors over random search)
  constexpr double kFrozenQuantileImprovement = 11.6300231164;
  constexpr double kFrozenFixedImprovement = 2.72794672296;
  constexpr double kFrozenAboveMedianImprovement = 2.78715511336;

  auto ds = benchmark_dataset();
  SuccessSpec spec{final_value_percentile(ds, kBenchmarkPercentile)};
  auto sel = select_best_quantile_policy(ds, spec, {2, 3, 4}, 5, 4, 0.01, 17);

  std::vector<int> ts(size_t(ds.horizon));
  for (int t = 1; t <= ds.horizon; ++t) ts[size_t(t) - 1] = t;
  int best_t = best_threshold(threshold_sweep(ds, spec, ts)).t;

  auto disc = std::make_shared<QuantileDiscretizer>(sel.discretizer);
  auto rule = std::make_shared<StoppingTree>(sel.rule);
  auto medians = std::make_shared<AboveMedianRule>(population_medians(ds));

  long long trials = 100000;
  uint64_t seed = 424242;
  auto q_sim = simulate_time_to_success(
      [&] { return std::make_unique<RestartTokenPolicy>(disc, rule); }, ds, spec, trials,
      1000.0 * ds.horizon, seed, 4);
  auto f_sim = simulate_time_to_success(
      [&] {
        return std::make_unique<RestartCurvePolicy>(std::make_shared<LengthCurveRule>(best_t));
      },
      ds, spec, trials, 1000.0 * ds.horizon, seed, 4);
  auto m_sim = simulate_time_to_success(
      [&] { return std::make_unique<RestartCurvePolicy>(medians); }, ds, spec, trials,
      1000.0 * ds.horizon, seed, 4);
  auto r_sim = simulate_time_to_success(random_search_factory(), ds, spec, trials,
                                        1000.0 * ds.horizon, seed, 4);

  bool beats_fixed =
      q_sim.mean_time + 3.0 * q_sim.std_error < f_sim.mean_time - 3.0 * f_sim.std_error;
  bool beats_median =
      q_sim.mean_time + 3.0 * q_sim.std_error < m_sim.mean_time - 3.0 * m_sim.std_error;

  double imp_q = r_sim.mean_time / q_sim.mean_time;
  double imp_f = r_sim.mean_time / f_sim.mean_time;
  double imp_m = r_sim.mean_time / m_sim.mean_time;
  auto matches = [](double measured, double frozen) {
    return frozen == 0.0 || std::abs(measured - frozen) <= 1e-6 * frozen;
  };
  bool frozen_ok = matches(imp_q, kFrozenQuantileImprovement) &&
                   matches(imp_f, kFrozenFixedImprovement) &&
                   matches(imp_m, kFrozenAboveMedianImprovement);

  std::ostringstream detail;
  detail.precision(12);
  detail << "improvements: quantile " << imp_q << ", fixed:" << best_t << " " << imp_f
         << ", above-median " << imp_m;
  report(8, "cv quantile policy beats best threshold and above-median at 3 se",
         beats_fixed && beats_median && frozen_ok, detail.str());
}

// --- criterion 9 -------------------------------------------------------------

void criterion_9() {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "restop_acceptance";
  fs::create_directories(dir);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto shell = [](const std::string& cmd) {
    return std::system((cmd + " >/dev/null 2>&1").c_str()) == 0;
  };
  std::string bin = RESTOP_BIN;

  std::ofstream cfg(dir / "exp.cfg");
  cfg << "synthetic_n = 30\nsynthetic_horizon = 12\nsynthetic_seed = 4\n"
      << "target_percentile = 85\ntrials = 4000\nmaster_seed = 12\nfold_seed = 3\n"
      << "folds = 3\nk_set = 2,3\nmin_count = 2\n"
      << "policies = random,fixed:3,luby,above-median,sh,hyperband\n";
  cfg.close();
  std::string base = bin + " %CMD% --config " + (dir / "exp.cfg").string();

  bool ok = true;
  auto run_twice = [&](const std::string& cmd_name, const std::string& extra) {
    for (int round = 1; round <= 2; ++round) {
      std::string out = (dir / (cmd_name + std::to_string(round) + ".out")).string();
      std::string cmd = base;
      cmd.replace(cmd.find("%CMD%"), 5, cmd_name);
      if (!shell(cmd + " " + extra + " --out " + out + " --overwrite")) return false;
    }
    return slurp(dir / (cmd_name + "1.out")) == slurp(dir / (cmd_name + "2.out"));
  };

  ok = ok && run_twice("gen", "");
  ok = ok && run_twice("sweep", "");
  ok = ok && run_twice("cv", "");
  ok = ok && run_twice("simulate", "--threads 4");
  // parallel and serial simulation agree byte-for-byte
  {
    std::string cmd = base;
    cmd.replace(cmd.find("%CMD%"), 5, "simulate");
    std::string serial = (dir / "sim_serial.out").string();
    ok = ok && shell(cmd + " --threads 1 --out " + serial);
    ok = ok && slurp(dir / "sim_serial.out") == slurp(dir / "simulate1.out");
  }
  // fit twice on a file dataset
  {
    std::ofstream fit_cfg(dir / "fit.cfg");
    fit_cfg << "curves_path = " << (dir / "gen1.out").string() << "\n"
            << "target_percentile = 85\nk_set = 2\nmin_count = 2\n";
    fit_cfg.close();
    for (int round = 1; round <= 2; ++round) {
      std::string out = (dir / ("fit" + std::to_string(round) + ".json")).string();
      ok = ok && shell(bin + " fit --config " + (dir / "fit.cfg").string() + " --out " + out);
    }
    ok = ok && slurp(dir / "fit1.json") == slurp(dir / "fit2.json");
  }
  report(9, "CLI commands rerun byte-identically, including parallel simulation", ok);
}

}  // namespace

int main() {
  criterion_1_and_3();
  criterion_2();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED\n"
                              : std::to_string(failures) + " CRITERIA FAILED\n");
  return failures;
}

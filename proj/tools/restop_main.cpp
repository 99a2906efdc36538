// restop: fit, sweep, simulate, and cross-validate early-stopping/restart
// policies over observation-curve datasets. Every command is a pure function
// of its config and input files; all randomness flows from explicit seeds.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "restop/baselines.hpp"
#include "restop/errors.hpp"
#include "restop/evaluation.hpp"
#include "restop/io.hpp"
#include "restop/policy_file.hpp"
#include "restop/registry.hpp"
#include "restop/simulator.hpp"
#include "restop/synthetic.hpp"

namespace {

using namespace restop;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitUnreachable = 4;

struct ExperimentConfig {
  std::optional<std::string> curves_path;
  std::optional<std::string> curves_format;

  std::optional<long long> synthetic_n;
  std::optional<int> synthetic_horizon;
  std::optional<uint64_t> synthetic_seed;
  SyntheticParams synth;

  std::optional<double> target;
  std::optional<double> target_percentile;

  std::vector<int> k_set{2, 3, 4};
  int min_count = 4;
  double epsilon = 0.01;
  int folds = 5;
  long long trials = 4000;
  std::optional<double> cap;
  std::optional<uint64_t> master_seed;
  std::optional<uint64_t> fold_seed;
  std::vector<std::string> policies;
  int refit_period = 8;
  double exploration_percentile = 90.0;
  int threads = 1;

  std::optional<std::string> out;
  bool overwrite = false;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& s);

template <>
double parse_value<double>(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + s + "'");
  }
}

template <>
long long parse_value<long long>(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + s + "'");
  }
}

template <>
int parse_value<int>(const std::string& key, const std::string& s) {
  return int(parse_value<long long>(key, s));
}

template <>
uint64_t parse_value<uint64_t>(const std::string& key, const std::string& s) {
  return uint64_t(parse_value<long long>(key, s));
}

std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(parse_value<int>(key, part));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "curves_path") cfg.curves_path = value;
  else if (key == "curves_format") cfg.curves_format = value;
  else if (key == "synthetic_n") cfg.synthetic_n = parse_value<long long>(key, value);
  else if (key == "synthetic_horizon") cfg.synthetic_horizon = parse_value<int>(key, value);
  else if (key == "synthetic_seed") cfg.synthetic_seed = parse_value<uint64_t>(key, value);
  else if (key == "synthetic_a_max_min") cfg.synth.a_max_min = parse_value<double>(key, value);
  else if (key == "synthetic_a_max_max") cfg.synth.a_max_max = parse_value<double>(key, value);
  else if (key == "synthetic_lambda_min") cfg.synth.lambda_min = parse_value<double>(key, value);
  else if (key == "synthetic_lambda_max") cfg.synth.lambda_max = parse_value<double>(key, value);
  else if (key == "synthetic_noise_sigma") cfg.synth.noise_sigma = parse_value<double>(key, value);
  else if (key == "target") cfg.target = parse_value<double>(key, value);
  else if (key == "target_percentile") cfg.target_percentile = parse_value<double>(key, value);
  else if (key == "k_set") cfg.k_set = parse_int_list(key, value);
  else if (key == "min_count") cfg.min_count = parse_value<int>(key, value);
  else if (key == "epsilon") cfg.epsilon = parse_value<double>(key, value);
  else if (key == "folds") cfg.folds = parse_value<int>(key, value);
  else if (key == "trials") cfg.trials = parse_value<long long>(key, value);
  else if (key == "cap") cfg.cap = parse_value<double>(key, value);
  else if (key == "master_seed") cfg.master_seed = parse_value<uint64_t>(key, value);
  else if (key == "fold_seed") cfg.fold_seed = parse_value<uint64_t>(key, value);
  else if (key == "policies") cfg.policies = parse_string_list(value);
  else if (key == "refit_period") cfg.refit_period = parse_value<int>(key, value);
  else if (key == "exploration_percentile")
    cfg.exploration_percentile = parse_value<double>(key, value);
  else if (key == "threads") cfg.threads = parse_value<int>(key, value);
  else if (key == "out") cfg.out = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    apply_config_line(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

bool has_synthetic_block(const ExperimentConfig& cfg) {
  return cfg.synthetic_n.has_value() || cfg.synthetic_horizon.has_value() ||
         cfg.synthetic_seed.has_value();
}

CurveDataset build_synthetic(const ExperimentConfig& cfg) {
  if (!cfg.synthetic_n || !cfg.synthetic_horizon || !cfg.synthetic_seed)
    throw ConfigError("synthetic data needs synthetic_n, synthetic_horizon, synthetic_seed");
  if (*cfg.synthetic_n < 1) throw ConfigError("synthetic_n must be >= 1");
  if (*cfg.synthetic_horizon < 1) throw ConfigError("synthetic_horizon must be >= 1");
  try {
    return generate_synthetic(int(*cfg.synthetic_n), *cfg.synthetic_horizon, cfg.synth,
                              *cfg.synthetic_seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

CurveDataset load_dataset(const ExperimentConfig& cfg) {
  bool has_file = cfg.curves_path.has_value();
  bool has_synth = has_synthetic_block(cfg);
  if (has_file == has_synth)
    throw ConfigError("exactly one of curves_path or the synthetic block must be given");
  if (has_file) {
    CurveFormat format = cfg.curves_format ? curve_format_from_name(*cfg.curves_format)
                                           : curve_format_from_path(*cfg.curves_path);
    return load_curves(*cfg.curves_path, format);
  }
  return build_synthetic(cfg);
}

SuccessSpec resolve_spec(const ExperimentConfig& cfg, const CurveDataset& dataset) {
  if (cfg.target.has_value() == cfg.target_percentile.has_value())
    throw ConfigError("exactly one of target or target_percentile must be given");
  if (cfg.target) return SuccessSpec{*cfg.target};
  if (*cfg.target_percentile <= 0.0 || *cfg.target_percentile > 100.0)
    throw ConfigError("target_percentile must be in (0, 100]");
  return SuccessSpec{final_value_percentile(dataset, *cfg.target_percentile)};
}

void write_text(const std::optional<std::string>& out, const std::string& text) {
  if (!out) {
    std::cout << text;
    return;
  }
  std::ofstream f(*out, std::ios::binary);
  if (!f) throw DataError(*out + ": cannot open for writing");
  f << text;
}

OnlineConfig online_config(const ExperimentConfig& cfg) {
  OnlineConfig oc;
  oc.k_set = cfg.k_set;
  oc.folds = cfg.folds;
  oc.min_count = cfg.min_count;
  oc.epsilon = cfg.epsilon;
  oc.refit_period = cfg.refit_period;
  oc.exploration_percentile = cfg.exploration_percentile;
  oc.fold_seed = cfg.fold_seed.value_or(0);
  return oc;
}

int cmd_gen(const ExperimentConfig& cfg) {
  if (!cfg.out) throw ConfigError("gen: --out is required");
  if (cfg.curves_path) throw ConfigError("gen: only the synthetic block applies");
  CurveDataset dataset = build_synthetic(cfg);
  if (std::filesystem::exists(*cfg.out) && !cfg.overwrite)
    throw DataError(*cfg.out + ": exists (pass --overwrite to replace)");
  save_curves_jsonl(dataset, *cfg.out);
  return kExitOk;
}

int cmd_fit(const ExperimentConfig& cfg) {
  if (!cfg.out) throw ConfigError("fit: --out is required for the policy file");
  if (cfg.k_set.size() != 1)
    throw ConfigError("fit: pass a single bucket count via --k-set (cv selects K)");
  if (cfg.epsilon <= 0.0) throw ConfigError("fit: epsilon must be > 0");
  if (cfg.min_count < 1) throw ConfigError("fit: min_count must be >= 1");

  CurveDataset dataset = load_dataset(cfg);
  SuccessSpec spec = resolve_spec(cfg, dataset);
  auto disc = QuantileDiscretizer::fit(dataset, spec, cfg.k_set.front(), cfg.min_count);
  auto runs = disc.discretize_all(dataset, spec);
  auto fit = find_stopping_rule(WeightedTrie::build(runs), cfg.epsilon);

  PolicyFile file;
  file.target = spec.target;
  file.discretizer = std::move(disc);
  file.rule = std::move(fit.rule);
  file.stats = fit.stats;
  file.iterations = fit.iterations;
  file.save(*cfg.out);

  nlohmann::ordered_json report;
  report["target"] = spec.target;
  report["k"] = cfg.k_set.front();
  report["stats"] = stats_to_json(fit.stats);
  report["iterations"] = fit.iterations;
  report["policy_file"] = *cfg.out;
  std::cout << report.dump() << '\n';
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  CurveDataset dataset = load_dataset(cfg);
  SuccessSpec spec = resolve_spec(cfg, dataset);
  std::vector<int> ts(size_t(dataset.horizon));
  for (int t = 1; t <= dataset.horizon; ++t) ts[size_t(t) - 1] = t;
  auto table = threshold_sweep(dataset, spec, ts);

  std::string csv = "t,expected_time\n";
  for (const auto& point : table) {
    csv += std::to_string(point.t);
    csv += ',';
    if (std::isinf(point.stats.expected_time)) {
      csv += "inf";
    } else {
      csv += nlohmann::json(point.stats.expected_time).dump();
    }
    csv += '\n';
  }
  write_text(cfg.out, csv);
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.policies.empty()) throw ConfigError("simulate: --policies is required");
  if (!cfg.master_seed) throw ConfigError("simulate: master_seed is required");
  if (cfg.trials < 1) throw ConfigError("simulate: trials must be >= 1");
  if (cfg.threads < 1) throw ConfigError("simulate: threads must be >= 1");
  for (const std::string& name : cfg.policies) {
    if (policy_needs_fold_seed(name) && !cfg.fold_seed)
      throw ConfigError("simulate: policy '" + name + "' needs fold_seed");
  }

  CurveDataset dataset = load_dataset(cfg);
  SuccessSpec spec = resolve_spec(cfg, dataset);
  double cap = cfg.cap.value_or(1000.0 * dataset.horizon);

  PolicyContext ctx{&dataset, spec, online_config(cfg)};
  // shared baseline for the improvement column, same seed as every policy
  SimResult random_result =
      simulate_time_to_success(make_policy_factory("random", ctx), dataset, spec, cfg.trials,
                               cap, *cfg.master_seed, cfg.threads);

  std::string lines;
  for (const std::string& name : cfg.policies) {
    PolicyFactory factory = make_policy_factory(name, ctx);
    SimResult r = (name == "random")
                      ? random_result
                      : simulate_time_to_success(factory, dataset, spec, cfg.trials, cap,
                                                 *cfg.master_seed, cfg.threads);
    nlohmann::ordered_json line;
    line["policy"] = name;
    line["target"] = spec.target;
    line["trials"] = r.trials;
    line["mean_time"] = json_number(r.mean_time);
    line["std_error"] = r.std_error;
    line["censored"] = r.censored;
    double improvement = random_result.mean_time / r.mean_time;
    line["improvement_over_random"] = json_number(improvement);
    lines += line.dump();
    lines += '\n';
  }
  write_text(cfg.out, lines);
  return kExitOk;
}

int cmd_cv(const ExperimentConfig& cfg) {
  if (!cfg.fold_seed) throw ConfigError("cv: fold_seed is required");
  if (cfg.folds < 2) throw ConfigError("cv: folds must be >= 2");
  if (cfg.epsilon <= 0.0) throw ConfigError("cv: epsilon must be > 0");
  if (cfg.min_count < 1) throw ConfigError("cv: min_count must be >= 1");

  CurveDataset dataset = load_dataset(cfg);
  if (cfg.folds > int(dataset.curves.size()))
    throw ConfigError("cv: more folds than curves");
  SuccessSpec spec = resolve_spec(cfg, dataset);

  auto sel = select_best_quantile_policy(dataset, spec, cfg.k_set, cfg.folds, cfg.min_count,
                                         cfg.epsilon, *cfg.fold_seed);
  double improvement = improvement_over_random(sel.estimate.low_variance, dataset, spec);

  nlohmann::ordered_json report;
  report["target"] = spec.target;
  auto per_k = nlohmann::ordered_json::object();
  for (const auto& [k, est] : sel.per_k) {
    nlohmann::ordered_json entry;
    entry["low_variance"] = json_number(est.low_variance);
    entry["naive"] = json_number(est.naive);
    auto folds = nlohmann::ordered_json::array();
    for (const auto& [q, c] : est.per_fold) folds.push_back({q, c});
    entry["folds"] = std::move(folds);
    per_k[std::to_string(k)] = std::move(entry);
  }
  report["per_K"] = std::move(per_k);
  report["K_best"] = sel.k_best;
  report["improvement_over_random"] = json_number(improvement);
  write_text(cfg.out, report.dump() + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-optimal early-stopping/restart policies for observation curves"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_path;
  std::optional<double> flag_target, flag_target_percentile, flag_epsilon;
  std::optional<long long> flag_trials;
  std::optional<uint64_t> flag_seed, flag_fold_seed;
  std::optional<std::string> flag_k_set, flag_policies, flag_out;
  std::optional<int> flag_min_count, flag_folds, flag_threads;
  bool flag_overwrite = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--target", flag_target, "absolute target accuracy");
    sub->add_option("--target-percentile", flag_target_percentile,
                    "target as a percentile of final values");
    sub->add_option("--trials", flag_trials, "simulation trials");
    sub->add_option("--seed", flag_seed, "master seed for simulation");
    sub->add_option("--fold-seed", flag_fold_seed, "seed for fold shuffling");
    sub->add_option("--epsilon", flag_epsilon, "bisection tolerance");
    sub->add_option("--k-set", flag_k_set, "bucket counts, e.g. 2,3,4");
    sub->add_option("--min-count", flag_min_count, "min runs per stored prefix");
    sub->add_option("--folds", flag_folds, "cross-validation folds");
    sub->add_option("--policies", flag_policies, "comma-separated policy names");
    sub->add_option("--threads", flag_threads, "simulation worker threads");
    sub->add_option("--out", flag_out, "output path");
    sub->add_flag("--overwrite", flag_overwrite, "replace an existing output file");
  };

  CLI::App* gen = app.add_subcommand("gen", "write a synthetic curve dataset");
  CLI::App* fit = app.add_subcommand("fit", "fit the near-optimal stopping rule");
  CLI::App* sweep = app.add_subcommand("sweep", "expected time per restart threshold");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo time-to-success");
  CLI::App* cv = app.add_subcommand("cv", "cross-validated quantile-policy selection");
  for (CLI::App* sub : {gen, fit, sweep, simulate, cv}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (flag_target) cfg.target = flag_target;
    if (flag_target_percentile) cfg.target_percentile = flag_target_percentile;
    if (flag_target) cfg.target_percentile.reset();
    if (flag_target_percentile && !flag_target) cfg.target.reset();
    if (flag_trials) cfg.trials = *flag_trials;
    if (flag_seed) cfg.master_seed = flag_seed;
    if (flag_fold_seed) cfg.fold_seed = flag_fold_seed;
    if (flag_epsilon) cfg.epsilon = *flag_epsilon;
    if (flag_k_set) cfg.k_set = parse_int_list("k_set", *flag_k_set);
    if (flag_min_count) cfg.min_count = *flag_min_count;
    if (flag_folds) cfg.folds = *flag_folds;
    if (flag_policies) cfg.policies = parse_string_list(*flag_policies);
    if (flag_threads) cfg.threads = *flag_threads;
    if (flag_out) cfg.out = flag_out;
    if (flag_overwrite) cfg.overwrite = true;

    if (gen->parsed()) return cmd_gen(cfg);
    if (fit->parsed()) return cmd_fit(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (cv->parsed()) return cmd_cv(cfg);
    throw ConfigError("no command given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SuccessUnreachable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnreachable;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

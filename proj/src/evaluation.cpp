#include "restop/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "restop/errors.hpp"
#include "restop/rng.hpp"

namespace restop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CurveDataset subset(const CurveDataset& dataset, const std::vector<int>& idx) {
  std::vector<Curve> curves;
  curves.reserve(idx.size());
  for (int i : idx) curves.push_back(dataset.curves[size_t(i)]);
  return CurveDataset::from_curves(std::move(curves));
}

}  // namespace

CvEstimate CvEstimate::from_folds(std::vector<std::pair<double, double>> per_fold) {
  CvEstimate est;
  est.per_fold = std::move(per_fold);
  double q_sum = 0.0, c_sum = 0.0, ratio_sum = 0.0;
  bool any_zero = false;
  for (const auto& [q, c] : est.per_fold) {
    q_sum += q;
    c_sum += c;
    if (q > 0.0)
      ratio_sum += c / q;
    else
      any_zero = true;
  }
  est.low_variance = q_sum > 0.0 ? c_sum / q_sum : kInf;
  est.naive = any_zero ? kInf : ratio_sum / double(est.per_fold.size());
  return est;
}

CvEstimate kfold_cv(const CurveDataset& dataset, const SuccessSpec& spec, int k, int folds,
                    int min_count, double epsilon, uint64_t fold_seed) {
  if (folds < 2) throw std::invalid_argument("kfold_cv: folds must be >= 2");
  int n = int(dataset.curves.size());
  if (folds > n) throw std::invalid_argument("kfold_cv: more folds than curves");

  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[size_t(i)] = i;
  RngStream rng(fold_seed, 0);
  rng.shuffle(order);

  // near-equal fold sizes, the first n % folds get one extra
  std::vector<std::vector<int>> fold_idx(static_cast<size_t>(folds));
  {
    int base = n / folds, extra = n % folds, at = 0;
    for (int f = 0; f < folds; ++f) {
      int size = base + (f < extra ? 1 : 0);
      for (int j = 0; j < size; ++j) fold_idx[size_t(f)].push_back(order[size_t(at++)]);
    }
  }

  std::vector<std::pair<double, double>> per_fold;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_idx, test_idx = fold_idx[size_t(f)];
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), fold_idx[size_t(g)].begin(), fold_idx[size_t(g)].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    CurveDataset train = subset(dataset, train_idx);
    CurveDataset test = subset(dataset, test_idx);
    auto disc = QuantileDiscretizer::fit(train, spec, k, min_count);
    auto train_runs = disc.discretize_all(train, spec);
    PolicyStats measured;
    try {
      auto fit = find_stopping_rule(WeightedTrie::build(train_runs), epsilon);
      auto test_runs = disc.discretize_all(test, spec);
      measured = evaluate_rule(fit.rule, test_runs);
    } catch (const SuccessUnreachable&) {
      // no success in this training fold: report q = 0 with the cost of the
      // never-stopping fallback on the held-out part
      PolicyStats fallback =
          evaluate_curve_rule(LengthCurveRule(dataset.horizon), test, spec);
      measured = PolicyStats::from_qc(0.0, fallback.c);
    }
    per_fold.emplace_back(measured.q, measured.c);
  }
  return CvEstimate::from_folds(std::move(per_fold));
}

QuantileSelection select_best_quantile_policy(const CurveDataset& dataset,
                                              const SuccessSpec& spec,
                                              const std::vector<int>& k_set, int folds,
                                              int min_count, double epsilon,
                                              uint64_t fold_seed) {
  if (k_set.empty()) throw std::invalid_argument("select_best_quantile_policy: empty K set");
  std::vector<int> ks = k_set;
  std::sort(ks.begin(), ks.end());

  QuantileSelection sel;
  sel.k_best = 0;
  double best = kInf;
  for (int k : ks) {
    CvEstimate est = kfold_cv(dataset, spec, k, folds, min_count, epsilon, fold_seed);
    if (sel.k_best == 0 || est.low_variance < best) {
      sel.k_best = k;
      best = est.low_variance;
      sel.estimate = est;
    }
    sel.per_k.emplace(k, std::move(est));
  }

  sel.discretizer = QuantileDiscretizer::fit(dataset, spec, sel.k_best, min_count);
  auto runs = sel.discretizer.discretize_all(dataset, spec);
  auto fit = find_stopping_rule(WeightedTrie::build(runs), epsilon);
  sel.rule = std::move(fit.rule);
  sel.stats = fit.stats;
  return sel;
}

double random_search_expected_time(const CurveDataset& dataset, const SuccessSpec& spec) {
  return exact_restart_expectation(LengthCurveRule::unbounded(), dataset, spec);
}

double improvement_over_random(double policy_expected_time, const CurveDataset& dataset,
                               const SuccessSpec& spec) {
  double random_time = random_search_expected_time(dataset, spec);
  if (random_time == kInf)
    throw SuccessUnreachable("success unreachable: random search never meets the target");
  return random_time / policy_expected_time;
}

OnlinePolicyBase::OnlinePolicyBase(OnlineConfig config) : config_(std::move(config)) {
  if (config_.refit_period < 1) throw std::invalid_argument("refit_period must be >= 1");
  if (config_.exploration_percentile <= 0.0 || config_.exploration_percentile > 100.0)
    throw std::invalid_argument("exploration_percentile must be in (0, 100]");
}

size_t OnlinePolicyBase::choose(const std::vector<RunState>& runs) {
  constexpr size_t kNone = size_t(-1);
  if (current_ != kNone) {
    const RunState& r = runs[current_];
    // exploitation slots behave as exploration until the first fit exists
    bool full_length = exploring_ || !fitted_;
    bool cont = true;
    if (!full_length) {
      cont = exploit_do_advance(r, processed_);
      processed_ = r.values.size();
    }
    if (cont && !r.exhausted) return current_;
    finalize_run(r);
  }
  exploring_ = explore_cost_ <= exploit_cost_;
  if (!exploring_ && fitted_) exploit_start();
  current_ = runs.size();
  return current_;
}

void OnlinePolicyBase::finalize_run(const RunState& run) {
  if (exploring_) {
    explore_cost_ += run.cost;
    if (run.exhausted) {  // only complete curves join the training pool
      Curve c;
      c.id = "explore-" + std::to_string(collected_.size());
      c.values.assign(run.values.begin(), run.values.end());
      collected_.push_back(std::move(c));
      if (int(collected_.size()) % config_.refit_period == 0) {
        refit(CurveDataset::from_curves(collected_));
        fitted_ = true;
      }
    }
  } else {
    exploit_cost_ += run.cost;
  }
  current_ = size_t(-1);
  processed_ = 0;
}

namespace {

class ExploreExploitPolicy : public OnlinePolicyBase {
 public:
  using OnlinePolicyBase::OnlinePolicyBase;

 protected:
  void refit(const CurveDataset& collected) override {
    double target =
        final_value_percentile(collected, config_.exploration_percentile);
    SuccessSpec spec{target};
    if (collected.curves.size() >= 2) {
      int folds = std::min<int>(config_.folds, int(collected.curves.size()));
      auto sel = select_best_quantile_policy(collected, spec, config_.k_set, folds,
                                             config_.min_count, config_.epsilon,
                                             config_.fold_seed);
      disc_ = std::make_shared<QuantileDiscretizer>(std::move(sel.discretizer));
      rule_ = std::make_shared<StoppingTree>(std::move(sel.rule));
    } else {
      // too little data to cross-validate; fit the smallest K directly
      int k = *std::min_element(config_.k_set.begin(), config_.k_set.end());
      auto disc = QuantileDiscretizer::fit(collected, spec, k, config_.min_count);
      auto fit = find_stopping_rule(WeightedTrie::build(disc.discretize_all(collected, spec)),
                                    config_.epsilon);
      disc_ = std::make_shared<QuantileDiscretizer>(std::move(disc));
      rule_ = std::make_shared<StoppingTree>(std::move(fit.rule));
    }
    walker_ = rule_->make_walker();
  }

  void exploit_start() override {
    walker_->reset();
    disc_node_ = 0;
    in_tree_ = true;
    winner_ = false;
  }

  bool exploit_do_advance(const RunState& run, size_t& processed) override {
    bool cont = true;
    while (processed < run.values.size() && cont) {
      double v = run.values[processed++];
      if (winner_) continue;
      if (v >= disc_->trained_target()) {
        winner_ = true;
        continue;
      }
      int b = disc_->bucket_for(disc_->node(disc_node_), v);
      if (in_tree_) {
        const auto& children = disc_->node(disc_node_).children;
        auto it = children.find(b);
        if (it != children.end())
          disc_node_ = it->second;
        else
          in_tree_ = false;
      }
      cont = walker_->advance(Token::bucket(b));
    }
    return cont;
  }

 private:
  std::shared_ptr<QuantileDiscretizer> disc_;
  std::shared_ptr<StoppingTree> rule_;
  std::unique_ptr<TokenRuleWalker> walker_;
  int disc_node_ = 0;
  bool in_tree_ = true;
  bool winner_ = false;
};

class AboveMedianOnlinePolicy : public OnlinePolicyBase {
 public:
  using OnlinePolicyBase::OnlinePolicyBase;

 protected:
  void refit(const CurveDataset& collected) override {
    medians_ = population_medians(collected);
  }

  void exploit_start() override {}

  bool exploit_do_advance(const RunState& run, size_t& processed) override {
    bool cont = true;
    while (processed < run.values.size() && cont) {
      double v = run.values[processed];
      if (processed < medians_.size() && v < medians_[processed]) cont = false;
      ++processed;
    }
    return cont;
  }

 private:
  std::vector<double> medians_;
};

}  // namespace

PolicyFactory explore_exploit_policy(const OnlineConfig& config) {
  return [config] { return std::make_unique<ExploreExploitPolicy>(config); };
}

PolicyFactory above_median_algorithm(const OnlineConfig& config) {
  return [config] { return std::make_unique<AboveMedianOnlinePolicy>(config); };
}

}  // namespace restop

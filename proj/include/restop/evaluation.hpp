#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "restop/curve.hpp"
#include "restop/curve_rules.hpp"
#include "restop/discretizer.hpp"
#include "restop/simulator.hpp"
#include "restop/stopping.hpp"

namespace restop {

// Two cross-validation estimators of restart expected time: the ratio of
// per-fold averages (low variance, finite whenever any fold succeeds) and
// the average of per-fold ratios (infinite as soon as one fold fails).
struct CvEstimate {
  double low_variance = 0.0;  // sum c_i / sum q_i
  double naive = 0.0;         // mean of c_i / q_i
  std::vector<std::pair<double, double>> per_fold;  // (q_i, c_i)

  static CvEstimate from_folds(std::vector<std::pair<double, double>> per_fold);
};

// Deterministic shuffle by fold_seed into near-equal folds; per fold, fit a
// discretizer and stopping rule on the rest and measure (q_i, c_i) on the
// discretized held-out part. A training fold with no successes falls back to
// the full-horizon rule for c_i and reports q_i = 0.
CvEstimate kfold_cv(const CurveDataset& dataset, const SuccessSpec& spec, int k, int folds,
                    int min_count, double epsilon, uint64_t fold_seed);

// Runs kfold_cv per bucket count, keeps the smallest low-variance estimate
// (ties to the smaller K), and refits on the full dataset at that K.
struct QuantileSelection {
  int k_best = 0;
  QuantileDiscretizer discretizer;
  StoppingTree rule;
  PolicyStats stats;  // of the refit rule, on the full training trie
  CvEstimate estimate;
  std::map<int, CvEstimate> per_k;
};
QuantileSelection select_best_quantile_policy(const CurveDataset& dataset,
                                              const SuccessSpec& spec,
                                              const std::vector<int>& k_set, int folds,
                                              int min_count, double epsilon,
                                              uint64_t fold_seed);

// Random-search expected time divided by the policy's; > 1 means faster than
// random search. Throws SuccessUnreachable when random search never succeeds.
double improvement_over_random(double policy_expected_time, const CurveDataset& dataset,
                               const SuccessSpec& spec);
double random_search_expected_time(const CurveDataset& dataset, const SuccessSpec& spec);

// Shared settings for the online (explore/exploit) policies.
struct OnlineConfig {
  std::vector<int> k_set{2, 3, 4};
  int folds = 5;
  int min_count = 4;
  double epsilon = 0.01;
  int refit_period = 8;               // exploration curves between refits
  double exploration_percentile = 90;  // internal target percentile
  uint64_t fold_seed = 0;
};

// Cost-balanced alternation between full-length exploration runs and runs
// exploited under the rule fitted so far: a new run explores when the
// cumulative exploration cost does not exceed the exploitation cost. Until
// the first refit the policy is indistinguishable from random search. Only
// exploration curves feed the refits; the internal target is a percentile of
// their final values.
class OnlinePolicyBase : public RunSwitchingPolicy {
 public:
  explicit OnlinePolicyBase(OnlineConfig config);
  size_t choose(const std::vector<RunState>& runs) override;

  double exploration_cost() const { return explore_cost_; }
  double exploitation_cost() const { return exploit_cost_; }

 protected:
  virtual void refit(const CurveDataset& collected) = 0;
  virtual void exploit_start() = 0;
  // Consume observations up to the run's current prefix; false = stop now.
  virtual bool exploit_do_advance(const RunState& run, size_t& processed) = 0;

  const OnlineConfig config_;
  bool fitted_ = false;

 private:
  void finalize_run(const RunState& run);

  std::vector<Curve> collected_;
  double explore_cost_ = 0.0;
  double exploit_cost_ = 0.0;
  size_t current_ = size_t(-1);
  size_t processed_ = 0;
  bool exploring_ = true;
};

PolicyFactory explore_exploit_policy(const OnlineConfig& config);

// Same shell, exploiting the above-median rule over the medians of the
// curves collected so far.
PolicyFactory above_median_algorithm(const OnlineConfig& config);

}  // namespace restop

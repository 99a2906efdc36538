#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "restop/curve.hpp"
#include "restop/curve_rules.hpp"
#include "restop/discretizer.hpp"
#include "restop/stopping.hpp"
#include "restop/token.hpp"

namespace restop {

// One in-flight run as a policy sees it: the observed value prefix, the cost
// paid so far, and whether the run already succeeded or ran out of curve.
struct RunState {
  std::span<const double> values;
  double cost = 0.0;
  bool succeeded = false;
  bool exhausted = false;
};

// Adaptive policy: given all runs so far, return the index of the run to
// advance; runs.size() means "sample a fresh seed". Choosing a succeeded or
// exhausted run is a contract violation.
class RunSwitchingPolicy {
 public:
  virtual ~RunSwitchingPolicy() = default;
  virtual size_t choose(const std::vector<RunState>& runs) = 0;
};

// One policy instance per trial; instances must not share mutable state.
using PolicyFactory = std::function<std::unique_ptr<RunSwitchingPolicy>()>;

struct SimResult {
  double mean_time = 0.0;  // over uncensored trials; +inf when none finished
  double std_error = 0.0;  // sample std of uncensored trials / sqrt(count)
  long long trials = 0;
  long long censored = 0;

  bool operator==(const SimResult&) const = default;
};

// Monte Carlo time-to-success: each trial runs a fresh policy instance,
// sampling curves uniformly with replacement from the stream
// (master_seed, trial). Trials whose cost reaches `cap` are censored.
// Output is bit-identical for identical inputs regardless of `threads`.
SimResult simulate_time_to_success(const PolicyFactory& factory, const CurveDataset& dataset,
                                   const SuccessSpec& spec, long long trials, double cap,
                                   uint64_t master_seed, int threads = 1);

// Expected time-to-success of the static restart policy of a rule: c/q on
// the empirical distribution, +inf when q = 0.
double exact_restart_expectation(const TokenRule& rule, std::span<const DiscretizedRun> runs,
                                 std::span<const double> weights = {});
double exact_restart_expectation(const CurveRule& rule, const CurveDataset& dataset,
                                 const SuccessSpec& spec);

// --- Restart-style adapters -------------------------------------------------

// Repeatedly runs a curve-space rule with fresh seeds.
class RestartCurvePolicy : public RunSwitchingPolicy {
 public:
  explicit RestartCurvePolicy(std::shared_ptr<const CurveRule> rule);
  size_t choose(const std::vector<RunState>& runs) override;

 private:
  std::shared_ptr<const CurveRule> rule_;
  size_t current_ = kNone;
  static constexpr size_t kNone = size_t(-1);
};

// Repeatedly runs a token-space rule with fresh seeds, discretizing the
// run-so-far on the fly. A run that reaches the rule's internal target is a
// declared winner and is ridden to the end of its curve; the simulator's
// external success condition is checked independently by the simulator.
class RestartTokenPolicy : public RunSwitchingPolicy {
 public:
  RestartTokenPolicy(std::shared_ptr<const QuantileDiscretizer> disc,
                     std::shared_ptr<const TokenRule> rule);
  size_t choose(const std::vector<RunState>& runs) override;

 private:
  void start_fresh();

  std::shared_ptr<const QuantileDiscretizer> disc_;
  std::shared_ptr<const TokenRule> rule_;
  std::unique_ptr<TokenRuleWalker> walker_;
  size_t current_ = kNone;
  size_t processed_ = 0;
  int disc_node_ = 0;
  bool in_tree_ = true;
  bool winner_ = false;
  static constexpr size_t kNone = size_t(-1);
};

// Non-adaptive restart schedule: the i-th run (1-based) is cut off after
// lengths(i) observations.
class SchedulePolicy : public RunSwitchingPolicy {
 public:
  using Schedule = std::function<long long(long long)>;
  explicit SchedulePolicy(Schedule lengths);
  size_t choose(const std::vector<RunState>& runs) override;

 private:
  Schedule lengths_;
  size_t current_ = kNone;
  long long run_index_ = 0;
  long long current_budget_ = 0;
  static constexpr size_t kNone = size_t(-1);
};

// Rung-based elimination over brackets, cycled forever: each bracket starts
// n fresh seeds, advances every survivor to the rung budget, and keeps the
// top ceil(m/eta) by current value (ties to the earlier seed).
class BracketedEliminationPolicy : public RunSwitchingPolicy {
 public:
  struct Bracket {
    int n = 1;
    std::vector<long long> budgets;  // nondecreasing, last = R
  };
  BracketedEliminationPolicy(std::vector<Bracket> brackets, int eta);
  size_t choose(const std::vector<RunState>& runs) override;

 private:
  void next_bracket();

  std::vector<Bracket> brackets_;
  int eta_;
  size_t bracket_idx_ = 0;
  std::vector<size_t> active_;  // global run indices, spawn order
  size_t pos_ = 0;
  size_t rung_ = 0;
  int spawned_ = 0;
};

}  // namespace restop

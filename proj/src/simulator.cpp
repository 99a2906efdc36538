#include "restop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "restop/rng.hpp"

namespace restop {
namespace {

struct Outcome {
  double time = 0.0;
  bool censored = false;
};

}  // namespace

SimResult simulate_time_to_success(const PolicyFactory& factory, const CurveDataset& dataset,
                                   const SuccessSpec& spec, long long trials, double cap,
                                   uint64_t master_seed, int threads) {
  if (trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  if (!(cap >= 1.0))
    throw std::invalid_argument("simulate: cap must cover at least one observation");
  if (dataset.curves.empty()) throw std::invalid_argument("simulate: empty dataset");

  std::vector<Outcome> outcomes(static_cast<size_t>(trials));

  auto run_trial = [&](long long trial) -> Outcome {
    RngStream rng(master_seed, uint64_t(trial));
    auto policy = factory();
    std::vector<RunState> states;
    std::vector<const Curve*> curves;
    std::vector<int> observed;
    double total = 0.0;
    while (true) {
      size_t pick = policy->choose(states);
      if (pick > states.size())
        throw std::logic_error("policy chose an out-of-range run index");
      if (pick == states.size()) {
        const Curve& c = dataset.curves[size_t(rng.bounded(dataset.curves.size()))];
        curves.push_back(&c);
        observed.push_back(0);
        states.push_back(RunState{std::span<const double>(c.values.data(), 0), 0.0, false, false});
      } else if (states[pick].succeeded || states[pick].exhausted) {
        throw std::logic_error("policy chose a finished run");
      }
      const Curve& c = *curves[pick];
      int t = ++observed[pick];
      double cost = c.cost_at(t);
      states[pick].cost += cost;
      total += cost;
      states[pick].values = std::span<const double>(c.values.data(), size_t(t));
      if (c.values[size_t(t) - 1] >= spec.target) {
        return Outcome{total, false};
      }
      if (t == c.length()) states[pick].exhausted = true;
      if (total >= cap) return Outcome{total, true};
    }
  };

  if (threads <= 1) {
    for (long long t = 0; t < trials; ++t) outcomes[size_t(t)] = run_trial(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (long long t = w; t < trials; t += threads) outcomes[size_t(t)] = run_trial(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Sequential reduction in trial order keeps the result independent of the
  // thread layout.
  long long finished = 0, censored = 0;
  double sum = 0.0;
  for (const Outcome& o : outcomes) {
    if (o.censored) {
      ++censored;
    } else {
      ++finished;
      sum += o.time;
    }
  }
  SimResult result;
  result.trials = trials;
  result.censored = censored;
  if (finished == 0) {
    result.mean_time = std::numeric_limits<double>::infinity();
    result.std_error = 0.0;
    return result;
  }
  result.mean_time = sum / double(finished);
  if (finished > 1) {
    double ss = 0.0;
    for (const Outcome& o : outcomes) {
      if (o.censored) continue;
      double d = o.time - result.mean_time;
      ss += d * d;
    }
    double var = ss / double(finished - 1);
    result.std_error = std::sqrt(var / double(finished));
  }
  return result;
}

double exact_restart_expectation(const TokenRule& rule, std::span<const DiscretizedRun> runs,
                                 std::span<const double> weights) {
  return evaluate_rule(rule, runs, weights).expected_time;
}

double exact_restart_expectation(const CurveRule& rule, const CurveDataset& dataset,
                                 const SuccessSpec& spec) {
  return evaluate_curve_rule(rule, dataset, spec).expected_time;
}

// --- RestartCurvePolicy -----------------------------------------------------

RestartCurvePolicy::RestartCurvePolicy(std::shared_ptr<const CurveRule> rule)
    : rule_(std::move(rule)) {}

size_t RestartCurvePolicy::choose(const std::vector<RunState>& runs) {
  if (current_ != kNone) {
    const RunState& r = runs[current_];
    if (!r.exhausted && rule_->continues(r.values)) return current_;
  }
  current_ = runs.size();
  return current_;
}

// --- RestartTokenPolicy -----------------------------------------------------

RestartTokenPolicy::RestartTokenPolicy(std::shared_ptr<const QuantileDiscretizer> disc,
                                       std::shared_ptr<const TokenRule> rule)
    : disc_(std::move(disc)), rule_(std::move(rule)), walker_(rule_->make_walker()) {}

void RestartTokenPolicy::start_fresh() {
  walker_->reset();
  processed_ = 0;
  disc_node_ = 0;
  in_tree_ = true;
  winner_ = false;
}

size_t RestartTokenPolicy::choose(const std::vector<RunState>& runs) {
  if (current_ != kNone) {
    const RunState& r = runs[current_];
    bool cont = true;
    while (processed_ < r.values.size() && cont) {
      double v = r.values[processed_++];
      if (winner_) continue;
      if (v >= disc_->trained_target()) {
        winner_ = true;  // internal success: ride this run out
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
    if (cont && !r.exhausted) return current_;
  }
  start_fresh();
  current_ = runs.size();
  return current_;
}

// --- SchedulePolicy ---------------------------------------------------------

SchedulePolicy::SchedulePolicy(Schedule lengths) : lengths_(std::move(lengths)) {}

size_t SchedulePolicy::choose(const std::vector<RunState>& runs) {
  if (current_ != kNone) {
    const RunState& r = runs[current_];
    if (!r.exhausted && (long long)r.values.size() < current_budget_) return current_;
  }
  ++run_index_;
  current_budget_ = lengths_(run_index_);
  if (current_budget_ < 1) throw std::logic_error("schedule produced a length < 1");
  current_ = runs.size();
  return current_;
}

// --- BracketedEliminationPolicy ----------------------------------------------

BracketedEliminationPolicy::BracketedEliminationPolicy(std::vector<Bracket> brackets, int eta)
    : brackets_(std::move(brackets)), eta_(eta) {
  if (brackets_.empty()) throw std::invalid_argument("bracket list must be non-empty");
  if (eta_ < 2) throw std::invalid_argument("eta must be >= 2");
}

void BracketedEliminationPolicy::next_bracket() {
  bracket_idx_ = (bracket_idx_ + 1) % brackets_.size();
  active_.clear();
  pos_ = 0;
  rung_ = 0;
  spawned_ = 0;
}

size_t BracketedEliminationPolicy::choose(const std::vector<RunState>& runs) {
  auto at_budget = [&](size_t run, long long budget) {
    return runs[run].exhausted || (long long)runs[run].values.size() >= budget;
  };
  while (true) {
    const Bracket& br = brackets_[bracket_idx_];
    if (spawned_ < br.n) {
      // fill: bring the last spawn to the first rung budget, then spawn next
      if (!active_.empty() && !at_budget(active_.back(), br.budgets.front()))
        return active_.back();
      active_.push_back(runs.size());
      ++spawned_;
      return runs.size();
    }
    while (pos_ < active_.size()) {
      size_t run = active_[pos_];
      if (!at_budget(run, br.budgets[rung_])) return run;
      ++pos_;
    }
    if (rung_ + 1 == br.budgets.size()) {
      next_bracket();
      continue;
    }
    // keep the top ceil(m/eta) by current value; ties to the earlier seed
    size_t keep = (active_.size() + size_t(eta_) - 1) / size_t(eta_);
    std::vector<size_t> order(active_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return runs[active_[a]].values.back() > runs[active_[b]].values.back();
    });
    std::vector<bool> survives(active_.size(), false);
    for (size_t i = 0; i < keep; ++i) survives[order[i]] = true;
    std::vector<size_t> next;
    for (size_t i = 0; i < active_.size(); ++i) {
      if (survives[i]) next.push_back(active_[i]);
    }
    active_ = std::move(next);
    ++rung_;
    pos_ = 0;
  }
}

}  // namespace restop

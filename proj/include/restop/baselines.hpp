#pragma once

#include <vector>

#include "restop/curve.hpp"
#include "restop/curve_rules.hpp"
#include "restop/simulator.hpp"
#include "restop/stopping.hpp"

namespace restop {

// i-th entry (1-based) of the universal restart schedule
// 1,1,2,1,1,2,4,1,...: 2^(k-1) at positions 2^k - 1, self-similar elsewhere.
long long luby_length(long long i);

// Successive-halving bracket parameters.
struct BracketSpec {
  int n = 1;         // initial config count
  int eta = 3;       // elimination factor, >= 2
  long long r = 1;   // maximum per-config budget in steps
};

// Rung budgets R * eta^(j - s_max), j = 0..s_max, clamped to >= 1.
std::vector<long long> sh_budgets(long long r, int eta);

// One bracket that starts fresh seeds after completion, forever.
PolicyFactory successive_halving(const BracketSpec& spec);

// Brackets s = s_max..0 with n_s = ceil((s_max+1)/(s+1) * eta^s) and initial
// per-config budget R * eta^(-s), cycled indefinitely.
PolicyFactory hyperband(long long r, int eta);
std::vector<BracketedEliminationPolicy::Bracket> hyperband_brackets(long long r, int eta);

// Exact expected time of the static restart policy with threshold t, per
// t in t_values, straight off the empirical distribution.
struct ThresholdPoint {
  int t = 0;
  PolicyStats stats;
};
std::vector<ThresholdPoint> threshold_sweep(const CurveDataset& dataset, const SuccessSpec& spec,
                                            const std::vector<int>& t_values);

// The t with the smallest expected time (ties to the smaller t).
ThresholdPoint best_threshold(const std::vector<ThresholdPoint>& table);

}  // namespace restop

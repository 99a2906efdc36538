#pragma once

// Shared fixtures and small independent oracles used across the test suites.

#include <string>
#include <vector>

#include "restop/curve.hpp"
#include "restop/rng.hpp"
#include "restop/synthetic.hpp"
#include "restop/token.hpp"

namespace restop::testing {

// The worked instance used throughout the suites: one run that succeeds
// immediately, one that runs three steps and fails; uniform mass, unit cost.
inline std::vector<DiscretizedRun> two_sequence_runs() {
  DiscretizedRun a;
  a.tokens = {Token::success()};
  a.costs = {1.0};
  a.source_id = "a";
  DiscretizedRun b;
  b.tokens = {Token::bucket(1), Token::bucket(1), Token::bucket(1)};
  b.costs = {1.0, 1.0, 1.0};
  b.source_id = "b";
  return {a, b};
}

// Raw-curve analog of the same instance (target 0.9).
inline CurveDataset two_sequence_dataset() {
  Curve a{"a", {0.95}, {}};
  Curve b{"b", {0.1, 0.1, 0.1}, {}};
  return CurveDataset::from_curves({a, b});
}

// Frozen strong-signal benchmark: early values predict the final plateau, so
// adaptive rules have real headroom at high targets.
inline CurveDataset benchmark_dataset() {
  return generate_synthetic(160, 40, SyntheticParams{}, 20240801);
}

constexpr double kBenchmarkPercentile = 90.0;

// Five length-4 curves with distinct values at every step; with K = 5 and
// min_count = 1 the discretization is lossless (every curve has a unique
// token path). Two curves reach the 0.9 target.
inline CurveDataset lossless_dataset() {
  std::vector<Curve> curves = {
      {"a", {0.30, 0.91, 0.93, 0.95}, {}},
      {"b", {0.25, 0.50, 0.70, 0.85}, {}},
      {"c", {0.20, 0.40, 0.60, 0.92}, {}},
      {"d", {0.15, 0.35, 0.45, 0.50}, {}},
      {"e", {0.10, 0.22, 0.33, 0.40}, {}},
  };
  return CurveDataset::from_curves(std::move(curves));
}

constexpr double kLosslessTarget = 0.9;

// Random discretized datasets for the oracle comparisons: up to `max_runs`
// runs of length <= max_len over K buckets, with at least one success and a
// trie small enough for exhaustive enumeration.
inline std::vector<DiscretizedRun> random_token_runs(RngStream& rng, int max_runs = 6,
                                                     int max_len = 5, int max_nodes = 20) {
  while (true) {
    int n_runs = 2 + int(rng.bounded(uint64_t(max_runs - 1)));
    int k = 2 + int(rng.bounded(2));  // buckets 1..2 or 1..3
    std::vector<DiscretizedRun> runs;
    bool any_success = false;
    for (int i = 0; i < n_runs; ++i) {
      DiscretizedRun run;
      run.source_id = "r" + std::to_string(i);
      int len = 1 + int(rng.bounded(uint64_t(max_len)));
      for (int t = 0; t < len; ++t) {
        bool succeed = rng.next_double() < 0.2;
        if (succeed) {
          run.tokens.push_back(Token::success());
          run.costs.push_back(1.0);
          any_success = true;
          break;
        }
        run.tokens.push_back(Token::bucket(1 + int(rng.bounded(uint64_t(k)))));
        run.costs.push_back(1.0);
      }
      runs.push_back(std::move(run));
    }
    if (!any_success) continue;
    // count distinct prefixes to honor the enumeration node budget
    std::vector<std::vector<int>> prefixes;
    for (const auto& run : runs) {
      std::vector<int> p;
      for (const Token& tok : run.tokens) {
        p.push_back(tok.code());
        prefixes.push_back(p);
      }
    }
    std::sort(prefixes.begin(), prefixes.end());
    prefixes.erase(std::unique(prefixes.begin(), prefixes.end()), prefixes.end());
    if (int(prefixes.size()) <= max_nodes) return runs;
  }
}

// Independent Luby oracle: the doubling construction
// seq_1 = [1]; seq_{k+1} = seq_k ++ seq_k ++ [2^k].
inline std::vector<long long> luby_reference(int count) {
  std::vector<long long> seq{1};
  long long power = 1;
  while (int(seq.size()) < count) {
    std::vector<long long> next = seq;
    next.insert(next.end(), seq.begin(), seq.end());
    power *= 2;
    next.push_back(power);
    seq = std::move(next);
  }
  seq.resize(size_t(count));
  return seq;
}

}  // namespace restop::testing

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace restop {

// One seed's observation sequence: an accuracy value per step t = 1..length,
// with an optional positive cost per step. Empty costs means unit costs.
struct Curve {
  std::string id;
  std::vector<double> values;
  std::vector<double> costs;

  int length() const { return int(values.size()); }

  double cost_at(int step) const {  // 1-based
    return costs.empty() ? 1.0 : costs[size_t(step) - 1];
  }

  double total_cost(int steps) const {
    if (costs.empty()) return double(steps);
    double sum = 0.0;
    for (int t = 1; t <= steps; ++t) sum += costs[size_t(t) - 1];
    return sum;
  }

  void validate() const;  // throws DataError on any invariant violation
};

struct SuccessSpec {
  double target = 0.0;
};

struct CurveDataset {
  std::vector<Curve> curves;
  int horizon = 0;  // max curve length; no policy may request a later step

  // Validates curves, checks id uniqueness, computes the horizon.
  static CurveDataset from_curves(std::vector<Curve> curves);
};

// Smallest 1-based step with value >= target, if any.
std::optional<int> success_time(const Curve& curve, const SuccessSpec& spec);

// Lower median of values at each step t = 1..horizon, taken over the curves
// with length >= t.
std::vector<double> population_medians(const CurveDataset& dataset);

// Nearest-rank percentile (pct in (0, 100]) over a sample.
double percentile_nearest_rank(std::vector<double> sample, double pct);

// Percentile of the final value of each curve; how percentile targets are
// resolved against a dataset.
double final_value_percentile(const CurveDataset& dataset, double pct);

}  // namespace restop

#include "restop/baselines.hpp"

#include <stdexcept>

namespace restop {

long long luby_length(long long i) {
  if (i < 1) throw std::invalid_argument("luby_length: index must be >= 1");
  // find k with 2^(k-1) <= i < 2^k
  long long pow = 1;  // 2^(k-1)
  while (2 * pow - 1 < i) pow *= 2;
  if (i == 2 * pow - 1) return pow;
  return luby_length(i - (pow - 1));
}

std::vector<long long> sh_budgets(long long r, int eta) {
  if (r < 1) throw std::invalid_argument("sh_budgets: R must be >= 1");
  if (eta < 2) throw std::invalid_argument("sh_budgets: eta must be >= 2");
  // s_max = floor(log_eta R)
  int s_max = 0;
  long long power = 1;
  while (power * eta <= r) {
    power *= eta;
    ++s_max;
  }
  std::vector<long long> budgets;
  long long divisor = power;  // eta^s_max
  for (int j = 0; j <= s_max; ++j) {
    budgets.push_back(std::max<long long>(1, r / divisor));
    divisor /= eta;
  }
  return budgets;
}

PolicyFactory successive_halving(const BracketSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("successive_halving: n must be >= 1");
  BracketedEliminationPolicy::Bracket bracket{spec.n, sh_budgets(spec.r, spec.eta)};
  int eta = spec.eta;
  return [bracket, eta] {
    return std::make_unique<BracketedEliminationPolicy>(
        std::vector<BracketedEliminationPolicy::Bracket>{bracket}, eta);
  };
}

std::vector<BracketedEliminationPolicy::Bracket> hyperband_brackets(long long r, int eta) {
  if (r < 1) throw std::invalid_argument("hyperband: R must be >= 1");
  if (eta < 2) throw std::invalid_argument("hyperband: eta must be >= 2");
  int s_max = 0;
  long long power = 1;
  while (power * eta <= r) {
    power *= eta;
    ++s_max;
  }
  std::vector<BracketedEliminationPolicy::Bracket> brackets;
  long long eta_s = power;  // eta^s
  for (int s = s_max; s >= 0; --s) {
    BracketedEliminationPolicy::Bracket b;
    // n_s = ceil((s_max + 1) * eta^s / (s + 1)), in integer arithmetic
    b.n = int(((long long)(s_max + 1) * eta_s + s) / (s + 1));
    long long divisor = eta_s;
    for (int i = 0; i <= s; ++i) {
      b.budgets.push_back(std::max<long long>(1, r / divisor));
      divisor /= eta;
    }
    brackets.push_back(std::move(b));
    eta_s /= eta;
  }
  return brackets;
}

PolicyFactory hyperband(long long r, int eta) {
  auto brackets = hyperband_brackets(r, eta);
  return [brackets, eta] {
    return std::make_unique<BracketedEliminationPolicy>(brackets, eta);
  };
}

std::vector<ThresholdPoint> threshold_sweep(const CurveDataset& dataset, const SuccessSpec& spec,
                                            const std::vector<int>& t_values) {
  std::vector<ThresholdPoint> table;
  table.reserve(t_values.size());
  for (int t : t_values) {
    if (t < 1 || t > dataset.horizon)
      throw std::invalid_argument("threshold_sweep: t outside 1..horizon");
    table.push_back(ThresholdPoint{t, evaluate_curve_rule(LengthCurveRule(t), dataset, spec)});
  }
  return table;
}

ThresholdPoint best_threshold(const std::vector<ThresholdPoint>& table) {
  if (table.empty()) throw std::invalid_argument("best_threshold: empty table");
  const ThresholdPoint* best = &table.front();
  for (const ThresholdPoint& p : table) {
    if (p.stats.expected_time < best->stats.expected_time) best = &p;
  }
  return *best;
}

}  // namespace restop

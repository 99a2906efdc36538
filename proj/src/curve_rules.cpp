#include "restop/curve_rules.hpp"

#include <stdexcept>

namespace restop {

AboveMedianRule::AboveMedianRule(std::vector<double> medians) : medians_(std::move(medians)) {
  if (medians_.empty()) throw std::invalid_argument("above_median_rule: empty medians");
}

bool AboveMedianRule::continues(std::span<const double> prefix) const {
  size_t t = prefix.size();
  if (t > medians_.size()) return true;
  return !(prefix.back() < medians_[t - 1]);
}

LengthCurveRule::LengthCurveRule(long long threshold) : threshold_(threshold) {
  if (threshold < 1) throw std::invalid_argument("fixed_threshold_rule: t must be >= 1");
}

PolicyStats evaluate_curve_rule(const CurveRule& rule, const CurveDataset& dataset,
                                const SuccessSpec& spec) {
  double q = 0.0, c = 0.0;
  double w = 1.0 / double(dataset.curves.size());
  for (const Curve& curve : dataset.curves) {
    double cost = 0.0;
    bool succeeded = false;
    for (int t = 1; t <= curve.length(); ++t) {
      cost += curve.cost_at(t);
      if (curve.values[size_t(t) - 1] >= spec.target) {
        succeeded = true;
        break;
      }
      if (!rule.continues(std::span<const double>(curve.values.data(), size_t(t)))) break;
    }
    if (succeeded) q += w;
    c += w * cost;
  }
  return PolicyStats::from_qc(q, c);
}

}  // namespace restop

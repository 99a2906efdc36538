#pragma once

#include <memory>
#include <span>
#include <vector>

#include "restop/curve.hpp"
#include "restop/stopping.hpp"

namespace restop {

// A stopping rule over raw (undiscretized) value prefixes. Success ends the
// run before the rule is consulted.
class CurveRule {
 public:
  virtual ~CurveRule() = default;
  // Decision after observing `prefix` (non-empty).
  virtual bool continues(std::span<const double> prefix) const = 0;
};

// Stop at step t when the value is strictly below the population median at
// t; equality continues. Steps beyond the median table continue.
class AboveMedianRule : public CurveRule {
 public:
  explicit AboveMedianRule(std::vector<double> medians);
  bool continues(std::span<const double> prefix) const override;
  const std::vector<double>& medians() const { return medians_; }

 private:
  std::vector<double> medians_;
};

// Continue while fewer than `threshold` observations, regardless of values.
class LengthCurveRule : public CurveRule {
 public:
  explicit LengthCurveRule(long long threshold);
  static LengthCurveRule unbounded() {
    return LengthCurveRule(std::numeric_limits<long long>::max());
  }
  bool continues(std::span<const double> prefix) const override {
    return (long long)prefix.size() < threshold_;
  }

 private:
  long long threshold_;
};

// Exact (q, c) of a curve rule played against every curve in the dataset,
// uniformly weighted.
PolicyStats evaluate_curve_rule(const CurveRule& rule, const CurveDataset& dataset,
                                const SuccessSpec& spec);

}  // namespace restop

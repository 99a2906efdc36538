#include "restop/curve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "restop/errors.hpp"

namespace restop {

void Curve::validate() const {
  if (values.empty()) throw DataError("curve '" + id + "': empty value sequence");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("curve '" + id + "': non-finite value");
  }
  if (!costs.empty()) {
    if (costs.size() != values.size())
      throw DataError("curve '" + id + "': costs length differs from values length");
    for (double c : costs) {
      if (!std::isfinite(c) || c <= 0.0)
        throw DataError("curve '" + id + "': cost must be a positive finite number");
    }
  }
}

CurveDataset CurveDataset::from_curves(std::vector<Curve> curves) {
  if (curves.empty()) throw DataError("dataset contains no curves");
  std::set<std::string> seen;
  int horizon = 0;
  for (const Curve& c : curves) {
    c.validate();
    if (!seen.insert(c.id).second) throw DataError("duplicate curve id '" + c.id + "'");
    horizon = std::max(horizon, c.length());
  }
  return CurveDataset{std::move(curves), horizon};
}

std::optional<int> success_time(const Curve& curve, const SuccessSpec& spec) {
  for (int t = 1; t <= curve.length(); ++t) {
    if (curve.values[size_t(t) - 1] >= spec.target) return t;
  }
  return std::nullopt;
}

std::vector<double> population_medians(const CurveDataset& dataset) {
  std::vector<double> medians(size_t(dataset.horizon));
  std::vector<double> column;
  for (int t = 1; t <= dataset.horizon; ++t) {
    column.clear();
    for (const Curve& c : dataset.curves) {
      if (c.length() >= t) column.push_back(c.values[size_t(t) - 1]);
    }
    std::sort(column.begin(), column.end());
    // lower median for even counts
    medians[size_t(t) - 1] = column[(column.size() - 1) / 2];
  }
  return medians;
}

double percentile_nearest_rank(std::vector<double> sample, double pct) {
  std::sort(sample.begin(), sample.end());
  size_t rank = size_t(std::ceil(pct / 100.0 * double(sample.size())));
  rank = std::clamp<size_t>(rank, 1, sample.size());
  return sample[rank - 1];
}

double final_value_percentile(const CurveDataset& dataset, double pct) {
  std::vector<double> finals;
  finals.reserve(dataset.curves.size());
  for (const Curve& c : dataset.curves) finals.push_back(c.values.back());
  return percentile_nearest_rank(std::move(finals), pct);
}

}  // namespace restop

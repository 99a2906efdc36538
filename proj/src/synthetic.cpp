#include "restop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "restop/rng.hpp"

namespace restop {

CurveDataset generate_synthetic(int n, int horizon, const SyntheticParams& params,
                                uint64_t master_seed) {
  if (n < 1) throw std::invalid_argument("generate_synthetic: n must be >= 1");
  if (horizon < 1) throw std::invalid_argument("generate_synthetic: horizon must be >= 1");
  if (params.a_max_min > params.a_max_max)
    throw std::invalid_argument("generate_synthetic: a_max bounds inverted");
  if (params.lambda_min > params.lambda_max)
    throw std::invalid_argument("generate_synthetic: lambda bounds inverted");
  if (params.lambda_min <= 0.0)
    throw std::invalid_argument("generate_synthetic: lambda must be positive");
  if (params.noise_sigma < 0.0)
    throw std::invalid_argument("generate_synthetic: noise_sigma must be >= 0");

  std::vector<Curve> curves;
  curves.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    RngStream rng(master_seed, uint64_t(i) + 1);
    double a_max = rng.uniform(params.a_max_min, params.a_max_max);
    double lambda = rng.uniform(params.lambda_min, params.lambda_max);
    Curve c;
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn-%06d", i);
    c.id = buf;
    c.values.reserve(size_t(horizon));
    for (int t = 1; t <= horizon; ++t) {
      double v = a_max * (1.0 - std::exp(-double(t) / lambda));
      if (params.noise_sigma > 0.0) v += params.noise_sigma * rng.normal();
      c.values.push_back(std::clamp(v, 0.0, 1.0));
    }
    curves.push_back(std::move(c));
  }
  return CurveDataset::from_curves(std::move(curves));
}

}  // namespace restop

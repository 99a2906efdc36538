#pragma once

#include <cstdint>

#include "restop/curve.hpp"

namespace restop {

// Saturating-exponential curve family: a_max * (1 - exp(-t / lambda)) plus
// Gaussian noise, clipped to [0, 1]. Per-curve (a_max, lambda) are drawn
// uniformly from the ranges below.
struct SyntheticParams {
  double a_max_min = 0.3;
  double a_max_max = 1.0;
  double lambda_min = 1.0;
  double lambda_max = 3.0;
  double noise_sigma = 0.01;
};

// Pure function of its arguments: identical inputs reproduce identical
// datasets bit-for-bit. Curve i draws from the stream (master_seed, i + 1).
CurveDataset generate_synthetic(int n, int horizon, const SyntheticParams& params,
                                uint64_t master_seed);

}  // namespace restop

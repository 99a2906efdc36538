#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace restop {

// Deterministic counter-based stream built on the splitmix64 finalizer.
// Streams are keyed by (master_seed, stream_id), so independent consumers
// (curves, simulation trials) draw from disjoint sequences no matter which
// order, or on which thread, they run.
class RngStream {
 public:
  RngStream(uint64_t master_seed, uint64_t stream_id)
      : state_(mix64(mix64(master_seed + kGamma) ^ (stream_id + kGamma))) {}

  uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased integer in [0, n); Lemire multiply-shift with rejection.
  uint64_t bounded(uint64_t n) {
    __uint128_t m = __uint128_t(next_u64()) * n;
    auto lo = uint64_t(m);
    if (lo < n) {
      uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = __uint128_t(next_u64()) * n;
        lo = uint64_t(m);
      }
    }
    return uint64_t(m >> 64);
  }

  // Standard normal, Box-Muller cosine branch.
  double normal() {
    double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static uint64_t mix64(uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  uint64_t state_;
};

}  // namespace restop

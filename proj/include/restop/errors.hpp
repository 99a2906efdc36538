#pragma once

#include <stdexcept>

namespace restop {

// Invalid or missing configuration (CLI flags, config files, policy names).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (curve files, policy files).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No run in the data ever meets the success condition; the ratio
// optimization would bisect forever, so it is rejected up front.
struct SuccessUnreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace restop

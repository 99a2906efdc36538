#pragma once

#include <string>

#include <json.hpp>

#include "restop/discretizer.hpp"
#include "restop/stopping.hpp"

namespace restop {

// On-disk form of a fitted policy: the discretizer that maps raw values to
// tokens, the stopping rule, and the training-data stats.
struct PolicyFile {
  double target = 0.0;
  QuantileDiscretizer discretizer;
  StoppingTree rule;
  PolicyStats stats;
  int iterations = 0;

  nlohmann::ordered_json to_json() const;
  static PolicyFile from_json(const nlohmann::json& j);

  void save(const std::string& path) const;
  static PolicyFile load(const std::string& path);
};

// Stats object shared by reports: expected_time may be "inf".
nlohmann::ordered_json stats_to_json(const PolicyStats& stats);
PolicyStats stats_from_json(const nlohmann::json& j);

// Doubles in reports: finite values stay numbers, infinities become "inf".
nlohmann::ordered_json json_number(double v);

}  // namespace restop

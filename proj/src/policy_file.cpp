#include "restop/policy_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "restop/errors.hpp"

namespace restop {

nlohmann::ordered_json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

nlohmann::ordered_json stats_to_json(const PolicyStats& stats) {
  nlohmann::ordered_json j;
  j["q"] = stats.q;
  j["c"] = stats.c;
  j["ratio"] = stats.ratio;
  j["expected_time"] = json_number(stats.expected_time);
  return j;
}

PolicyStats stats_from_json(const nlohmann::json& j) {
  return PolicyStats::from_qc(j.at("q").get<double>(), j.at("c").get<double>());
}

nlohmann::ordered_json PolicyFile::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "restop-policy-v1";
  j["target"] = target;
  j["discretizer"] = discretizer.to_json();
  j["rule"] = rule.to_json();
  j["stats"] = stats_to_json(stats);
  j["iterations"] = iterations;
  return j;
}

PolicyFile PolicyFile::from_json(const nlohmann::json& j) {
  PolicyFile f;
  try {
    if (j.at("format").get<std::string>() != "restop-policy-v1")
      throw DataError("unsupported policy file format");
    f.target = j.at("target").get<double>();
    f.discretizer = QuantileDiscretizer::from_json(j.at("discretizer"));
    f.rule = StoppingTree::from_json(j.at("rule"));
    f.stats = stats_from_json(j.at("stats"));
    f.iterations = j.at("iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed policy file: ") + e.what());
  }
  return f;
}

void PolicyFile::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << to_json().dump() << '\n';
}

PolicyFile PolicyFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace restop

#include "restop/registry.hpp"

#include <memory>
#include <sstream>
#include <vector>

#include "restop/errors.hpp"
#include "restop/policy_file.hpp"

namespace restop {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::stringstream ss(s);
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

long long parse_int(const std::string& name, const std::string& s) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("policy '" + name + "': bad integer '" + s + "'");
  }
}

}  // namespace

bool policy_needs_fold_seed(const std::string& name) {
  return name == "explore-exploit";
}

PolicyFactory make_policy_factory(const std::string& name, const PolicyContext& ctx) {
  auto parts = split(name, ':');
  const std::string& head = parts.front();

  if (head == "random" && parts.size() == 1) {
    return [] {
      return std::make_unique<RestartCurvePolicy>(
          std::make_shared<LengthCurveRule>(LengthCurveRule::unbounded()));
    };
  }

  if (head == "fixed") {
    if (parts.size() != 2) throw ConfigError("usage: fixed:<t>");
    long long t = parse_int(name, parts[1]);
    if (t < 1) throw ConfigError("policy 'fixed': t must be >= 1");
    return [t] {
      return std::make_unique<RestartCurvePolicy>(std::make_shared<LengthCurveRule>(t));
    };
  }

  if (head == "luby" && parts.size() == 1) {
    return [] { return std::make_unique<SchedulePolicy>(&luby_length); };
  }

  if (head == "above-median" && parts.size() == 1) {
    auto rule = std::make_shared<AboveMedianRule>(population_medians(*ctx.dataset));
    return [rule] { return std::make_unique<RestartCurvePolicy>(rule); };
  }

  if (head == "sh") {
    BracketSpec spec;
    spec.eta = 3;
    spec.r = ctx.dataset->horizon;
    if (parts.size() == 4) {
      spec.n = int(parse_int(name, parts[1]));
      spec.eta = int(parse_int(name, parts[2]));
      spec.r = parse_int(name, parts[3]);
    } else if (parts.size() == 1) {
      // default n = eta^(rung count - 1): geometric elimination down to 1
      int rungs = int(sh_budgets(spec.r, spec.eta).size());
      long long n = 1;
      for (int i = 1; i < rungs; ++i) n *= spec.eta;
      spec.n = int(n);
    } else {
      throw ConfigError("usage: sh:<n>:<eta>:<R>");
    }
    if (spec.n < 1 || spec.eta < 2 || spec.r < 1)
      throw ConfigError("policy 'sh': need n >= 1, eta >= 2, R >= 1");
    return successive_halving(spec);
  }

  if (head == "hyperband") {
    long long r = ctx.dataset->horizon;
    int eta = 3;
    if (parts.size() == 3) {
      r = parse_int(name, parts[1]);
      eta = int(parse_int(name, parts[2]));
    } else if (parts.size() != 1) {
      throw ConfigError("usage: hyperband:<R>:<eta>");
    }
    if (r < 1 || eta < 2) throw ConfigError("policy 'hyperband': need R >= 1, eta >= 2");
    return hyperband(r, eta);
  }

  if (head == "optimal") {
    if (parts.size() < 2) throw ConfigError("usage: optimal:<policy-file>");
    // the path may itself contain ':'; rejoin
    std::string path = name.substr(std::string("optimal:").size());
    PolicyFile file = PolicyFile::load(path);
    auto disc = std::make_shared<QuantileDiscretizer>(std::move(file.discretizer));
    auto rule = std::make_shared<StoppingTree>(std::move(file.rule));
    return [disc, rule] { return std::make_unique<RestartTokenPolicy>(disc, rule); };
  }

  if (head == "explore-exploit" && parts.size() == 1) {
    return explore_exploit_policy(ctx.online);
  }

  if (head == "above-median-online" && parts.size() == 1) {
    return above_median_algorithm(ctx.online);
  }

  throw ConfigError("unknown policy '" + name + "'");
}

}  // namespace restop

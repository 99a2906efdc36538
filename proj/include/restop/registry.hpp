#pragma once

#include <string>

#include "restop/baselines.hpp"
#include "restop/evaluation.hpp"
#include "restop/simulator.hpp"

namespace restop {

struct PolicyContext {
  const CurveDataset* dataset = nullptr;
  SuccessSpec spec;
  OnlineConfig online;
};

// Builds a policy factory from its CLI name:
//   random                     never-stop restart policy
//   fixed:<t>                  restart every t steps
//   luby                       universal restart schedule
//   above-median               stop below the dataset's per-step median
//   sh[:<n>:<eta>:<R>]         successive halving (defaults n=eta^s_max,
//                              eta=3, R=horizon)
//   hyperband[:<R>:<eta>]      bracket cycle (defaults R=horizon, eta=3)
//   optimal:<policy-file>      fitted rule from a policy file
//   explore-exploit            online quantile policy
//   above-median-online        online above-median policy
// Throws ConfigError for unknown names or bad parameters.
PolicyFactory make_policy_factory(const std::string& name, const PolicyContext& ctx);

// True for the policies that need a fold seed (the online ones).
bool policy_needs_fold_seed(const std::string& name);

}  // namespace restop

#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "restop/curve.hpp"
#include "restop/token.hpp"

namespace restop {

// Prefix tree of quantile cut points. At each stored prefix, the next-step
// value of a run is mapped to the bucket whose fit-time value range contains
// it; prefixes traversed by fewer than min_count training runs are pruned.
class QuantileDiscretizer {
 public:
  struct Node {
    std::vector<double> cuts;     // k-1 non-decreasing thresholds
    std::map<int, int> children;  // bucket -> node index
  };

  // Recursive quantile partition of the training curves. Runs that reach a
  // node and succeed at the next step leave the pool before ranking; ties in
  // the ranking break by ascending curve id.
  static QuantileDiscretizer fit(const CurveDataset& dataset, const SuccessSpec& spec,
                                 int k, int min_count);

  // Walks the curve: success token at the first step with value >= target,
  // otherwise the bucket chosen by the current node's cut points. Once the
  // walked prefix leaves the stored tree, the deepest stored ancestor's cut
  // points serve for all remaining steps. Requires spec == trained target.
  DiscretizedRun discretize(const Curve& curve, const SuccessSpec& spec) const;

  std::vector<DiscretizedRun> discretize_all(const CurveDataset& dataset,
                                             const SuccessSpec& spec) const;

  int k() const { return k_; }
  int min_count() const { return min_count_; }
  double trained_target() const { return target_; }
  size_t node_count() const { return nodes_.size(); }
  bool has_prefix(const std::vector<Token>& prefix) const;
  const Node& node(int idx) const { return nodes_[size_t(idx)]; }

  // Bucket for a value under a node's cut points: first j with
  // value <= cuts[j] gives bucket j+1, else bucket k.
  int bucket_for(const Node& node, double value) const;

  nlohmann::ordered_json to_json() const;
  static QuantileDiscretizer from_json(const nlohmann::json& j);

  // Trivial discretizer: one bucket, root only.
  QuantileDiscretizer() : nodes_(1) {}

 private:
  int k_ = 1;
  int min_count_ = 1;
  double target_ = 0.0;
  std::vector<Node> nodes_;  // nodes_[0] is the root (empty prefix)
};

}  // namespace restop

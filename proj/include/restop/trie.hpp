#pragma once

#include <span>
#include <utility>
#include <vector>

#include "restop/token.hpp"

namespace restop {

struct TrieNode {
  Token label;
  double mass = 0.0;       // total weight of runs whose prefix reaches here
  double step_cost = 0.0;  // expected cost of this observation given reached
  double end_mass = 0.0;   // weight of runs ending exactly here
  bool is_success = false;
  int parent = -1;
  std::vector<std::pair<Token, int>> children;  // sorted by token code
};

// Prefix tree over discretized runs; node 0 is the unlabeled root with mass
// equal to the total weight. Success nodes are leaves.
class WeightedTrie {
 public:
  // weights default to uniform 1/k; when given they must be positive and sum
  // to 1 within 1e-9.
  static WeightedTrie build(std::span<const DiscretizedRun> runs,
                            std::span<const double> weights = {});

  const TrieNode& node(int idx) const { return nodes_[size_t(idx)]; }
  TrieNode& node_mut(int idx) { return nodes_[size_t(idx)]; }
  int size() const { return int(nodes_.size()); }
  static constexpr int root() { return 0; }

  double total_success_mass() const { return total_success_mass_; }
  int run_count() const { return run_count_; }
  double min_step_cost() const { return min_step_cost_; }

  // Token path from the root to a node.
  std::vector<Token> prefix_of(int idx) const;

 private:
  std::vector<TrieNode> nodes_;
  double total_success_mass_ = 0.0;
  int run_count_ = 0;
  double min_step_cost_ = 1.0;
};

}  // namespace restop

#include "restop/trie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace restop {

WeightedTrie WeightedTrie::build(std::span<const DiscretizedRun> runs,
                                 std::span<const double> weights) {
  if (runs.empty()) throw std::invalid_argument("build_trie: empty run list");
  std::vector<double> uniform;
  if (weights.empty()) {
    uniform.assign(runs.size(), 1.0 / double(runs.size()));
    weights = uniform;
  }
  if (weights.size() != runs.size())
    throw std::invalid_argument("build_trie: weights length differs from runs");
  double sum = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw std::invalid_argument("build_trie: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("build_trie: weights must sum to 1");

  WeightedTrie trie;
  trie.run_count_ = int(runs.size());
  trie.nodes_.emplace_back();  // root
  std::vector<double> cost_sum{0.0};

  for (size_t i = 0; i < runs.size(); ++i) {
    const DiscretizedRun& run = runs[i];
    if (run.tokens.empty()) throw std::invalid_argument("build_trie: run with no tokens");
    double w = weights[i];
    trie.nodes_[0].mass += w;
    int node = 0;
    for (size_t t = 0; t < run.tokens.size(); ++t) {
      Token tok = run.tokens[t];
      int child = -1;
      for (const auto& [label, idx] : trie.nodes_[size_t(node)].children) {
        if (label == tok) {
          child = idx;
          break;
        }
      }
      if (child < 0) {
        child = int(trie.nodes_.size());
        TrieNode fresh;
        fresh.label = tok;
        fresh.is_success = tok.is_success();
        fresh.parent = node;
        trie.nodes_.push_back(std::move(fresh));  // may reallocate: re-fetch below
        cost_sum.push_back(0.0);
        auto& children = trie.nodes_[size_t(node)].children;
        children.emplace_back(tok, child);
        std::sort(children.begin(), children.end(),
                  [](const auto& a, const auto& b) { return a.first.code() < b.first.code(); });
      } else if (trie.nodes_[size_t(child)].is_success && t + 1 != run.tokens.size()) {
        throw std::invalid_argument("build_trie: token after success");
      }
      trie.nodes_[size_t(child)].mass += w;
      cost_sum[size_t(child)] += w * run.costs[t];
      node = child;
    }
    trie.nodes_[size_t(node)].end_mass += w;
    if (run.tokens.back().is_success()) trie.total_success_mass_ += w;
  }

  trie.min_step_cost_ = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < trie.nodes_.size(); ++i) {
    trie.nodes_[i].step_cost = cost_sum[i] / trie.nodes_[i].mass;
    trie.min_step_cost_ = std::min(trie.min_step_cost_, trie.nodes_[i].step_cost);
  }
  return trie;
}

std::vector<Token> WeightedTrie::prefix_of(int idx) const {
  std::vector<Token> prefix;
  for (int n = idx; n != root(); n = nodes_[size_t(n)].parent)
    prefix.push_back(nodes_[size_t(n)].label);
  std::reverse(prefix.begin(), prefix.end());
  return prefix;
}

}  // namespace restop

#pragma once

#include <limits>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "restop/token.hpp"
#include "restop/trie.hpp"

namespace restop {

// Per-run success probability and expected cost of a stopping rule, plus the
// derived benefit/cost ratio and restart expectation.
struct PolicyStats {
  double q = 0.0;
  double c = 0.0;
  double ratio = 0.0;          // q / c
  double expected_time = 0.0;  // c / q, +inf when q = 0

  static PolicyStats from_qc(double q, double c) {
    PolicyStats s;
    s.q = q;
    s.c = c;
    s.ratio = c > 0.0 ? q / c : 0.0;
    s.expected_time = q > 0.0 ? c / q : std::numeric_limits<double>::infinity();
    return s;
  }
};

// Incremental continue/stop decisions along one run's token sequence.
class TokenRuleWalker {
 public:
  virtual ~TokenRuleWalker() = default;
  virtual void reset() = 0;
  // Feed the next non-success token; returns whether the rule continues
  // after the prefix ending at this token.
  virtual bool advance(Token tok) = 0;
};

// A deterministic stopping rule over token sequences. Every rule makes at
// least one observation per run (the empty prefix always continues).
class TokenRule {
 public:
  virtual ~TokenRule() = default;
  virtual std::unique_ptr<TokenRuleWalker> make_walker() const = 0;

  // Decision after observing `prefix` (no success tokens inside).
  bool continues(std::span<const Token> prefix) const;
};

// Prefix-closed continue set, the tree form of a stopping rule. Prefixes
// that leave the set but were seen in training stop definitively; prefixes
// never seen in training fall back to unseen_action.
class StoppingTree : public TokenRule {
 public:
  enum class UnseenAction { kStop, kContinue };

  struct Node {
    std::vector<std::pair<Token, int>> cont;  // children inside the continue set
    std::vector<Token> stop;                  // trained children where the rule stops
  };

  StoppingTree() { nodes_.emplace_back(); }

  std::unique_ptr<TokenRuleWalker> make_walker() const override;

  UnseenAction unseen_action() const { return action_; }
  void set_unseen_action(UnseenAction a) { action_ = a; }

  int node_count() const { return int(nodes_.size()); }
  const Node& node(int idx) const { return nodes_[size_t(idx)]; }

  // Grows the continue set; parent prefix must already be a member.
  int add_continue(int parent, Token tok);
  void add_stop(int parent, Token tok);

  // All member prefixes, sorted by (length, lex); includes the empty prefix.
  std::vector<std::vector<Token>> continue_prefixes() const;

  // {"unseen_action": ..., "continue_prefixes": [[bucket,...],...]}
  nlohmann::ordered_json to_json() const;
  static StoppingTree from_json(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;
  UnseenAction action_ = UnseenAction::kStop;
};

// Label-oblivious rule: continue while fewer than `threshold` observations.
class FixedThresholdRule : public TokenRule {
 public:
  explicit FixedThresholdRule(long long threshold);
  static FixedThresholdRule unbounded() {
    return FixedThresholdRule(std::numeric_limits<long long>::max());
  }
  long long threshold() const { return threshold_; }
  std::unique_ptr<TokenRuleWalker> make_walker() const override;

 private:
  long long threshold_;
};

// Maximum over stopping rules of q - r*c, realized by a max-weight subtree
// sweep over the trie; linear in node count. Ties at exactly zero stop.
struct DeltaResult {
  double value = 0.0;
  StoppingTree maximizer;
};
DeltaResult delta(const WeightedTrie& trie, double r);

// Exact (q, c) of a rule measured on the trie itself.
PolicyStats stats_on_trie(const WeightedTrie& trie, const StoppingTree& rule);

// Plays each run against the rule; works for runs outside the training trie
// (held-out evaluation). Weights default to uniform.
PolicyStats evaluate_rule(const TokenRule& rule, std::span<const DiscretizedRun> runs,
                          std::span<const double> weights = {});

// Bisection for the best ratio rule; requires positive success mass.
struct FitResult {
  StoppingTree rule;
  PolicyStats stats;
  int iterations = 0;
};
FitResult find_stopping_rule(const WeightedTrie& trie, double epsilon);

// Exhaustive maximizer of q/c over all prefix-closed continue sets; the
// oracle the bisection is checked against. Evaluates candidates by direct
// playout, not through the delta sweep.
struct BruteForceResult {
  double r_star = 0.0;
  StoppingTree tree;
  PolicyStats stats;
};
BruteForceResult brute_force_optimal(std::span<const DiscretizedRun> runs,
                                     std::span<const double> weights = {},
                                     int node_limit = 20);

}  // namespace restop

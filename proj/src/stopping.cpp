#include "restop/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "restop/errors.hpp"

namespace restop {
namespace {

// Keeps a child list sorted by token code so serialization is stable.
template <typename Vec, typename Entry>
void insert_sorted(Vec& v, Entry e, int code) {
  auto it = std::lower_bound(v.begin(), v.end(), code, [](const auto& a, int c) {
    if constexpr (std::is_same_v<std::decay_t<decltype(a)>, Token>)
      return a.code() < c;
    else
      return a.first.code() < c;
  });
  v.insert(it, std::move(e));
}

class TreeWalker : public TokenRuleWalker {
 public:
  explicit TreeWalker(const StoppingTree* tree) : tree_(tree) {}

  void reset() override {
    node_ = 0;
    off_tree_ = false;
  }

  bool advance(Token tok) override {
    if (tok.is_success()) return false;  // runs end at success before any decision
    if (off_tree_) return tree_->unseen_action() == StoppingTree::UnseenAction::kContinue;
    const StoppingTree::Node& nd = tree_->node(node_);
    for (const auto& [t, child] : nd.cont) {
      if (t == tok) {
        node_ = child;
        return true;
      }
    }
    for (const Token& t : nd.stop) {
      if (t == tok) return false;  // trained prefix, definitive stop
    }
    off_tree_ = true;
    return tree_->unseen_action() == StoppingTree::UnseenAction::kContinue;
  }

 private:
  const StoppingTree* tree_;
  int node_ = 0;
  bool off_tree_ = false;
};

class ThresholdWalker : public TokenRuleWalker {
 public:
  explicit ThresholdWalker(long long threshold) : threshold_(threshold) {}
  void reset() override { seen_ = 0; }
  bool advance(Token) override { return ++seen_ < threshold_; }

 private:
  long long threshold_;
  long long seen_ = 0;
};

}  // namespace

bool TokenRule::continues(std::span<const Token> prefix) const {
  auto walker = make_walker();
  bool cont = true;  // the empty prefix always continues
  for (const Token& tok : prefix) cont = walker->advance(tok);
  return cont;
}

std::unique_ptr<TokenRuleWalker> StoppingTree::make_walker() const {
  return std::make_unique<TreeWalker>(this);
}

int StoppingTree::add_continue(int parent, Token tok) {
  int idx = int(nodes_.size());
  nodes_.emplace_back();
  insert_sorted(nodes_[size_t(parent)].cont, std::make_pair(tok, idx), tok.code());
  return idx;
}

void StoppingTree::add_stop(int parent, Token tok) {
  insert_sorted(nodes_[size_t(parent)].stop, tok, tok.code());
}

std::vector<std::vector<Token>> StoppingTree::continue_prefixes() const {
  std::vector<std::vector<Token>> out;
  struct Item {
    int node;
    std::vector<Token> prefix;
  };
  std::vector<Item> stack{{0, {}}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    out.push_back(item.prefix);
    for (const auto& [tok, child] : nodes_[size_t(item.node)].cont) {
      std::vector<Token> p = item.prefix;
      p.push_back(tok);
      stack.push_back(Item{child, std::move(p)});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].code() != b[i].code()) return a[i].code() < b[i].code();
    }
    return false;
  });
  return out;
}

nlohmann::ordered_json StoppingTree::to_json() const {
  nlohmann::ordered_json j;
  j["unseen_action"] =
      action_ == UnseenAction::kStop ? "stop" : "continue-as-deepest-ancestor";
  auto prefixes = nlohmann::ordered_json::array();
  for (const auto& prefix : continue_prefixes()) {
    auto arr = nlohmann::ordered_json::array();
    for (const Token& tok : prefix) {
      if (tok.is_success())
        arr.push_back("S");
      else
        arr.push_back(tok.bucket_index());
    }
    prefixes.push_back(std::move(arr));
  }
  j["continue_prefixes"] = std::move(prefixes);
  return j;
}

StoppingTree StoppingTree::from_json(const nlohmann::json& j) {
  StoppingTree tree;
  try {
    std::string action = j.at("unseen_action").get<std::string>();
    if (action == "stop") {
      tree.set_unseen_action(UnseenAction::kStop);
    } else if (action == "continue-as-deepest-ancestor") {
      tree.set_unseen_action(UnseenAction::kContinue);
    } else {
      throw DataError("unknown unseen_action '" + action + "'");
    }
    std::vector<std::vector<int>> prefixes;
    for (const auto& p : j.at("continue_prefixes")) {
      std::vector<int> prefix;
      for (const auto& tok : p) {
        if (tok.is_string()) throw DataError("success token inside a continue prefix");
        int b = tok.get<int>();
        if (b < 1) throw DataError("bucket token must be >= 1");
        prefix.push_back(b);
      }
      prefixes.push_back(std::move(prefix));
    }
    std::sort(prefixes.begin(), prefixes.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
    if (prefixes.empty() || !prefixes.front().empty())
      throw DataError("continue_prefixes must contain the empty prefix");
    for (size_t i = 1; i < prefixes.size(); ++i) {
      const auto& prefix = prefixes[i];
      int node = 0;
      for (size_t d = 0; d + 1 < prefix.size(); ++d) {
        const auto& cont = tree.nodes_[size_t(node)].cont;
        auto it = std::find_if(cont.begin(), cont.end(), [&](const auto& e) {
          return e.first.code() == prefix[d];
        });
        if (it == cont.end()) throw DataError("continue_prefixes is not prefix-closed");
        node = it->second;
      }
      tree.add_continue(node, Token::bucket(prefix.back()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed stopping rule: ") + e.what());
  }
  return tree;
}

FixedThresholdRule::FixedThresholdRule(long long threshold) : threshold_(threshold) {
  if (threshold < 1) throw std::invalid_argument("fixed_threshold_rule: t must be >= 1");
}

std::unique_ptr<TokenRuleWalker> FixedThresholdRule::make_walker() const {
  return std::make_unique<ThresholdWalker>(threshold_);
}

DeltaResult delta(const WeightedTrie& trie, double r) {
  if (r < 0.0) throw std::invalid_argument("delta: r must be >= 0");
  int n = trie.size();
  std::vector<double> child_sum(size_t(n), 0.0);
  // children always carry larger indices than their parent
  for (int i = n - 1; i >= 1; --i) {
    const TrieNode& v = trie.node(i);
    double w = v.mass * ((v.is_success ? 1.0 : 0.0) - r * v.step_cost);
    double f = v.is_success ? w : w + std::max(0.0, child_sum[size_t(i)]);
    child_sum[size_t(v.parent)] += f;
  }

  DeltaResult res;
  res.value = child_sum[0];
  struct Item {
    int trie_node;
    int rule_node;
  };
  std::vector<Item> stack{{WeightedTrie::root(), 0}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    for (const auto& [tok, ci] : trie.node(item.trie_node).children) {
      if (trie.node(ci).is_success) continue;
      if (child_sum[size_t(ci)] > 0.0) {
        int rc = res.maximizer.add_continue(item.rule_node, tok);
        stack.push_back(Item{ci, rc});
      } else {
        res.maximizer.add_stop(item.rule_node, tok);
      }
    }
  }
  return res;
}

PolicyStats stats_on_trie(const WeightedTrie& trie, const StoppingTree& rule) {
  double q = 0.0, c = 0.0;
  struct Item {
    int trie_node;
    int rule_node;
  };
  std::vector<Item> stack{{WeightedTrie::root(), 0}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    for (const auto& [tok, ci] : trie.node(item.trie_node).children) {
      const TrieNode& child = trie.node(ci);
      c += child.mass * child.step_cost;
      if (child.is_success) {
        q += child.mass;
        continue;
      }
      Token label = tok;
      const auto& cont = rule.node(item.rule_node).cont;
      auto it = std::find_if(cont.begin(), cont.end(),
                             [&](const auto& e) { return e.first == label; });
      if (it != cont.end()) stack.push_back(Item{ci, it->second});
    }
  }
  return PolicyStats::from_qc(q, c);
}

PolicyStats evaluate_rule(const TokenRule& rule, std::span<const DiscretizedRun> runs,
                          std::span<const double> weights) {
  if (runs.empty()) throw std::invalid_argument("evaluate_rule: empty run list");
  std::vector<double> uniform;
  if (weights.empty()) {
    uniform.assign(runs.size(), 1.0 / double(runs.size()));
    weights = uniform;
  }
  double q = 0.0, c = 0.0;
  auto walker = rule.make_walker();
  for (size_t i = 0; i < runs.size(); ++i) {
    const DiscretizedRun& run = runs[i];
    walker->reset();
    double cost = 0.0;
    bool succeeded = false;
    for (size_t t = 0; t < run.tokens.size(); ++t) {
      cost += run.costs[t];
      if (run.tokens[t].is_success()) {
        succeeded = true;
        break;
      }
      if (!walker->advance(run.tokens[t])) break;
    }
    if (succeeded) q += weights[i];
    c += weights[i] * cost;
  }
  return PolicyStats::from_qc(q, c);
}

FitResult find_stopping_rule(const WeightedTrie& trie, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("find_stopping_rule: epsilon must be > 0");
  if (trie.total_success_mass() <= 0.0)
    throw SuccessUnreachable("success unreachable: no run in the data reaches the target");

  // All rules pay at least one observation, so r* <= 1 / min step cost.
  double upper = 1.0 / trie.min_step_cost();
  double lower = 0.0;
  int iterations = 0;
  while (upper > (1.0 + epsilon) * lower) {
    if (++iterations > 4096)
      throw std::logic_error("find_stopping_rule: bisection failed to converge");
    double r = 0.5 * (upper + lower);
    if (delta(trie, r).value > 0.0)
      lower = r;
    else
      upper = r;
  }

  DeltaResult best = delta(trie, lower);
  PolicyStats stats = stats_on_trie(trie, best.maximizer);
  return FitResult{std::move(best.maximizer), stats, iterations};
}

namespace {

// Prefix tree over the non-success prefixes of a run collection, in
// pre-order; the candidate space for brute-force enumeration.
struct BfTree {
  struct Node {
    int parent = -1;
    Token tok;
    std::map<int, int> children;  // bucket -> node
  };
  std::vector<Node> nodes;       // build order
  std::vector<int> order;        // pre-order listing of node ids
  std::vector<int> order_pos;    // node id -> position in `order`
  std::vector<int> subtree_len;  // in pre-order positions
};

struct BfRun {
  std::vector<int> decision_pos;  // pre-order positions after each bucket token
  bool succeeds = false;          // final token is success
  std::vector<double> costs;
  double weight = 0.0;
};

}  // namespace

BruteForceResult brute_force_optimal(std::span<const DiscretizedRun> runs,
                                     std::span<const double> weights, int node_limit) {
  if (runs.empty()) throw std::invalid_argument("brute_force_optimal: empty run list");
  std::vector<double> uniform;
  if (weights.empty()) {
    uniform.assign(runs.size(), 1.0 / double(runs.size()));
    weights = uniform;
  }

  BfTree tree;
  tree.nodes.emplace_back();  // root
  std::vector<BfRun> encoded;
  int success_prefixes = 0;
  std::vector<bool> has_success_child{false};

  for (size_t i = 0; i < runs.size(); ++i) {
    const DiscretizedRun& run = runs[i];
    BfRun enc;
    enc.costs = run.costs;
    enc.weight = weights[i];
    int node = 0;
    for (size_t t = 0; t < run.tokens.size(); ++t) {
      Token tok = run.tokens[t];
      if (tok.is_success()) {
        if (t + 1 != run.tokens.size())
          throw std::invalid_argument("brute_force_optimal: token after success");
        enc.succeeds = true;
        if (!has_success_child[size_t(node)]) {
          has_success_child[size_t(node)] = true;
          ++success_prefixes;
        }
        break;
      }
      auto it = tree.nodes[size_t(node)].children.find(tok.bucket_index());
      int child;
      if (it == tree.nodes[size_t(node)].children.end()) {
        child = int(tree.nodes.size());
        BfTree::Node fresh;
        fresh.parent = node;
        fresh.tok = tok;
        tree.nodes.push_back(fresh);
        has_success_child.push_back(false);
        tree.nodes[size_t(node)].children.emplace(tok.bucket_index(), child);
      } else {
        child = it->second;
      }
      node = child;
      enc.decision_pos.push_back(child);  // rewritten to pre-order below
    }
    encoded.push_back(std::move(enc));
  }

  int internal_nodes = int(tree.nodes.size()) - 1;  // excluding the root
  if (internal_nodes + success_prefixes > node_limit)
    throw std::invalid_argument("brute_force_optimal: trie exceeds the node limit");

  // Pre-order with subtree extents so exclusion can skip whole subtrees.
  tree.order_pos.assign(tree.nodes.size(), -1);
  {
    std::vector<int> stack{0};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      tree.order_pos[size_t(v)] = int(tree.order.size());
      tree.order.push_back(v);
      for (auto it = tree.nodes[size_t(v)].children.rbegin();
           it != tree.nodes[size_t(v)].children.rend(); ++it) {
        stack.push_back(it->second);
      }
    }
    tree.subtree_len.assign(tree.order.size(), 1);
    for (int pos = int(tree.order.size()) - 1; pos >= 0; --pos) {
      int parent = tree.nodes[size_t(tree.order[size_t(pos)])].parent;
      if (parent >= 0) tree.subtree_len[size_t(tree.order_pos[size_t(parent)])] +=
          tree.subtree_len[size_t(pos)];
    }
  }
  for (BfRun& enc : encoded) {
    for (int& d : enc.decision_pos) d = tree.order_pos[size_t(d)];
  }

  int total = int(tree.order.size());
  std::vector<char> included(size_t(total), 0);
  included[0] = 1;

  double best_ratio = -1.0, best_q = 0.0, best_c = 0.0;
  std::vector<char> best_included;
  std::vector<std::vector<int>> best_canonical;

  auto canonical_of = [&](const std::vector<char>& inc) {
    // prefixes reachable from the root through included nodes
    std::vector<std::vector<int>> prefixes;
    struct Item {
      int node;
      std::vector<int> prefix;
    };
    std::vector<Item> stack{{0, {}}};
    while (!stack.empty()) {
      Item item = std::move(stack.back());
      stack.pop_back();
      prefixes.push_back(item.prefix);
      for (const auto& [b, child] : tree.nodes[size_t(item.node)].children) {
        if (!inc[size_t(tree.order_pos[size_t(child)])]) continue;
        std::vector<int> p = item.prefix;
        p.push_back(b);
        stack.push_back(Item{child, std::move(p)});
      }
    }
    std::sort(prefixes.begin(), prefixes.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
    return prefixes;
  };

  auto evaluate = [&]() {
    double q = 0.0, c = 0.0;
    for (const BfRun& run : encoded) {
      double cost = 0.0;
      bool succeeded = false;
      size_t steps = run.costs.size();
      for (size_t t = 0; t < steps; ++t) {
        cost += run.costs[t];
        if (t == run.decision_pos.size()) {  // the success token, past all decisions
          succeeded = run.succeeds;
          break;
        }
        if (!included[size_t(run.decision_pos[t])]) break;
      }
      if (succeeded) q += run.weight;
      c += run.weight * cost;
    }
    double ratio = c > 0.0 ? q / c : 0.0;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_q = q;
      best_c = c;
      best_included.assign(included.begin(), included.end());
      best_canonical = canonical_of(included);
    } else if (ratio == best_ratio) {
      auto canonical = canonical_of(included);
      bool smaller = canonical.size() < best_canonical.size() ||
                     (canonical.size() == best_canonical.size() && canonical < best_canonical);
      if (smaller) {
        best_q = q;
        best_c = c;
        best_included.assign(included.begin(), included.end());
        best_canonical = std::move(canonical);
      }
    }
  };

  // Every prefix-closed subset containing the root: at each pre-order
  // position either include the node, or skip its whole subtree.
  auto enumerate = [&](auto&& self, int pos) -> void {
    if (pos >= total) {
      evaluate();
      return;
    }
    included[size_t(pos)] = 1;
    self(self, pos + 1);
    included[size_t(pos)] = 0;
    self(self, pos + tree.subtree_len[size_t(pos)]);
  };
  enumerate(enumerate, 1);

  BruteForceResult result;
  result.r_star = best_ratio;
  result.stats = PolicyStats::from_qc(best_q, best_c);
  struct Item {
    int bf_node;
    int rule_node;
  };
  std::vector<Item> stack{{0, 0}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    for (const auto& [b, child] : tree.nodes[size_t(item.bf_node)].children) {
      Token tok = Token::bucket(b);
      if (best_included[size_t(tree.order_pos[size_t(child)])]) {
        int rc = result.tree.add_continue(item.rule_node, tok);
        stack.push_back(Item{child, rc});
      } else {
        result.tree.add_stop(item.rule_node, tok);
      }
    }
  }
  return result;
}

}  // namespace restop

#include "restop/discretizer.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "restop/errors.hpp"

namespace restop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

QuantileDiscretizer QuantileDiscretizer::fit(const CurveDataset& dataset,
                                             const SuccessSpec& spec, int k, int min_count) {
  if (k < 1) throw std::invalid_argument("fit_discretizer: k must be >= 1");
  if (min_count < 1) throw std::invalid_argument("fit_discretizer: min_count must be >= 1");
  if (dataset.curves.empty()) throw std::invalid_argument("fit_discretizer: empty dataset");

  QuantileDiscretizer disc;
  disc.k_ = k;
  disc.min_count_ = min_count;
  disc.target_ = spec.target;
  disc.nodes_.emplace_back();  // root, stored unconditionally

  // pool: indices of curves whose token walk reaches the node and that have
  // not yet emitted success. depth = number of tokens consumed so far.
  struct Frame {
    int node;
    int depth;
    std::vector<int> pool;
  };
  std::vector<Frame> stack;
  {
    std::vector<int> all(dataset.curves.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = int(i);
    stack.push_back(Frame{0, 0, std::move(all)});
  }

  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();

    // Continuing runs: have a value at step depth+1 and do not succeed there.
    std::vector<int> cont;
    for (int ci : frame.pool) {
      const Curve& c = dataset.curves[size_t(ci)];
      if (c.length() < frame.depth + 1) continue;
      if (c.values[size_t(frame.depth)] >= spec.target) continue;
      cont.push_back(ci);
    }

    Node& node = disc.nodes_[size_t(frame.node)];
    if (cont.empty()) {
      // Nothing to rank; map any value to bucket 1.
      node.cuts.assign(size_t(k - 1), kInf);
      continue;
    }

    std::sort(cont.begin(), cont.end(), [&](int a, int b) {
      double va = dataset.curves[size_t(a)].values[size_t(frame.depth)];
      double vb = dataset.curves[size_t(b)].values[size_t(frame.depth)];
      if (va != vb) return va < vb;
      return dataset.curves[size_t(a)].id < dataset.curves[size_t(b)].id;
    });

    long long m = (long long)cont.size();
    std::vector<std::vector<int>> by_bucket(static_cast<size_t>(k));
    std::vector<double> bucket_max(size_t(k), -kInf);
    for (long long rank = 1; rank <= m; ++rank) {
      int b = int(std::min<long long>(k, 1 + (rank - 1) * k / m));
      int ci = cont[size_t(rank - 1)];
      by_bucket[size_t(b - 1)].push_back(ci);
      bucket_max[size_t(b - 1)] =
          std::max(bucket_max[size_t(b - 1)], dataset.curves[size_t(ci)].values[size_t(frame.depth)]);
    }

    node.cuts.resize(size_t(k - 1));
    for (int b = 1; b <= k - 1; ++b) {
      if (!by_bucket[size_t(b - 1)].empty()) {
        node.cuts[size_t(b - 1)] = bucket_max[size_t(b - 1)];
      } else {
        // rank formula skipped this bucket; inherit the previous threshold
        // so the empty bucket captures nothing (bucket 1 is never empty)
        node.cuts[size_t(b - 1)] = node.cuts[size_t(b - 2)];
      }
    }

    for (int b = 1; b <= k; ++b) {
      auto& pool_b = by_bucket[size_t(b - 1)];
      if ((int)pool_b.size() < min_count) continue;  // pruned
      int child = int(disc.nodes_.size());
      disc.nodes_.emplace_back();
      disc.nodes_[size_t(frame.node)].children.emplace(b, child);
      stack.push_back(Frame{child, frame.depth + 1, std::move(pool_b)});
    }
  }
  return disc;
}

int QuantileDiscretizer::bucket_for(const Node& node, double value) const {
  for (size_t j = 0; j < node.cuts.size(); ++j) {
    if (value <= node.cuts[j]) return int(j) + 1;
  }
  return k_;
}

DiscretizedRun QuantileDiscretizer::discretize(const Curve& curve,
                                               const SuccessSpec& spec) const {
  if (spec.target != target_)
    throw std::invalid_argument("discretize: spec does not match the trained target");

  DiscretizedRun run;
  run.source_id = curve.id;
  int node = 0;
  bool in_tree = true;
  for (int t = 1; t <= curve.length(); ++t) {
    double v = curve.values[size_t(t) - 1];
    run.costs.push_back(curve.cost_at(t));
    if (v >= spec.target) {
      run.tokens.push_back(Token::success());
      break;
    }
    int b = bucket_for(nodes_[size_t(node)], v);
    run.tokens.push_back(Token::bucket(b));
    if (in_tree) {
      auto it = nodes_[size_t(node)].children.find(b);
      if (it != nodes_[size_t(node)].children.end()) {
        node = it->second;
      } else {
        in_tree = false;  // keep this node's cuts for all later steps
      }
    }
  }
  return run;
}

std::vector<DiscretizedRun> QuantileDiscretizer::discretize_all(const CurveDataset& dataset,
                                                                const SuccessSpec& spec) const {
  std::vector<DiscretizedRun> runs;
  runs.reserve(dataset.curves.size());
  for (const Curve& c : dataset.curves) runs.push_back(discretize(c, spec));
  return runs;
}

bool QuantileDiscretizer::has_prefix(const std::vector<Token>& prefix) const {
  int node = 0;
  for (const Token& tok : prefix) {
    if (tok.is_success()) return false;
    auto it = nodes_[size_t(node)].children.find(tok.bucket_index());
    if (it == nodes_[size_t(node)].children.end()) return false;
    node = it->second;
  }
  return true;
}

nlohmann::ordered_json QuantileDiscretizer::to_json() const {
  // Emit nodes with explicit prefixes, sorted by (length, lex) for stable
  // bytes.
  std::vector<std::pair<std::vector<int>, const Node*>> flat;
  struct Item {
    int node;
    std::vector<int> prefix;
  };
  std::vector<Item> stack{{0, {}}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    flat.emplace_back(item.prefix, &nodes_[size_t(item.node)]);
    for (const auto& [b, child] : nodes_[size_t(item.node)].children) {
      std::vector<int> p = item.prefix;
      p.push_back(b);
      stack.push_back(Item{child, std::move(p)});
    }
  }
  std::sort(flat.begin(), flat.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });

  nlohmann::ordered_json j;
  j["k"] = k_;
  j["min_count"] = min_count_;
  j["target"] = target_;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& [prefix, node] : flat) {
    nlohmann::ordered_json n;
    n["prefix"] = prefix;
    auto cuts = nlohmann::ordered_json::array();
    for (double c : node->cuts) {
      if (c == kInf)
        cuts.push_back("inf");
      else
        cuts.push_back(c);
    }
    n["cuts"] = std::move(cuts);
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

QuantileDiscretizer QuantileDiscretizer::from_json(const nlohmann::json& j) {
  QuantileDiscretizer disc;
  try {
    disc.k_ = j.at("k").get<int>();
    disc.min_count_ = j.at("min_count").get<int>();
    disc.target_ = j.at("target").get<double>();
    disc.nodes_.emplace_back();
    // Nodes arrive parents-first (sorted by prefix length).
    for (const auto& n : j.at("nodes")) {
      auto prefix = n.at("prefix").get<std::vector<int>>();
      int node = 0;
      bool fresh = prefix.empty();
      for (size_t i = 0; i < prefix.size(); ++i) {
        auto it = disc.nodes_[size_t(node)].children.find(prefix[i]);
        if (it != disc.nodes_[size_t(node)].children.end()) {
          node = it->second;
        } else {
          if (i + 1 != prefix.size()) throw DataError("discretizer node parent missing");
          int child = int(disc.nodes_.size());
          disc.nodes_.emplace_back();
          disc.nodes_[size_t(node)].children.emplace(prefix[i], child);
          node = child;
          fresh = true;
        }
      }
      if (!fresh) throw DataError("duplicate discretizer node");
      std::vector<double> cuts;
      for (const auto& c : n.at("cuts")) {
        if (c.is_string()) {
          if (c.get<std::string>() != "inf") throw DataError("bad cut point");
          cuts.push_back(kInf);
        } else {
          cuts.push_back(c.get<double>());
        }
      }
      disc.nodes_[size_t(node)].cuts = std::move(cuts);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed discretizer: ") + e.what());
  }
  return disc;
}

}  // namespace restop

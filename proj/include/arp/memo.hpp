#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "arp/transfer.hpp"

namespace arp {

/// Prefix cache of evaluated partial tours.
///
/// Each node stores the true cost and arrival epoch of one visit prefix;
/// extending a prefix that is already cached costs nothing, so the full
/// transfer optimization runs at most once per distinct prefix. Single
/// writer, arbitrary readers.
class SolutionTrie {
 public:
  struct Node {
    int label = -1;
    double cost = 0.0;         // cumulative true cost of the prefix
    double est = 0.0;          // arrival epoch at this body, days
    double leg_cost = 0.0;     // cost contribution of the final leg
    bool feasible = true;
    std::map<int, std::unique_ptr<Node>> children;
  };

  struct Value {
    double cost = 0.0;
    double est = 0.0;
    bool feasible = true;
  };

  explicit SolutionTrie(const TransferEvaluator& evaluator)
      : evaluator_(&evaluator) {}

  /// Walks the visit sequence (sequence[0] must be 0, Earth), evaluating
  /// and caching any missing suffix legs. Returns the cumulative cost and
  /// arrival epoch of the full sequence. Infeasible legs poison the
  /// prefix: cost becomes +infinity and stays cached.
  Value evaluate(const std::vector<int>& sequence, int multi);

  /// Cached value of a prefix, or nullptr without side effects.
  const Node* lookup(const std::vector<int>& sequence) const;

  /// Per-leg wait and travel bounds used by subsequent evaluations.
  /// Must not change once anything is cached.
  void set_horizon(double tau_max, double t_max) {
    tau_max_ = tau_max;
    t_max_ = t_max;
  }

  const Node& root() const { return root_; }
  std::int64_t nodes() const { return node_count_; }
  const TransferEvaluator& evaluator() const { return *evaluator_; }

  void save(std::string& out) const;
  void load(const std::string& in);

 private:
  const TransferEvaluator* evaluator_;
  Node root_;
  std::int64_t node_count_ = 0;
  double tau_max_ = 730.0;
  double t_max_ = 730.0;
};

/// Interval-keyed bound cache for one ordered body pair.
///
/// Stores (departure window, bound) entries; a query returns the largest
/// bound whose stored window contains the queried window, because a
/// minimum over fewer departure epochs can only grow. Implemented as a
/// treap keyed by window start, augmented with the subtree's minimum
/// start and maximum end so whole branches prune during lookup.
class BoundIntervalTree {
 public:
  void insert(double lo, double hi, double value);

  /// Max value over stored entries with lo <= qlo and hi >= qhi;
  /// NaN-free: returns false when no stored window contains the query.
  bool query(double qlo, double qhi, double& value_out) const;

  std::int64_t size() const { return size_; }

  void save(std::string& out) const;
  void load(const std::string& in);

 private:
  struct Node {
    double lo, hi, value;
    std::uint64_t priority;
    double subtree_min_lo, subtree_max_hi;
    std::unique_ptr<Node> left, right;
  };
  static void pull(Node* node);
  std::unique_ptr<Node> root_;
  std::int64_t size_ = 0;
  std::uint64_t prio_state_ = 0x9E3779B97F4A7C15ull;
};

/// The two caches the solver shares: true-cost prefixes and pair bounds.
struct BoundMemo {
  explicit BoundMemo(const TransferEvaluator& evaluator) : trie(evaluator) {}

  SolutionTrie trie;
  std::map<std::pair<int, int>, BoundIntervalTree> bounds;

  void insert_bound(int from, int to, double lo, double hi, double value);
  bool query_bound(int from, int to, double lo, double hi,
                   double& value_out) const;

  /// Versioned binary snapshot of both caches.
  void save(const std::string& path) const;
  void load(const std::string& path);
};

}  // namespace arp

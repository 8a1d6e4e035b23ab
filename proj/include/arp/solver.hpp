#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "arp/builder.hpp"
#include "arp/diagram.hpp"
#include "arp/instance.hpp"
#include "arp/memo.hpp"

namespace arp {

enum class PeelStrategy { maximal, last_exact };
enum class QueueOrder { worst_bound, dfs };

struct SolverConfig {
  int dd_width = 2048;
  int search_width = 400;
  int multi = 1;
  PeelStrategy peel = PeelStrategy::maximal;
  QueueOrder queue = QueueOrder::worst_bound;
  double time_limit_s = std::numeric_limits<double>::infinity();
  bool est_eat = false;
  bool naive_windows = false;
  double tolerance = 1e-9;
};

struct TraceRecord {
  double t_wall = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  int queue_len = 0;
  long b_calls = 0;
  long bprime_calls = 0;
};

struct SolveResult {
  Tour tour;
  double cost = std::numeric_limits<double>::infinity();
  double lb = 0.0;
  bool proven_optimal = false;
  bool timed_out = false;
  int queue_remaining = 0;
  long iterations = 0;
  double wall_s = 0.0;
  long b_calls = 0;            // full evaluations across the whole run
  long bprime_calls = 0;       // relaxed evaluations across the whole run
  long bprime_calls_loop = 0;  // relaxed evaluations after construction
  long capped_calls_loop = 0;  // capped evaluations after construction
  long search_calls_max = 0;   // worst per-search evaluation count
  BuildReport build;
  std::vector<TraceRecord> trace;
};

struct QueueEntry {
  Diagram d;
  double vstar = 0.0;
  int depth = 0;  // layer of the exact prefix this diagram was peeled at
  long seq = 0;
};

/// Index of the entry to process next. Worst-bound takes the smallest
/// vstar (tie: oldest); dfs takes the deepest prefix (ties: smallest
/// vstar, then oldest).
int select_diagram(const std::vector<QueueEntry>& queue, QueueOrder order);

/// Node to peel at, chosen on the current shortest path: the lowest
/// (maximal) or highest (last_exact) exact node whose layer holds at
/// least two alive nodes, so the peel separates something. Returns -1
/// when the diagram is a single chain.
int select_exact_node(const Diagram& d, PeelStrategy strategy);

/// Test hook, invoked after the initial enqueue and at the end of every
/// iteration with the queued diagrams and the incumbent cost.
using QueueObserver =
    std::function<void(const std::vector<const Diagram*>&, double)>;

/// Branch-and-bound over diagram pieces. Builds the initial relaxation,
/// then repeatedly extracts the subproblem below a chosen exact node
/// into its own diagram, searches it, and re-queues whichever pieces
/// still have a bound under the incumbent. Terminates with a proof when
/// the queue empties, or returns the best tour found at the time limit.
SolveResult peel_and_bound(const Instance& instance,
                           const SolverConfig& config, BoundMemo& memo,
                           const QueueObserver& observer = {});

}  // namespace arp

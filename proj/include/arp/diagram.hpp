#pragma once

#include <limits>
#include <string>
#include <vector>

#include "arp/labels.hpp"
#include "arp/memo.hpp"

namespace arp {

class StructureError : public std::runtime_error {
 public:
  explicit StructureError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Arc of a weighted diagram. The weight is a lower bound on the true
/// cost of this leg for any departure epoch inside [window_lo, window_hi];
/// `exact` marks weights that are true evaluated costs for the unique
/// prefix reaching the arc.
struct DDArc {
  int id = -1;
  int from = -1;
  int to = -1;
  int label = -1;  // body index the arc decides to visit next; -1 terminal
  double weight = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool exact = false;
  double arrival = 0.0;  // arrival epoch at `to` when exact
  int source_arc = -1;   // provenance: arc this one was copied from
  bool alive = false;
};

struct DDNode {
  int id = -1;
  int layer = -1;
  int label = -1;  // 0 root (Earth), 1..n asteroids, -1 terminal
  double z_down = std::numeric_limits<double>::infinity();
  double z_up = std::numeric_limits<double>::infinity();
  double est = 0.0;  // lower bound on arrival epoch; exact on exact nodes
  LabelSet all_down, some_down, all_up, some_up;
  bool exact = false;
  std::vector<int> in_arcs, out_arcs;
  bool alive = false;
};

/// Layered relaxed decision diagram over visit orders.
///
/// Layer 0 holds the root (Earth), layers 1..n the asteroid nodes and
/// layer n+1 a single terminal. Every root-terminal path spells a visit
/// sequence; merged nodes make the diagram a relaxation whose shortest
/// path lower-bounds every tour consistent with it. Node and arc ids are
/// stable across mutation; dead slots are recycled through free lists.
struct Diagram {
  int n = 0;
  int width_cap = 0;
  int root = -1;
  int terminal = -1;
  int root_depth = 0;  // layer of the exact node this diagram was peeled at
  std::vector<DDNode> nodes;
  std::vector<DDArc> arcs;
  std::vector<std::vector<int>> layers;  // alive node ids per layer
  std::vector<int> free_nodes, free_arcs;

  int add_node(int layer, int label);
  int add_arc(int from, int to, int label, double weight, double window_lo,
              double window_hi);
  void remove_arc(int arc_id);
  void remove_node(int node_id);

  DDNode& node(int id) { return nodes[id]; }
  const DDNode& node(int id) const { return nodes[id]; }
  DDArc& arc(int id) { return arcs[id]; }
  const DDArc& arc(int id) const { return arcs[id]; }

  int alive_nodes() const;
  int alive_arcs() const;
};

/// Shortest-path bound of the diagram: z_down at the terminal.
double shortest_path_value(const Diagram& d);

/// Recomputes z_down/z_up over alive nodes. Throws StructureError when a
/// non-purged node is disconnected from root or terminal.
void recompute_bounds(Diagram& d);

/// Recomputes label sets, earliest arrival floors and exactness flags.
/// est of an inexact node is min over parents of (est(parent) + 1): every
/// leg takes at least one day, waits are nonnegative.
void recompute_labels(Diagram& d);

/// Removes arcs that revisit a body that every consistent path already
/// visits (label in all_down(from) or all_up(to)), then arcs and nodes
/// whose bound exceeds the incumbent, then disconnected nodes, iterating
/// to a fixed point. Bounds and label sets are current on return.
/// Returns the number of removed nodes plus arcs.
int filter(Diagram& d,
           double incumbent = std::numeric_limits<double>::infinity());

/// Raises arc weights for free from memoized pair bounds whose stored
/// departure window contains the arc's current one. Returns arcs raised.
int upgrade_weights(Diagram& d, const BoundMemo& memo, double incumbent);

/// Splits node u on label phi: in-arcs whose origin surely visited phi
/// (or that carry phi) move to a fresh copy; out-arcs are duplicated with
/// identical weights and windows, so no transfer evaluation happens.
/// Returns the new node id, or -1 when the partition is one-sided.
int split_node(Diagram& d, int node_id, int phi);

/// Extracts every path through exact node u into a fresh diagram and
/// removes u from the remainder. Copied arcs keep their weights and
/// windows; with a memo they may pick up stronger stored bounds.
/// The remainder stays in `d` (possibly empty after purging).
Diagram peel(Diagram& d, int node_id, const BoundMemo* memo = nullptr,
             double incumbent = std::numeric_limits<double>::infinity());

/// Splits nodes along the current shortest path, lowest layer first,
/// until the path is exact, no split separates anything, or layers reach
/// the width cap. Returns the number of splits performed.
int refine(Diagram& d, double incumbent, const BoundMemo* memo = nullptr);

/// Extends exactness down the current shortest path: a node whose only
/// in-arc leaves an exact node gets its true prefix cost and arrival from
/// the trie (one evaluation per fresh prefix). Stops at the first node
/// with several in-arcs. Returns the deepest exact node on the path.
int extend_exact_prefix(Diagram& d, SolutionTrie& trie, int multi);

/// Labels of the unique exact chain from the root to `node_id`,
/// including Earth. Throws StructureError when the node is not exact.
std::vector<int> exact_prefix(const Diagram& d, int node_id);

/// Node ids along the current shortest path, root to terminal.
std::vector<int> shortest_path_nodes(const Diagram& d);

/// All root-terminal label sequences (asteroid labels only). Exponential;
/// intended for small-n verification.
std::vector<std::vector<int>> enumerate_paths(const Diagram& d);

/// Plain-text dump, one node or arc per line.
std::string to_debug_text(const Diagram& d);

}  // namespace arp

#pragma once

#include <limits>

#include "arp/diagram.hpp"
#include "arp/instance.hpp"
#include "arp/memo.hpp"

namespace arp {

struct SearchResult {
  bool found = false;
  Tour tour;
  double cost = std::numeric_limits<double>::infinity();
  /// True when the beam was never truncated, i.e. every feasible path of
  /// the diagram was evaluated and `cost` is the true optimum within it.
  bool exhaustive = false;
  long b_calls = 0;  // new transfer evaluations this invocation consumed
};

/// Beam search through the diagram's solution space.
///
/// Walks the layers keeping at most `omega_s` partial tours. Candidates
/// are the unvisited labels reachable through each kept tour's mirror
/// node; they are ranked by the exact prefix cost plus arc weight plus
/// z_up below the arc head, with ties broken by destination label, then
/// parent prefix cost, then parent beam position. Only the survivors are
/// evaluated against the real transfer optimizer (through the trie), so
/// an invocation performs at most omega_s * (n - 1) new evaluations:
/// depth-1 prefixes are root legs, already cached.
SearchResult embedded_search(const Diagram& d, int omega_s, BoundMemo& memo,
                             int multi);

}  // namespace arp

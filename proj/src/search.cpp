#include "arp/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace arp {

namespace {

struct BeamNode {
  double cost = 0.0;  // exact prefix cost
  double est = 0.0;   // exact arrival epoch
  int mirror = -1;    // diagram node this prefix replays to
  int label = -1;
  int parent = -1;  // pool index
  LabelSet visited;
};

struct Candidate {
  double bound;
  int label;
  double parent_cost;
  int parent_pos;  // position in the current beam
  int arc;

  bool operator<(const Candidate& other) const {
    if (bound != other.bound) return bound < other.bound;
    if (label != other.label) return label < other.label;
    if (parent_cost != other.parent_cost) return parent_cost < other.parent_cost;
    return parent_pos < other.parent_pos;
  }
};

}  // namespace

SearchResult embedded_search(const Diagram& d, int omega_s, BoundMemo& memo,
                             int multi) {
  if (omega_s < 1) throw std::invalid_argument("embedded_search: omega_s >= 1");
  SearchResult out;
  out.exhaustive = true;
  if (d.root < 0 || !d.nodes[d.root].alive || d.terminal < 0 ||
      !d.nodes[d.terminal].alive) {
    return out;  // nothing encoded, trivially exhausted
  }
  const std::int64_t calls_before = memo.trie.evaluator().full_calls();
  const int n = d.n;

  std::vector<BeamNode> pool(1);
  pool[0].mirror = d.root;
  pool[0].label = d.nodes[d.root].label;
  pool[0].visited = LabelSet(n + 1);
  pool[0].visited.insert(pool[0].label);
  std::vector<int> beam{0};

  std::vector<int> best_arc_for(n + 1);
  std::vector<int> sequence;
  for (int depth = 1; depth <= n && !beam.empty(); ++depth) {
    std::vector<Candidate> candidates;
    for (std::size_t pos = 0; pos < beam.size(); ++pos) {
      const BeamNode& bn = pool[beam[pos]];
      const DDNode& mirror = d.nodes[bn.mirror];
      std::fill(best_arc_for.begin(), best_arc_for.end(), -1);
      for (int arc_id : mirror.out_arcs) {
        const DDArc& a = d.arcs[arc_id];
        if (a.label < 0 || bn.visited.contains(a.label)) continue;
        int& slot = best_arc_for[a.label];
        if (slot < 0) {
          slot = arc_id;
          continue;
        }
        // Parallel same-label arcs: follow the cheaper completion.
        const DDArc& held = d.arcs[slot];
        const double held_z = d.nodes[held.to].z_down;
        const double cand_z = d.nodes[a.to].z_down;
        if (cand_z < held_z || (cand_z == held_z && a.to < held.to)) {
          slot = arc_id;
        }
      }
      for (int label = 1; label <= n; ++label) {
        if (best_arc_for[label] < 0) continue;
        const DDArc& a = d.arcs[best_arc_for[label]];
        candidates.push_back({bn.cost + a.weight + d.nodes[a.to].z_up, label,
                              bn.cost, static_cast<int>(pos),
                              best_arc_for[label]});
      }
    }
    std::sort(candidates.begin(), candidates.end());
    if (static_cast<int>(candidates.size()) > omega_s) {
      out.exhaustive = false;
      candidates.resize(omega_s);
    }

    std::vector<int> next_beam;
    for (const Candidate& c : candidates) {
      const int parent_pool = beam[c.parent_pos];
      sequence.assign(depth + 1, 0);
      sequence[depth] = c.label;
      for (int k = depth - 1, walk = parent_pool; k >= 0; --k) {
        sequence[k] = pool[walk].label;
        walk = pool[walk].parent;
      }
      const SolutionTrie::Value val = memo.trie.evaluate(sequence, multi);
      if (!val.feasible) continue;
      BeamNode made;
      made.cost = val.cost;
      made.est = val.est;
      made.mirror = d.arcs[c.arc].to;
      made.label = c.label;
      made.parent = parent_pool;
      made.visited = pool[parent_pool].visited;
      made.visited.insert(c.label);
      pool.push_back(made);
      next_beam.push_back(static_cast<int>(pool.size()) - 1);
    }
    beam = std::move(next_beam);
  }

  int best = -1;
  for (int pi : beam) {
    if (best < 0 || pool[pi].cost < pool[best].cost) best = pi;
  }
  if (best >= 0 && std::isfinite(pool[best].cost)) {
    out.found = true;
    out.cost = pool[best].cost;
    out.tour.assign(n + 1, 0);
    for (int k = n, walk = best; k >= 0; --k) {
      out.tour[k] = pool[walk].label;
      walk = pool[walk].parent;
    }
  }
  out.b_calls = memo.trie.evaluator().full_calls() - calls_before;
  return out;
}

}  // namespace arp

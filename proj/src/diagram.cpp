#include "arp/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "arp/orbital.hpp"

namespace arp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;
}  // namespace

int Diagram::add_node(int layer, int label) {
  int id;
  if (!free_nodes.empty()) {
    id = free_nodes.back();
    free_nodes.pop_back();
  } else {
    id = static_cast<int>(nodes.size());
    nodes.emplace_back();
  }
  DDNode& v = nodes[id];
  v = DDNode{};
  v.id = id;
  v.layer = layer;
  v.label = label;
  v.all_down = LabelSet(n + 1);
  v.some_down = LabelSet(n + 1);
  v.all_up = LabelSet(n + 1);
  v.some_up = LabelSet(n + 1);
  v.alive = true;
  layers[layer].push_back(id);
  return id;
}

int Diagram::add_arc(int from, int to, int label, double weight,
                     double window_lo, double window_hi) {
  int id;
  if (!free_arcs.empty()) {
    id = free_arcs.back();
    free_arcs.pop_back();
  } else {
    id = static_cast<int>(arcs.size());
    arcs.emplace_back();
  }
  DDArc& a = arcs[id];
  a = DDArc{};
  a.id = id;
  a.from = from;
  a.to = to;
  a.label = label;
  a.weight = weight;
  a.window_lo = window_lo;
  a.window_hi = window_hi;
  a.alive = true;
  nodes[from].out_arcs.push_back(id);
  nodes[to].in_arcs.push_back(id);
  return id;
}

void Diagram::remove_arc(int arc_id) {
  DDArc& a = arcs[arc_id];
  if (!a.alive) return;
  std::erase(nodes[a.from].out_arcs, arc_id);
  std::erase(nodes[a.to].in_arcs, arc_id);
  a.alive = false;
  free_arcs.push_back(arc_id);
}

void Diagram::remove_node(int node_id) {
  DDNode& v = nodes[node_id];
  if (!v.alive) return;
  const std::vector<int> ins = v.in_arcs;
  for (int arc_id : ins) remove_arc(arc_id);
  const std::vector<int> outs = v.out_arcs;
  for (int arc_id : outs) remove_arc(arc_id);
  std::erase(layers[v.layer], node_id);
  v.alive = false;
  free_nodes.push_back(node_id);
}

int Diagram::alive_nodes() const {
  int count = 0;
  for (const auto& v : nodes) count += v.alive ? 1 : 0;
  return count;
}

int Diagram::alive_arcs() const {
  int count = 0;
  for (const auto& a : arcs) count += a.alive ? 1 : 0;
  return count;
}

double shortest_path_value(const Diagram& d) {
  if (d.terminal < 0 || d.terminal >= static_cast<int>(d.nodes.size()) ||
      !d.nodes[d.terminal].alive) {
    return kInf;
  }
  return d.nodes[d.terminal].z_down;
}

namespace {

bool diagram_empty(const Diagram& d) {
  return d.root < 0 || !d.nodes[d.root].alive || d.terminal < 0 ||
         !d.nodes[d.terminal].alive;
}

// Removes nodes that lost all in- or out-arcs, cascading. Returns count.
int purge(Diagram& d) {
  if (d.root < 0) return 0;
  int removed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int layer = 0; layer < static_cast<int>(d.layers.size()); ++layer) {
      const std::vector<int> ids = d.layers[layer];
      for (int id : ids) {
        const DDNode& v = d.nodes[id];
        if (!v.alive) continue;
        const bool headless = id != d.root && v.in_arcs.empty();
        const bool tailless = id != d.terminal && v.out_arcs.empty();
        if (headless || tailless) {
          d.remove_node(id);
          ++removed;
          changed = true;
        }
      }
    }
  }
  return removed;
}

}  // namespace

void recompute_bounds(Diagram& d) {
  if (diagram_empty(d)) return;
  for (auto& v : d.nodes) {
    if (!v.alive) continue;
    v.z_down = kInf;
    v.z_up = kInf;
  }
  d.nodes[d.root].z_down = 0.0;
  for (std::size_t layer = 1; layer < d.layers.size(); ++layer) {
    for (int id : d.layers[layer]) {
      DDNode& v = d.nodes[id];
      if (v.in_arcs.empty()) {
        throw StructureError("recompute_bounds: node without in-arcs");
      }
      for (int arc_id : v.in_arcs) {
        const DDArc& a = d.arcs[arc_id];
        v.z_down = std::min(v.z_down, d.nodes[a.from].z_down + a.weight);
      }
    }
  }
  d.nodes[d.terminal].z_up = 0.0;
  for (int layer = static_cast<int>(d.layers.size()) - 2; layer >= 0; --layer) {
    for (int id : d.layers[layer]) {
      DDNode& v = d.nodes[id];
      if (v.out_arcs.empty()) {
        throw StructureError("recompute_bounds: node without out-arcs");
      }
      for (int arc_id : v.out_arcs) {
        const DDArc& a = d.arcs[arc_id];
        v.z_up = std::min(v.z_up, a.weight + d.nodes[a.to].z_up);
      }
    }
  }
}

void recompute_labels(Diagram& d) {
  if (diagram_empty(d)) return;
  DDNode& root = d.nodes[d.root];
  root.all_down.clear();
  root.all_down.insert(root.label);
  root.some_down = root.all_down;
  root.est = 0.0;
  root.exact = true;

  for (std::size_t layer = 1; layer < d.layers.size(); ++layer) {
    for (int id : d.layers[layer]) {
      DDNode& v = d.nodes[id];
      v.all_down = LabelSet::full(d.n + 1);
      v.some_down.clear();
      double floor_est = kInf;
      for (int arc_id : v.in_arcs) {
        const DDNode& parent = d.nodes[d.arcs[arc_id].from];
        v.all_down &= parent.all_down;
        v.some_down |= parent.some_down;
        floor_est = std::min(floor_est, parent.est + 1.0);
      }
      if (v.label >= 0) {
        v.all_down.insert(v.label);
        v.some_down.insert(v.label);
      }
      v.exact = false;
      if (v.in_arcs.size() == 1) {
        const DDArc& a = d.arcs[v.in_arcs[0]];
        if (a.exact && d.nodes[a.from].exact) {
          v.exact = true;
          v.est = a.arrival;
        }
      }
      // est never shrinks: refinements stay valid while path sets only
      // lose members.
      if (!v.exact && std::isfinite(floor_est)) {
        v.est = std::max(v.est, floor_est);
      }
    }
  }

  DDNode& terminal = d.nodes[d.terminal];
  terminal.all_up.clear();
  terminal.some_up.clear();
  for (int layer = static_cast<int>(d.layers.size()) - 2; layer >= 0; --layer) {
    for (int id : d.layers[layer]) {
      DDNode& v = d.nodes[id];
      v.all_up = LabelSet::full(d.n + 1);
      v.some_up.clear();
      for (int arc_id : v.out_arcs) {
        const DDArc& a = d.arcs[arc_id];
        const DDNode& child = d.nodes[a.to];
        v.all_up.intersect_with_plus(child.all_up, a.label);
        v.some_up.union_with_plus(child.some_up, a.label);
      }
    }
  }
}

int filter(Diagram& d, double incumbent) {
  int removed_total = purge(d);
  if (diagram_empty(d)) return removed_total;

  for (;;) {
    recompute_bounds(d);
    recompute_labels(d);
    int removed = 0;

    for (auto& a : d.arcs) {
      if (!a.alive || a.label < 0) continue;
      const DDNode& from = d.nodes[a.from];
      const DDNode& to = d.nodes[a.to];
      if (from.all_down.contains(a.label) || to.all_up.contains(a.label)) {
        d.remove_arc(a.id);
        ++removed;
        continue;
      }
      if (from.z_down + a.weight + to.z_up > incumbent + kTol) {
        d.remove_arc(a.id);
        ++removed;
      }
    }
    for (auto& v : d.nodes) {
      if (!v.alive) continue;
      if (v.z_down + v.z_up > incumbent + kTol) {
        d.remove_node(v.id);
        ++removed;
      }
    }

    if (removed == 0) break;
    removed_total += removed + purge(d);
    if (diagram_empty(d)) return removed_total;
  }
  return removed_total;
}

int upgrade_weights(Diagram& d, const BoundMemo& memo, double incumbent) {
  if (diagram_empty(d)) return 0;
  int raised = 0;
  const double rate = Constants::time_cost_rate;
  for (auto& a : d.arcs) {
    if (!a.alive || a.exact || a.label < 0) continue;
    const DDNode& from = d.nodes[a.from];
    const DDNode& to = d.nodes[a.to];
    if (from.label < 0 || !std::isfinite(from.z_down) ||
        !std::isfinite(to.z_up)) {
      continue;
    }
    double tau_f = kInf;
    if (std::isfinite(incumbent)) {
      tau_f = (incumbent - from.z_down - to.z_up) / rate;
      if (tau_f < 0.0) continue;  // the cost rule already condemns this arc
    }
    const double lo = from.est;
    const double hi = std::isfinite(tau_f) ? from.est + tau_f : a.window_hi;
    double stored = 0.0;
    if (memo.query_bound(from.label, a.label, lo, hi, stored) &&
        stored > a.weight) {
      a.weight = stored;
      a.window_lo = lo;
      a.window_hi = hi;
      ++raised;
    }
  }
  return raised;
}

int split_node(Diagram& d, int node_id, int phi) {
  DDNode& u = d.nodes[node_id];
  if (!u.alive || node_id == d.root || node_id == d.terminal) {
    throw std::invalid_argument("split_node: need an alive inner node");
  }
  const std::vector<int> ins = u.in_arcs;
  int moved = 0;
  for (int arc_id : ins) {
    const DDArc& a = d.arcs[arc_id];
    if (d.nodes[a.from].all_down.contains(phi) || a.label == phi) ++moved;
  }
  if (moved == 0 || moved == static_cast<int>(ins.size())) return -1;

  const int copy_id = d.add_node(u.layer, u.label);
  for (int arc_id : ins) {
    DDArc& a = d.arcs[arc_id];
    if (!(d.nodes[a.from].all_down.contains(phi) || a.label == phi)) continue;
    std::erase(d.nodes[a.to].in_arcs, arc_id);
    a.to = copy_id;
    d.nodes[copy_id].in_arcs.push_back(arc_id);
  }
  const std::vector<int> outs = d.nodes[node_id].out_arcs;
  for (int arc_id : outs) {
    const DDArc a = d.arcs[arc_id];  // copy; add_arc may reallocate
    const int dup =
        d.add_arc(copy_id, a.to, a.label, a.weight, a.window_lo, a.window_hi);
    d.arcs[dup].exact = a.exact;
    d.arcs[dup].arrival = a.arrival;
    d.arcs[dup].source_arc = arc_id;
  }

  // Local refresh of the two touched nodes; the next filter pass settles
  // everything downstream.
  for (int id : {node_id, copy_id}) {
    DDNode& v = d.nodes[id];
    v.all_down = LabelSet::full(d.n + 1);
    v.some_down.clear();
    double floor_est = kInf;
    for (int arc_id : v.in_arcs) {
      const DDNode& parent = d.nodes[d.arcs[arc_id].from];
      v.all_down &= parent.all_down;
      v.some_down |= parent.some_down;
      floor_est = std::min(floor_est, parent.est + 1.0);
    }
    v.all_down.insert(v.label);
    v.some_down.insert(v.label);
    v.exact = false;
    if (v.in_arcs.size() == 1) {
      const DDArc& a = d.arcs[v.in_arcs[0]];
      if (a.exact && d.nodes[a.from].exact) {
        v.exact = true;
        v.est = a.arrival;
      }
    }
    if (!v.exact && std::isfinite(floor_est)) {
      v.est = std::max(v.est, floor_est);
    }
    const std::vector<int> vouts = v.out_arcs;
    for (int arc_id : vouts) {
      if (v.all_down.contains(d.arcs[arc_id].label)) d.remove_arc(arc_id);
    }
  }
  return copy_id;
}

namespace {

std::vector<int> exact_chain_ids(const Diagram& d, int node_id) {
  const DDNode* v = &d.nodes[node_id];
  if (!v->alive || !v->exact) {
    throw StructureError("exact prefix requested for a non-exact node");
  }
  std::vector<int> chain{node_id};
  while (chain.back() != d.root) {
    const DDNode& cur = d.nodes[chain.back()];
    if (cur.in_arcs.size() != 1) {
      throw StructureError("exact node with multiple in-arcs");
    }
    chain.push_back(d.arcs[cur.in_arcs[0]].from);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace

std::vector<int> exact_prefix(const Diagram& d, int node_id) {
  std::vector<int> labels;
  for (int id : exact_chain_ids(d, node_id)) labels.push_back(d.nodes[id].label);
  return labels;
}

Diagram peel(Diagram& d, int node_id, const BoundMemo* memo, double incumbent) {
  const DDNode& u = d.nodes[node_id];
  if (!u.alive || !u.exact || node_id == d.root || node_id == d.terminal) {
    throw StructureError("peel: node must be alive, exact and inner");
  }
  const std::vector<int> chain = exact_chain_ids(d, node_id);

  Diagram out;
  out.n = d.n;
  out.width_cap = d.width_cap;
  out.root_depth = u.layer;
  out.layers.resize(d.layers.size());

  std::map<int, int> copy_of;
  out.root = out.add_node(0, d.nodes[d.root].label);
  copy_of[d.root] = out.root;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const DDNode& orig = d.nodes[chain[k]];
    const int copy = out.add_node(orig.layer, orig.label);
    out.nodes[copy].est = orig.est;
    copy_of[chain[k]] = copy;
    const DDArc& a = d.arcs[orig.in_arcs[0]];
    const int dup = out.add_arc(copy_of[a.from], copy, a.label, a.weight,
                                a.window_lo, a.window_hi);
    out.arcs[dup].exact = a.exact;
    out.arcs[dup].arrival = a.arrival;
    out.arcs[dup].source_arc = a.id;
  }

  // Everything reachable from u, layer by layer; iteration over the layer
  // vectors keeps copy order deterministic.
  for (int layer = u.layer; layer < static_cast<int>(d.layers.size()) - 1;
       ++layer) {
    for (int id : d.layers[layer]) {
      const auto found = copy_of.find(id);
      if (found == copy_of.end()) continue;
      const int from_copy = found->second;
      for (int arc_id : d.nodes[id].out_arcs) {
        const DDArc& a = d.arcs[arc_id];
        auto target = copy_of.find(a.to);
        if (target == copy_of.end()) {
          const DDNode& child = d.nodes[a.to];
          const int child_copy = out.add_node(child.layer, child.label);
          out.nodes[child_copy].est = child.est;
          target = copy_of.emplace(a.to, child_copy).first;
          if (a.to == d.terminal) out.terminal = child_copy;
        }
        const int dup = out.add_arc(from_copy, target->second, a.label,
                                    a.weight, a.window_lo, a.window_hi);
        out.arcs[dup].exact = a.exact;
        out.arcs[dup].arrival = a.arrival;
        out.arcs[dup].source_arc = a.id;
      }
    }
  }
  if (out.terminal < 0) throw StructureError("peel: no path reaches terminal");

  d.remove_node(node_id);

  filter(out, incumbent);
  if (memo && upgrade_weights(out, *memo, incumbent) > 0) filter(out, incumbent);
  filter(d, incumbent);
  if (!diagram_empty(d) && memo && upgrade_weights(d, *memo, incumbent) > 0) {
    filter(d, incumbent);
  }
  return out;
}

std::vector<int> shortest_path_nodes(const Diagram& d) {
  if (diagram_empty(d)) return {};
  std::vector<int> path{d.root};
  int cursor = d.root;
  while (cursor != d.terminal) {
    const DDNode& v = d.nodes[cursor];
    int best_arc = -1;
    double best = kInf;
    for (int arc_id : v.out_arcs) {
      const DDArc& a = d.arcs[arc_id];
      const double value = a.weight + d.nodes[a.to].z_up;
      if (value < best || (value == best && best_arc >= 0 && arc_id < best_arc)) {
        best = value;
        best_arc = arc_id;
      }
    }
    if (best_arc < 0) throw StructureError("shortest path: dead end");
    cursor = d.arcs[best_arc].to;
    path.push_back(cursor);
  }
  return path;
}

int refine(Diagram& d, double incumbent, const BoundMemo* memo) {
  int splits = 0;
  filter(d, incumbent);
  if (memo && !diagram_empty(d) && upgrade_weights(d, *memo, incumbent) > 0) {
    filter(d, incumbent);
  }
  const long safety_cap =
      static_cast<long>(d.n + 2) * std::max(1, d.width_cap) + 16;
  for (long round = 0; round < safety_cap; ++round) {
    if (diagram_empty(d)) break;
    if (shortest_path_value(d) >= incumbent - kTol) break;
    const std::vector<int> path = shortest_path_nodes(d);
    bool split_done = false;
    for (std::size_t idx = 1; idx + 1 < path.size(); ++idx) {
      DDNode& u = d.nodes[path[idx]];
      if (u.exact || u.in_arcs.size() < 2) continue;
      if (static_cast<int>(d.layers[u.layer].size()) >= d.width_cap) continue;
      const int phi = d.nodes[path[idx - 1]].label;
      if (split_node(d, path[idx], phi) < 0) continue;
      ++splits;
      filter(d, incumbent);
      if (memo && !diagram_empty(d) &&
          upgrade_weights(d, *memo, incumbent) > 0) {
        filter(d, incumbent);
      }
      split_done = true;
      break;
    }
    if (!split_done) break;
  }
  return splits;
}

int extend_exact_prefix(Diagram& d, SolutionTrie& trie, int multi) {
  if (diagram_empty(d)) return -1;
  const std::vector<int> path = shortest_path_nodes(d);
  std::vector<int> prefix{d.nodes[d.root].label};
  int deepest = d.root;
  bool dirty = false;
  for (std::size_t idx = 1; idx + 1 < path.size(); ++idx) {
    DDNode& v = d.nodes[path[idx]];
    prefix.push_back(v.label);
    if (v.exact) {
      deepest = v.id;
      continue;
    }
    if (v.in_arcs.size() != 1) break;
    DDArc& a = d.arcs[v.in_arcs[0]];
    if (!d.nodes[a.from].exact) break;
    const SolutionTrie::Value value = trie.evaluate(prefix, multi);
    if (!value.feasible) {
      // The relaxation kept a leg that cannot actually be flown.
      d.remove_arc(a.id);
      dirty = true;
      break;
    }
    const SolutionTrie::Node* entry = trie.lookup(prefix);
    a.weight = entry->leg_cost;
    a.exact = true;
    a.arrival = value.est;
    v.exact = true;
    v.est = value.est;
    deepest = v.id;
    dirty = true;
  }
  if (dirty) filter(d);
  return d.nodes[deepest].alive ? deepest : -1;
}

std::vector<std::vector<int>> enumerate_paths(const Diagram& d) {
  std::vector<std::vector<int>> paths;
  if (diagram_empty(d)) return paths;
  std::vector<int> current;
  std::function<void(int)> walk = [&](int id) {
    if (id == d.terminal) {
      paths.push_back(current);
      return;
    }
    for (int arc_id : d.nodes[id].out_arcs) {
      const DDArc& a = d.arcs[arc_id];
      if (a.label >= 0) current.push_back(a.label);
      walk(a.to);
      if (a.label >= 0) current.pop_back();
    }
  };
  walk(d.root);
  return paths;
}

std::string to_debug_text(const Diagram& d) {
  std::string text;
  char line[256];
  for (const auto& layer : d.layers) {
    for (int id : layer) {
      const DDNode& v = d.nodes[id];
      std::snprintf(line, sizeof(line),
                    "node id=%d layer=%d label=%d zdown=%.9g zup=%.9g "
                    "est=%.9g exact=%d\n",
                    v.id, v.layer, v.label, v.z_down, v.z_up, v.est,
                    v.exact ? 1 : 0);
      text += line;
    }
  }
  for (const auto& a : d.arcs) {
    if (!a.alive) continue;
    std::snprintf(line, sizeof(line),
                  "arc id=%d from=%d to=%d label=%d w=%.9g lo=%.9g hi=%.9g "
                  "exact=%d src=%d\n",
                  a.id, a.from, a.to, a.label, a.weight, a.window_lo,
                  a.window_hi, a.exact ? 1 : 0, a.source_arc);
    text += line;
  }
  return text;
}

}  // namespace arp

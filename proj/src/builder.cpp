#include "arp/builder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

namespace arp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Diagram build_structure(const Instance& instance, int width_cap) {
  const int n = instance.n();
  if (n < 2) {
    throw ValidationError("build_structure: need at least two asteroids");
  }
  Diagram d;
  d.n = n;
  d.width_cap = width_cap;
  d.layers.resize(n + 2);
  d.root = d.add_node(0, 0);
  for (int layer = 1; layer <= n; ++layer) {
    for (int label = 1; label <= n; ++label) d.add_node(layer, label);
  }
  d.terminal = d.add_node(n + 1, -1);

  for (int id : d.layers[1]) {
    d.add_arc(d.root, id, d.nodes[id].label, 0.0, 0.0, 0.0);
  }
  for (int layer = 1; layer < n; ++layer) {
    for (int from : d.layers[layer]) {
      for (int to : d.layers[layer + 1]) {
        if (d.nodes[from].label == d.nodes[to].label) continue;
        d.add_arc(from, to, d.nodes[to].label, 0.0, 0.0, 0.0);
      }
    }
  }
  for (int id : d.layers[n]) {
    d.add_arc(id, d.terminal, -1, 0.0, 0.0, 0.0);
  }
  return d;
}

void weight_phase_one(Diagram& d, const Instance& instance, BoundMemo& memo,
                      int multi) {
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const TransferEvaluator& evaluator = memo.trie.evaluator();
  const int n = d.n;

  // Root legs depart at mission start, so their costs and arrivals are
  // the true values.
  std::vector<double> arrival(n + 1, kInf);
  const std::vector<int> layer1 = d.layers[1];
  for (int id : layer1) {
    const int label = d.nodes[id].label;
    const SolutionTrie::Value val = memo.trie.evaluate({0, label}, multi);
    if (!val.feasible) {
      d.remove_node(id);
      continue;
    }
    DDArc& root_arc = d.arcs[d.nodes[id].in_arcs[0]];
    root_arc.weight = val.cost;
    root_arc.exact = true;
    root_arc.arrival = val.est;
    arrival[label] = val.est;
  }

  // One horizon-wide bound per ordered pair, reused by every deeper arc
  // between those labels.
  const double horizon_tf =
      n * (instance.tau_max + instance.t_max) - instance.t_max;
  std::vector<std::vector<double>> pair_z(n + 1,
                                          std::vector<double>(n + 1, 0.0));
  for (int a = 1; a <= n; ++a) {
    if (!std::isfinite(arrival[a])) continue;
    for (int b = 1; b <= n; ++b) {
      if (b == a) continue;
      TransferQuery q;
      q.from = a;
      q.to = b;
      q.eta = arrival[a];
      q.tau_max = instance.tau_max;
      q.t_max = instance.t_max;
      q.tau_f = horizon_tf;
      q.multi = multi;
      const TransferResult res = evaluator.best_transfer_relaxed(q);
      const double bound = res.feasible ? res.z : 0.0;
      pair_z[a][b] = bound;
      memo.insert_bound(a, b, arrival[a], arrival[a] + horizon_tf, bound);
    }
  }

  for (int layer = 1; layer < n; ++layer) {
    for (int id : d.layers[layer]) {
      const int from_label = d.nodes[id].label;
      for (int arc_id : d.nodes[id].out_arcs) {
        DDArc& a = d.arcs[arc_id];
        if (a.label < 0) continue;
        a.weight = pair_z[from_label][a.label];
        a.window_lo = arrival[from_label];
        a.window_hi = arrival[from_label] + horizon_tf;
      }
    }
  }
  filter(d);
}

std::pair<Tour, double> nearest_neighbor_tour(const Instance& instance,
                                              BoundMemo& memo, int multi) {
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const int n = instance.n();
  Tour tour{0};
  std::vector<bool> visited(n + 1, false);
  double epoch = instance.mission_start;
  int current = 0;
  for (int step = 0; step < n; ++step) {
    const BodyState here = propagate(instance.bodies[current], epoch);
    std::vector<std::pair<double, int>> order;
    for (int body = 1; body <= n; ++body) {
      if (visited[body]) continue;
      const BodyState there = propagate(instance.bodies[body], epoch);
      order.emplace_back((there.position - here.position).norm(), body);
    }
    std::sort(order.begin(), order.end());
    int chosen = -1;
    double chosen_arrival = 0.0;
    for (const auto& [distance, body] : order) {
      Tour probe = tour;
      probe.push_back(body);
      const SolutionTrie::Value val = memo.trie.evaluate(probe, multi);
      if (val.feasible) {
        chosen = body;
        chosen_arrival = val.est;
        break;
      }
    }
    if (chosen < 0) return {tour, kInf};
    tour.push_back(chosen);
    visited[chosen] = true;
    current = chosen;
    epoch = chosen_arrival;
  }
  return {tour, memo.trie.evaluate(tour, multi).cost};
}

void weight_phase_two(Diagram& d, const Instance& instance, BoundMemo& memo,
                      double incumbent, int multi, bool naive_windows) {
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const TransferEvaluator& evaluator = memo.trie.evaluator();
  const int n = d.n;
  const bool naive = naive_windows || !std::isfinite(incumbent);
  const double per_day = 1.0 / Constants::time_cost_rate;
  recompute_bounds(d);
  recompute_labels(d);

  for (int layer = 1; layer < n; ++layer) {
    for (int id : std::vector<int>(d.layers[layer])) {
      const std::vector<int> outs = d.nodes[id].out_arcs;
      for (int arc_id : outs) {
        DDArc& a = d.arcs[arc_id];
        if (a.label < 0) continue;
        double tau_f;
        if (naive) {
          tau_f = layer * (instance.tau_max + instance.t_max) +
                  instance.tau_max;
        } else {
          const double slack =
              incumbent - d.nodes[id].z_down - d.nodes[a.to].z_up;
          tau_f = slack * per_day;
          if (tau_f < 0.0) {
            d.remove_arc(arc_id);
            continue;
          }
        }
        TransferQuery q;
        q.from = d.nodes[id].label;
        q.to = a.label;
        q.eta = d.nodes[id].est;
        q.tau_max = instance.tau_max;
        q.t_max = instance.t_max;
        q.tau_f = tau_f;
        q.multi = multi;
        const TransferResult res = evaluator.best_transfer_relaxed(q);
        if (!res.feasible) {
          d.remove_arc(arc_id);
          continue;
        }
        memo.insert_bound(q.from, a.label, q.eta, q.eta + tau_f, res.z);
        if (res.z > a.weight) {
          a.weight = res.z;
          a.window_lo = q.eta;
          a.window_hi = q.eta + tau_f;
        }
      }
    }
    // Deeper windows must see the strengthened bounds below them.
    for (int id : d.layers[layer + 1]) {
      DDNode& v = d.nodes[id];
      v.z_down = kInf;
      for (int arc_id : v.in_arcs) {
        const DDArc& a = d.arcs[arc_id];
        v.z_down = std::min(v.z_down, d.nodes[a.from].z_down + a.weight);
      }
    }
  }
  filter(d, incumbent);
}

int est_eat_refine(Diagram& d, const Instance& instance, BoundMemo& memo,
                   double incumbent, int multi) {
  if (!std::isfinite(incumbent)) return 0;
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const TransferEvaluator& evaluator = memo.trie.evaluator();
  recompute_bounds(d);
  recompute_labels(d);

  const double theta_full = instance.tau_max + instance.t_max;
  int updated = 0;
  bool pruned = false;
  for (std::size_t layer = 1; layer + 1 < d.layers.size(); ++layer) {
    for (int id : std::vector<int>(d.layers[layer])) {
      DDNode& v = d.nodes[id];
      if (!v.alive || v.exact || v.in_arcs.size() != 1) continue;
      const DDArc& a = d.arcs[v.in_arcs[0]];
      const DDNode& u = d.nodes[a.from];
      if (u.label < 0 || !std::isfinite(u.z_down) || !std::isfinite(v.z_up)) {
        continue;
      }
      const double budget = incumbent - u.z_down - v.z_up;
      if (budget < 0.0) continue;  // the cost rule handles this arc

      TransferQuery q;
      q.from = u.label;
      q.to = v.label;
      q.eta = u.est;
      q.tau_max = instance.tau_max;
      q.t_max = instance.t_max;
      q.multi = multi;

      q.theta = theta_full;
      const TransferResult widest = evaluator.best_transfer_capped(q);
      if (!widest.feasible || widest.z > budget + 1e-12) {
        d.remove_arc(a.id);
        pruned = true;
        continue;
      }
      double lo = 0.0, hi = theta_full;
      for (int step = 0; step < 40 && hi - lo > 1e-3; ++step) {
        q.theta = 0.5 * (lo + hi);
        const TransferResult res = evaluator.best_transfer_capped(q);
        if (res.feasible && res.z <= budget + 1e-12) {
          hi = *q.theta;
        } else {
          lo = *q.theta;
        }
      }
      // lo never exceeds the true least total time that fits the budget.
      if (u.est + lo > v.est + 1e-12) {
        v.est = u.est + lo;
        ++updated;
      }
    }
  }
  if (pruned) filter(d, incumbent);
  return updated;
}

BuildReport build_initial(Diagram& d, const Instance& instance,
                          BoundMemo& memo, const BuildConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const TransferEvaluator& evaluator = memo.trie.evaluator();
  BuildReport report;

  d = build_structure(instance, config.width);
  const std::int64_t b0 = evaluator.full_calls();
  const std::int64_t r0 = evaluator.relaxed_calls();
  weight_phase_one(d, instance, memo, config.multi);
  report.phase1_calls = (evaluator.full_calls() - b0) +
                        (evaluator.relaxed_calls() - r0);

  const auto [nn, nn_cost] = nearest_neighbor_tour(instance, memo,
                                                   config.multi);
  report.nn_tour = nn;
  report.initial_ub = nn_cost;

  const std::int64_t r1 = evaluator.relaxed_calls();
  weight_phase_two(d, instance, memo, nn_cost, config.multi,
                   config.naive_windows);
  report.phase2_calls = evaluator.relaxed_calls() - r1;

  if (config.est_eat) {
    report.est_eat_updates =
        est_eat_refine(d, instance, memo, nn_cost, config.multi);
  }
  filter(d, nn_cost);
  report.initial_lb = shortest_path_value(d);
  report.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace arp

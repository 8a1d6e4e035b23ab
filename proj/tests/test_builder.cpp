#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "arp/builder.hpp"
#include "arp/diagram.hpp"
#include "arp/instance.hpp"
#include "test_util.hpp"

using namespace arp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Greedy chain reimplemented straight from the rule: fly to the nearest
// unvisited body at the current epoch, next-nearest when a leg cannot be
// flown. Bit-identical arithmetic, no caching.
std::pair<Tour, double> greedy_oracle(const Instance& inst,
                                      const TransferEvaluator& eval) {
  const int n = inst.n();
  Tour tour{0};
  std::vector<bool> used(n + 1, false);
  double epoch = inst.mission_start, total = 0.0;
  int current = 0;
  for (int step = 0; step < n; ++step) {
    const BodyState here = propagate(inst.bodies[current], epoch);
    std::vector<std::pair<double, int>> order;
    for (int body = 1; body <= n; ++body) {
      if (used[body]) continue;
      const BodyState there = propagate(inst.bodies[body], epoch);
      order.emplace_back((there.position - here.position).norm(), body);
    }
    std::sort(order.begin(), order.end());
    int chosen = -1;
    TransferResult leg;
    for (const auto& [distance, body] : order) {
      TransferQuery q;
      q.from = current;
      q.to = body;
      q.eta = epoch;
      q.tau_max = inst.tau_max;
      q.t_max = inst.t_max;
      const TransferResult r = eval.best_transfer(q);
      if (r.feasible) {
        chosen = body;
        leg = r;
        break;
      }
    }
    if (chosen < 0) return {tour, kInf};
    tour.push_back(chosen);
    used[chosen] = true;
    total += leg.z;
    epoch += leg.tau + leg.t;
    current = chosen;
  }
  return {tour, total};
}

}  // namespace

TEST_CASE("phase one: true root legs, one horizon bound per ordered pair") {
  const Instance inst = generate(4, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 64);

  const auto relaxed0 = eval.relaxed_calls();
  weight_phase_one(d, inst, memo, 1);
  CHECK(eval.relaxed_calls() - relaxed0 == 4 * 4 - 4);

  for (int id : d.layers[1]) {
    const DDNode& v = d.nodes[id];
    TransferQuery q;
    q.from = 0;
    q.to = v.label;
    q.eta = 0.0;
    q.tau_max = inst.tau_max;
    q.t_max = inst.t_max;
    const TransferResult leg = eval.best_transfer(q);
    REQUIRE(leg.feasible);
    const DDArc& root_arc = d.arcs[v.in_arcs[0]];
    CHECK(root_arc.weight == leg.z);
    CHECK(root_arc.exact);
    CHECK(root_arc.arrival == leg.tau + leg.t);
    CHECK(v.exact);
    CHECK(v.est == leg.tau + leg.t);
  }
}

TEST_CASE("phase-one pair bounds hold across their whole departure window") {
  const Instance inst = generate(4, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 64);
  weight_phase_one(d, inst, memo, 1);

  const double horizon_tf =
      4 * (inst.tau_max + inst.t_max) - inst.t_max;
  TestRng rng(55);
  for (int a = 1; a <= 4; ++a) {
    const auto* prefix = memo.trie.lookup({0, a});
    REQUIRE(prefix != nullptr);
    for (int b = 1; b <= 4; ++b) {
      if (b == a) continue;
      double stored = 0.0;
      REQUIRE(memo.query_bound(a, b, prefix->est, prefix->est, stored));
      for (int sample = 0; sample < 10; ++sample) {
        // any real leg whose departures stay inside the window
        const double eta = prefix->est +
                           rng.uniform(0.0, horizon_tf - inst.tau_max);
        TransferQuery q;
        q.from = a;
        q.to = b;
        q.eta = eta;
        q.tau_max = inst.tau_max;
        q.t_max = inst.t_max;
        const TransferResult real = eval.best_transfer(q);
        if (real.feasible) CHECK(stored <= real.z + 1e-9);
      }
    }
  }
}

TEST_CASE("nearest neighbor matches the greedy oracle bitwise") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Instance inst = generate(5, seed);
    TransferEvaluator eval(inst.bodies);
    BoundMemo memo(eval);
    const auto [tour, cost] = nearest_neighbor_tour(inst, memo, 1);

    TransferEvaluator oracle_eval(inst.bodies);
    const auto [want_tour, want_cost] = greedy_oracle(inst, oracle_eval);
    CHECK(tour == want_tour);
    CHECK(cost == want_cost);
    REQUIRE(std::isfinite(cost));
    CHECK_NOTHROW(validate_tour(inst, tour));
    CHECK(evaluate_tour(inst, tour, memo) == cost);
  }
}

TEST_CASE("phase two issues one window query per surviving inner arc") {
  const Instance inst = generate(5, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d;
  BuildConfig config;
  const BuildReport report = build_initial(d, inst, memo, config);

  CHECK(report.phase1_calls == 5 * 5);
  CHECK(report.phase2_calls == 5 * 5 * 5 - 2 * 5 * 5 + 5);
  CHECK(report.initial_lb <= report.initial_ub + 1e-9);
  CHECK(std::isfinite(report.initial_ub));
  CHECK(report.wall_s >= 0.0);
  CHECK_NOTHROW(validate_tour(inst, report.nn_tour));
}

TEST_CASE("phase two only strengthens the relaxation") {
  const Instance inst = generate(5, 4);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 64);
  weight_phase_one(d, inst, memo, 1);
  const double v1 = shortest_path_value(d);

  const auto [nn, nn_cost] = nearest_neighbor_tour(inst, memo, 1);
  REQUIRE(std::isfinite(nn_cost));
  weight_phase_two(d, inst, memo, nn_cost, 1, false);
  const double v2 = shortest_path_value(d);
  CHECK(v2 >= v1 - 1e-9);
  CHECK(v2 <= nn_cost + 1e-9);

  // stored bounds are identical to a fresh recomputation
  std::map<int, double> stored;
  for (const auto& v : d.nodes) {
    if (v.alive) stored[v.id] = v.z_down;
  }
  recompute_bounds(d);
  for (const auto& [id, z] : stored) CHECK(d.nodes[id].z_down == z);
}

TEST_CASE("incumbent windows dominate the naive ones") {
  const Instance inst = generate(5, 6);

  TransferEvaluator eval_naive(inst.bodies);
  BoundMemo memo_naive(eval_naive);
  Diagram naive;
  BuildConfig config_naive;
  config_naive.naive_windows = true;
  build_initial(naive, inst, memo_naive, config_naive);

  TransferEvaluator eval_inc(inst.bodies);
  BoundMemo memo_inc(eval_inc);
  Diagram sharp;
  BuildConfig config_inc;
  const BuildReport report = build_initial(sharp, inst, memo_inc, config_inc);

  // same incumbent, narrower departure windows: at least as strong
  CHECK(shortest_path_value(sharp) >=
        shortest_path_value(naive) - 1e-9);
  CHECK(shortest_path_value(naive) <= report.initial_ub + 1e-9);
}

TEST_CASE("arrival refinement brackets the one-day grid oracle") {
  const Instance inst = generate(2, 3);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 64);
  weight_phase_one(d, inst, memo, 1);
  const auto [nn, nn_cost] = nearest_neighbor_tour(inst, memo, 1);
  REQUIRE(std::isfinite(nn_cost));
  weight_phase_two(d, inst, memo, nn_cost, 1, false);
  const double incumbent = nn_cost + 5.0;  // headroom so budgets stay open
  filter(d, incumbent);

  // snapshot the single-parent merged nodes before refining
  struct Probe {
    int id, from_label, to_label;
    double u_est, old_est, budget;
  };
  std::vector<Probe> probes;
  for (std::size_t layer = 1; layer + 1 < d.layers.size(); ++layer) {
    for (int id : d.layers[layer]) {
      const DDNode& v = d.nodes[id];
      if (v.exact || v.in_arcs.size() != 1) continue;
      const DDNode& u = d.nodes[d.arcs[v.in_arcs[0]].from];
      probes.push_back({id, u.label, v.label, u.est, v.est,
                        incumbent - u.z_down - v.z_up});
    }
  }
  REQUIRE(!probes.empty());

  const auto capped0 = eval.capped_calls();
  const int updated = est_eat_refine(d, inst, memo, incumbent, 1);
  CHECK(eval.capped_calls() > capped0);

  int expected_updates = 0;
  for (const Probe& probe : probes) {
    if (probe.budget < 0.0) continue;
    // smallest whole-day total time that fits the budget
    double theta_grid = kInf;
    for (int day = 1; day <= 1460; ++day) {
      TransferQuery q;
      q.from = probe.from_label;
      q.to = probe.to_label;
      q.eta = probe.u_est;
      q.tau_max = inst.tau_max;
      q.t_max = inst.t_max;
      q.theta = static_cast<double>(day);
      const TransferResult r = eval.best_transfer_capped(q);
      if (r.feasible && r.z <= probe.budget + 1e-12) {
        theta_grid = day;
        break;
      }
    }
    const DDNode& v = d.nodes[probe.id];
    if (!std::isfinite(theta_grid)) {
      CHECK(!v.alive);  // nothing fits: the arc had to go
      continue;
    }
    REQUIRE(v.alive);
    const double hi = std::max(probe.old_est, probe.u_est + theta_grid);
    const double lo = std::max(probe.old_est,
                               probe.u_est + theta_grid - 1.0 - 2e-3);
    CHECK(v.est <= hi + 1e-9);
    CHECK(v.est >= lo - 1e-9);
    if (v.est > probe.old_est + 1e-12) ++expected_updates;
  }
  CHECK(updated == expected_updates);
  CHECK(updated >= 1);
}

TEST_CASE("arrival refinement is skipped without an incumbent") {
  const Instance inst = generate(3, 9);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 64);
  weight_phase_one(d, inst, memo, 1);
  const auto calls = eval.capped_calls();
  CHECK(est_eat_refine(d, inst, memo, kInf, 1) == 0);
  CHECK(eval.capped_calls() == calls);
}

TEST_CASE("build_initial with refinement enabled stays coherent") {
  const Instance inst = generate(4, 8);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d;
  BuildConfig config;
  config.est_eat = true;
  const BuildReport report = build_initial(d, inst, memo, config);
  CHECK(report.est_eat_updates >= 0);
  CHECK(report.initial_lb <= report.initial_ub + 1e-9);
  // every alive inexact node still respects the one-day floor
  for (const auto& v : d.nodes) {
    if (!v.alive || v.exact || v.id == d.root) continue;
    if (v.id == d.terminal) continue;
    CHECK(v.est >= 1.0 - 1e-12);
  }
}

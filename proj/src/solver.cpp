#include "arp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "arp/search.hpp"

namespace arp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int select_diagram(const std::vector<QueueEntry>& queue, QueueOrder order) {
  if (queue.empty()) return -1;
  int best = 0;
  for (int i = 1; i < static_cast<int>(queue.size()); ++i) {
    const QueueEntry& a = queue[i];
    const QueueEntry& b = queue[best];
    bool better;
    if (order == QueueOrder::worst_bound) {
      better = a.vstar < b.vstar || (a.vstar == b.vstar && a.seq < b.seq);
    } else {
      better = a.depth > b.depth ||
               (a.depth == b.depth &&
                (a.vstar < b.vstar || (a.vstar == b.vstar && a.seq < b.seq)));
    }
    if (better) best = i;
  }
  return best;
}

int select_exact_node(const Diagram& d, PeelStrategy strategy) {
  const std::vector<int> path = shortest_path_nodes(d);
  int first = -1, last = -1;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const DDNode& v = d.nodes[path[i]];
    if (!v.exact) break;  // exactness is contiguous from the root
    if (d.layers[v.layer].size() < 2) continue;  // peel would separate nothing
    if (first < 0) first = path[i];
    last = path[i];
  }
  return strategy == PeelStrategy::maximal ? first : last;
}

SolveResult peel_and_bound(const Instance& instance,
                           const SolverConfig& config, BoundMemo& memo,
                           const QueueObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  const TransferEvaluator& evaluator = memo.trie.evaluator();
  const std::int64_t b_start = evaluator.full_calls();
  const std::int64_t r_start = evaluator.relaxed_calls();
  const double tol = config.tolerance;
  const int n = instance.n();

  SolveResult res;
  double last_lb = -kInf, last_ub = kInf;
  const auto emit = [&](double lb, double ub, int queue_len) {
    res.trace.push_back({elapsed(), lb, ub, queue_len,
                         static_cast<long>(evaluator.full_calls() - b_start),
                         static_cast<long>(evaluator.relaxed_calls() - r_start)});
    last_lb = lb;
    last_ub = ub;
  };

  if (n == 1) {
    const SolutionTrie::Value val = memo.trie.evaluate({0, 1}, config.multi);
    res.tour = {0, 1};
    res.cost = val.cost;
    res.lb = val.cost;
    res.proven_optimal = true;
    emit(res.lb, res.cost, 0);
    res.b_calls = evaluator.full_calls() - b_start;
    res.wall_s = elapsed();
    return res;
  }

  Diagram initial;
  res.build = build_initial(initial, instance, memo,
                            {config.dd_width, config.multi, config.est_eat,
                             config.naive_windows});
  const std::int64_t r_built = evaluator.relaxed_calls();
  const std::int64_t c_built = evaluator.capped_calls();

  double ub = res.build.initial_ub;
  Tour best_tour = res.build.nn_tour;
  double lb = std::min(res.build.initial_lb, ub);

  std::vector<QueueEntry> queue;
  long seq = 0;
  const double v0 = shortest_path_value(initial);
  if (std::isfinite(v0) && v0 < ub - tol) {
    queue.push_back({std::move(initial), v0, 0, seq++});
  }
  emit(lb, ub, static_cast<int>(queue.size()));

  const auto notify = [&] {
    if (!observer) return;
    std::vector<const Diagram*> view;
    view.reserve(queue.size());
    for (const QueueEntry& e : queue) view.push_back(&e.d);
    observer(view, ub);
  };
  notify();

  const auto update_lb = [&] {
    double qmin = ub;
    for (const QueueEntry& e : queue) qmin = std::min(qmin, e.vstar);
    lb = std::max(lb, std::min(qmin, ub));
  };
  const auto maybe_emit = [&] {
    if (lb != last_lb || ub != last_ub) {
      emit(lb, ub, static_cast<int>(queue.size()));
    }
  };

  bool timed_out = false;
  while (!queue.empty()) {
    if (elapsed() > config.time_limit_s) {
      timed_out = true;
      break;
    }
    const int pick = select_diagram(queue, config.queue);
    QueueEntry entry = std::move(queue[pick]);
    queue.erase(queue.begin() + pick);
    ++res.iterations;
    Diagram& d = entry.d;

    // The incumbent may have improved since this piece was queued.
    filter(d, ub);
    extend_exact_prefix(d, memo.trie, config.multi);
    const double v_now = shortest_path_value(d);
    if (!(std::isfinite(v_now) && v_now < ub - tol)) {
      update_lb();
      maybe_emit();
      notify();
      continue;
    }

    const int u = select_exact_node(d, config.peel);
    if (u < 0) {
      // Single chain: evaluate its one tour and retire the piece.
      const SearchResult sr =
          embedded_search(d, config.search_width, memo, config.multi);
      res.search_calls_max = std::max(res.search_calls_max, sr.b_calls);
      if (sr.found && sr.cost < ub - tol) {
        ub = sr.cost;
        best_tour = sr.tour;
      }
      update_lb();
      maybe_emit();
      notify();
      continue;
    }

    Diagram peeled = peel(d, u, &memo, ub);

    const double v_rem = shortest_path_value(d);
    if (std::isfinite(v_rem) && v_rem < ub - tol) {
      queue.push_back({std::move(d), v_rem, entry.depth, seq++});
    }

    const SearchResult sr =
        embedded_search(peeled, config.search_width, memo, config.multi);
    res.search_calls_max = std::max(res.search_calls_max, sr.b_calls);
    if (sr.found && sr.cost < ub - tol) {
      ub = sr.cost;
      best_tour = sr.tour;
    }

    if (!sr.exhaustive) {
      refine(peeled, ub, &memo);
      const double v_peel = shortest_path_value(peeled);
      if (std::isfinite(v_peel) && v_peel < ub - tol) {
        const int depth = peeled.root_depth;
        queue.push_back({std::move(peeled), v_peel, depth, seq++});
      }
    }

    update_lb();
    maybe_emit();
    notify();
  }

  res.proven_optimal = !timed_out;
  res.timed_out = timed_out;
  if (res.proven_optimal) lb = ub;
  res.lb = std::min(lb, ub);
  res.cost = ub;
  res.tour = best_tour;
  res.queue_remaining = static_cast<int>(queue.size());
  res.b_calls = evaluator.full_calls() - b_start;
  res.bprime_calls = evaluator.relaxed_calls() - r_start;
  res.bprime_calls_loop = evaluator.relaxed_calls() - r_built;
  res.capped_calls_loop = evaluator.capped_calls() - c_built;
  emit(res.lb, ub, res.queue_remaining);
  res.wall_s = elapsed();
  return res;
}

}  // namespace arp

#pragma once

#include <limits>
#include <utility>

#include "arp/diagram.hpp"
#include "arp/instance.hpp"
#include "arp/memo.hpp"

namespace arp {

struct BuildConfig {
  int width = 2048;
  int multi = 1;
  bool est_eat = false;
  bool naive_windows = false;  // per-layer horizon windows, ignores incumbent
};

struct BuildReport {
  long phase1_calls = 0;  // evaluations during phase one (root legs + pairs)
  long phase2_calls = 0;  // relaxed evaluations during the layer sweep
  double initial_lb = 0.0;
  double initial_ub = std::numeric_limits<double>::infinity();
  Tour nn_tour;
  int est_eat_updates = 0;
  double wall_s = 0.0;
};

/// Bare layered diagram over visit orders: root (Earth), n full inner
/// layers, single terminal. Arcs connect nodes with differing labels;
/// terminal arcs carry weight 0. Throws ValidationError for n < 2.
Diagram build_structure(const Instance& instance, int width_cap);

/// Exact root-arc costs (departure epoch fixed at mission start) and
/// one relaxed bound per ordered body pair, valid across the whole
/// mission horizon, applied to every deeper arc. Layer-1 nodes become
/// exact with their true arrival epochs. All pair bounds land in `memo`.
void weight_phase_one(Diagram& d, const Instance& instance, BoundMemo& memo,
                      int multi);

/// Greedy tour: repeatedly fly to the unvisited body closest in Euclidean
/// distance at the current arrival epoch (tie: lower index). Cost is the
/// true evaluated cost via the trie; an infeasible pick falls back to the
/// next-closest body.
std::pair<Tour, double> nearest_neighbor_tour(const Instance& instance,
                                              BoundMemo& memo, int multi);

/// One strengthening sweep over inner layers in order. Each arc gets a
/// relaxed bound over the departure window the incumbent still allows;
/// windows that close (negative slack) prune the arc instead. z_down is
/// refreshed layer by layer so deeper windows see the strengthened
/// bounds; z_up is rebuilt at the end. `naive_windows` replaces the
/// incumbent-driven window with the worst-case per-layer horizon.
void weight_phase_two(Diagram& d, const Instance& instance, BoundMemo& memo,
                      double incumbent, int multi, bool naive_windows = false);

/// Tightens est on single-parent inexact nodes by bisecting the smallest
/// total leg time whose capped cost still fits under the incumbent.
/// Arcs whose capped cost cannot fit are pruned. Returns nodes updated.
int est_eat_refine(Diagram& d, const Instance& instance, BoundMemo& memo,
                   double incumbent, int multi);

/// Full initial construction: structure, phase one, greedy incumbent,
/// phase two, optional est refinement, closing filter.
BuildReport build_initial(Diagram& d, const Instance& instance,
                          BoundMemo& memo, const BuildConfig& config);

}  // namespace arp

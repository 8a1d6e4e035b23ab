#include "arp/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace arp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Base-2 radical inverse: 0, 1/2, 1/4, 3/4, 1/8, ... Prefix sets nest.
double van_der_corput(unsigned index) {
  double x = 0.0, f = 0.5;
  while (index) {
    if (index & 1u) x += f;
    f *= 0.5;
    index >>= 1;
  }
  return x;
}

struct Point {
  double tau = 0.0;
  double t = 1.0;
  double z = kInf;
};

// Prefer lower cost, then shorter wait, then shorter travel.
bool better(const Point& a, const Point& b) {
  if (a.z != b.z) return a.z < b.z;
  if (a.tau != b.tau) return a.tau < b.tau;
  return a.t < b.t;
}

struct Box {
  double tau_hi = 0.0;    // tau in [0, tau_hi]
  double t_hi = 730.0;    // t in [1, t_hi]
  double theta = kInf;    // tau + t <= theta

  bool feasible(double tau, double t) const {
    return tau >= 0.0 && tau <= tau_hi && t >= 1.0 && t <= t_hi &&
           tau + t <= theta + 1e-12;
  }

  void project(double& tau, double& t) const {
    tau = std::clamp(tau, 0.0, tau_hi);
    t = std::clamp(t, 1.0, t_hi);
    if (tau + t > theta) {
      const double over = 0.5 * (tau + t - theta);
      tau = std::clamp(tau - over, 0.0, tau_hi);
      t = std::clamp(t - over, 1.0, t_hi);
      if (tau + t > theta) {
        tau = std::clamp(theta - t, 0.0, tau_hi);
        if (tau + t > theta) t = std::clamp(theta - tau, 1.0, t_hi);
      }
    }
  }
};

}  // namespace

TransferEvaluator::TransferEvaluator(std::vector<OrbitalElements> bodies)
    : bodies_(std::move(bodies)) {
  if (bodies_.size() < 2) {
    throw std::invalid_argument("TransferEvaluator: need at least two bodies");
  }
}

namespace {

// Shared by inner_cost and the scan loops so their results match bitwise.
InnerCost leg_between(const BodyState& s1, const BodyState& s2, double t,
                      double charged) {
  InnerCost out;
  try {
    const LambertSolution arc =
        lambert(s1.position, s2.position, t * Constants::day_seconds, true);
    out.delta_v = (arc.v_depart - s1.velocity).norm() +
                  (s2.velocity - arc.v_arrive).norm();
    out.z = out.delta_v + Constants::time_cost_rate * charged;
    out.feasible = true;
  } catch (const LambertGeometryError&) {
  } catch (const LambertConvergenceError&) {
  }
  return out;
}

}  // namespace

InnerCost TransferEvaluator::inner_cost(int from, int to, double eta,
                                        double tau, double t,
                                        bool waiting_free) const {
  if (from == to || from < 0 || to < 0 || from >= body_count() ||
      to >= body_count()) {
    throw std::invalid_argument("inner_cost: bad body pair");
  }
  if (!(t > 0.0) || tau < 0.0) {
    throw std::invalid_argument("inner_cost: need tau >= 0 and t > 0");
  }
  const double depart = eta + tau;
  const BodyState s1 = propagate(bodies_[from], depart);
  const BodyState s2 = propagate(bodies_[to], depart + t);
  return leg_between(s1, s2, t, waiting_free ? t : tau + t);
}

TransferResult TransferEvaluator::optimize(const TransferQuery& q,
                                           Mode mode) const {
  if (q.multi < 1) throw std::invalid_argument("transfer: multi must be >= 1");
  if (q.from == q.to) throw std::invalid_argument("transfer: from == to");

  Box box;
  box.t_hi = q.t_max;
  const bool waiting_free = mode == Mode::Relaxed;
  switch (mode) {
    case Mode::Full:
      box.tau_hi = q.tau_max;
      break;
    case Mode::Relaxed:
      if (!q.tau_f.has_value() || *q.tau_f < 0.0) {
        throw std::invalid_argument("transfer: relaxed query needs tau_f >= 0");
      }
      box.tau_hi = *q.tau_f;
      break;
    case Mode::Capped:
      if (!q.theta.has_value()) {
        throw std::invalid_argument("transfer: capped query needs theta");
      }
      box.tau_hi = q.tau_max;
      box.theta = *q.theta;
      break;
  }
  if (!(box.t_hi >= 1.0) || box.theta < 1.0) {
    return TransferResult{};  // empty feasible region
  }

  // The relaxed bound must not exceed the full optimum over the same box,
  // descent noise included. So relaxed queries run two passes: one
  // minimizing the wait-free objective, one replaying the full-objective
  // search point for point, recording delta_v + rate*t at every point
  // either pass evaluates. The recorded minimum inherits the guarantee.
  const int n_passes = waiting_free ? 2 : 1;
  Point waitfree_best{0.0, 1.0, kInf};
  const auto record = [&](double tau, double t, const InnerCost& ic) {
    if (!waiting_free || !ic.feasible) return;
    const Point p{tau, t, ic.delta_v + Constants::time_cost_rate * t};
    if (better(p, waitfree_best)) waitfree_best = p;
  };

  bool pass_free = waiting_free;
  const auto eval = [&](double tau, double t) -> double {
    const InnerCost ic =
        inner_cost(q.from, q.to, q.eta, tau, t, pass_free);
    record(tau, t, ic);
    return ic.z;
  };

  // Coarse deterministic scan. Wait resolution ~15 days up to 96 columns,
  // travel resolution fixed at 32 rows; body states are reused per column.
  const int n_tau =
      box.tau_hi <= 0.0
          ? 1
          : std::clamp(static_cast<int>(box.tau_hi / 15.0) + 2, 4, 96);
  const int n_t = box.t_hi <= 1.0 ? 1 : 32;

  Point best_pts[2][3];
  const auto offer = [&](Point (&ranked)[3], const Point& p) {
    for (int k = 0; k < 3; ++k) {
      if (better(p, ranked[k])) {
        for (int j = 2; j > k; --j) ranked[j] = ranked[j - 1];
        ranked[k] = p;
        break;
      }
    }
  };

  for (int col = 0; col < n_tau; ++col) {
    const double tau =
        n_tau == 1 ? 0.0 : box.tau_hi * col / static_cast<double>(n_tau - 1);
    const double depart = q.eta + tau;
    const BodyState s1 = propagate(bodies_[q.from], depart);
    for (int row = 0; row < n_t; ++row) {
      const double t =
          n_t == 1 ? 1.0
                   : 1.0 + (box.t_hi - 1.0) * row / static_cast<double>(n_t - 1);
      if (!box.feasible(tau, t)) continue;
      const BodyState s2 = propagate(bodies_[q.to], depart + t);
      const InnerCost ic = leg_between(s1, s2, t, tau + t);
      record(tau, t, ic);
      const double z_free = ic.delta_v + Constants::time_cost_rate * t;
      if (waiting_free) offer(best_pts[0], Point{tau, t, z_free});
      offer(best_pts[waiting_free ? 1 : 0],
            Point{tau, t, ic.feasible ? ic.z : kInf});
    }
  }

  // Projected quasi-Newton descent with central-difference gradients.
  const auto descend = [&](Point start) -> Point {
    double x0 = start.tau, x1 = start.t;
    box.project(x0, x1);
    double fx = (x0 == start.tau && x1 == start.t) ? start.z : eval(x0, x1);
    if (!std::isfinite(fx)) return start;
    Point best{x0, x1, fx};

    double h00 = 1.0, h01 = 0.0, h11 = 1.0;  // inverse Hessian estimate
    double prev_g0 = 0.0, prev_g1 = 0.0, prev_s0 = 0.0, prev_s1 = 0.0;
    bool have_prev = false;
    const double step_h = 1e-3;

    for (int iter = 0; iter < 80; ++iter) {
      const auto grad1d = [&](double lo, double hi, double v, auto f) {
        const double p = std::min(v + step_h, hi);
        const double m = std::max(v - step_h, lo);
        if (p <= m) return 0.0;
        const double fp = f(p), fm = f(m);
        if (std::isfinite(fp) && std::isfinite(fm)) return (fp - fm) / (p - m);
        if (std::isfinite(fp)) return (fp - fx) / (p - v);
        if (std::isfinite(fm)) return (fx - fm) / (v - m);
        return 0.0;
      };
      const double g0 =
          grad1d(0.0, box.tau_hi, x0, [&](double v) { return eval(v, x1); });
      const double g1 =
          grad1d(1.0, box.t_hi, x1, [&](double v) { return eval(x0, v); });

      if (have_prev) {
        // BFGS update of the inverse Hessian (2x2, Sherman-Morrison form)
        const double y0 = g0 - prev_g0, y1 = g1 - prev_g1;
        const double sy = prev_s0 * y0 + prev_s1 * y1;
        if (sy > 1e-12) {
          const double hy0 = h00 * y0 + h01 * y1;
          const double hy1 = h01 * y0 + h11 * y1;
          const double yhy = y0 * hy0 + y1 * hy1;
          const double c1 = (sy + yhy) / (sy * sy);
          const double c2 = 1.0 / sy;
          h00 += c1 * prev_s0 * prev_s0 - c2 * 2.0 * hy0 * prev_s0;
          h01 += c1 * prev_s0 * prev_s1 - c2 * (hy0 * prev_s1 + hy1 * prev_s0);
          h11 += c1 * prev_s1 * prev_s1 - c2 * 2.0 * hy1 * prev_s1;
        }
      }

      double d0 = -(h00 * g0 + h01 * g1);
      double d1 = -(h01 * g0 + h11 * g1);
      if (d0 * g0 + d1 * g1 >= 0.0) {  // not a descent direction; reset
        d0 = -g0;
        d1 = -g1;
        h00 = h11 = 1.0;
        h01 = 0.0;
      }

      double alpha = 1.0;
      double nx0 = x0, nx1 = x1, fn = fx;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls) {
        double c0 = x0 + alpha * d0, c1v = x1 + alpha * d1;
        box.project(c0, c1v);
        const double fc = eval(c0, c1v);
        if (std::isfinite(fc) && fc < fx) {
          nx0 = c0;
          nx1 = c1v;
          fn = fc;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;

      prev_s0 = nx0 - x0;
      prev_s1 = nx1 - x1;
      prev_g0 = g0;
      prev_g1 = g1;
      have_prev = true;

      const bool small_step =
          std::abs(prev_s0) < 1e-8 && std::abs(prev_s1) < 1e-8;
      const bool small_gain = std::abs(fx - fn) < 1e-8;
      x0 = nx0;
      x1 = nx1;
      fx = fn;
      if (better(Point{x0, x1, fx}, best)) best = Point{x0, x1, fx};
      if (small_step && small_gain) break;
    }
    return best;
  };

  Point pass_best{0.0, 1.0, kInf};
  for (int pass = 0; pass < n_passes; ++pass) {
    pass_free = waiting_free && pass == 0;
    Point best{0.0, 1.0, kInf};
    for (int k = 0; k < 3; ++k) {
      const Point& seed = best_pts[pass][k];
      if (!std::isfinite(seed.z)) continue;
      if (better(seed, best)) best = seed;
      const Point refined = descend(seed);
      if (better(refined, best)) best = refined;
    }

    // Restart descents: wait starts follow the van der Corput sequence,
    // the travel start is the best of a one-dimensional sweep at that wait.
    for (int restart = 0; restart < q.multi; ++restart) {
      const double tau0 =
          van_der_corput(static_cast<unsigned>(restart)) * box.tau_hi;
      Point start{tau0, 1.0, kInf};
      const BodyState s1 = propagate(bodies_[q.from], q.eta + tau0);
      for (int row = 0; row < n_t; ++row) {
        const double t =
            n_t == 1
                ? 1.0
                : 1.0 + (box.t_hi - 1.0) * row / static_cast<double>(n_t - 1);
        if (!box.feasible(tau0, t)) continue;
        const BodyState s2 = propagate(bodies_[q.to], q.eta + tau0 + t);
        const InnerCost ic = leg_between(s1, s2, t, tau0 + t);
        record(tau0, t, ic);
        const double z = pass_free
                             ? ic.delta_v + Constants::time_cost_rate * t
                             : (ic.feasible ? ic.z : kInf);
        if (better(Point{tau0, t, z}, start)) start = Point{tau0, t, z};
      }
      if (!std::isfinite(start.z)) continue;  // start discarded
      if (better(start, best)) best = start;
      const Point refined = descend(start);
      if (better(refined, best)) best = refined;
    }
    if (pass == 0) pass_best = best;
  }

  const Point best = waiting_free ? waitfree_best : pass_best;
  TransferResult out;
  if (std::isfinite(best.z)) {
    const InnerCost ic =
        inner_cost(q.from, q.to, q.eta, best.tau, best.t, waiting_free);
    out.tau = best.tau;
    out.t = best.t;
    out.z = best.z;
    out.delta_v = ic.delta_v;
    out.feasible = true;
  }
  return out;
}

TransferResult TransferEvaluator::best_transfer(const TransferQuery& q) const {
  full_calls_.fetch_add(1, std::memory_order_relaxed);
  return optimize(q, Mode::Full);
}

TransferResult TransferEvaluator::best_transfer_relaxed(
    const TransferQuery& q) const {
  relaxed_calls_.fetch_add(1, std::memory_order_relaxed);
  return optimize(q, Mode::Relaxed);
}

TransferResult TransferEvaluator::best_transfer_capped(
    const TransferQuery& q) const {
  capped_calls_.fetch_add(1, std::memory_order_relaxed);
  return optimize(q, Mode::Capped);
}

}  // namespace arp

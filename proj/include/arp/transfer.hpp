#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "arp/orbital.hpp"

namespace arp {

/// One leg query between body indices. Epochs and durations in days.
struct TransferQuery {
  int from = -1;
  int to = -1;
  double eta = 0.0;       // earliest departure epoch
  double tau_max = 730.0; // wait bound (full objective)
  double t_max = 730.0;   // travel-time bound
  std::optional<double> tau_f;  // wait bound for the relaxed objective
  std::optional<double> theta;  // total-time cap (capped objective)
  int multi = 1;                // restart count, >= 1
};

struct TransferResult {
  double tau = 0.0;
  double t = 1.0;
  double z = std::numeric_limits<double>::infinity();
  double delta_v = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

struct InnerCost {
  double z = std::numeric_limits<double>::infinity();
  double delta_v = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

/// Optimizes single legs over (wait, travel-time) boxes.
///
/// All three entry points share one deterministic machinery: a coarse
/// scan of the box, descents from the best scanned points, and one extra
/// descent per restart whose wait start follows the van der Corput
/// sequence. Restart sets are nested by construction, so raising `multi`
/// can only improve the result. Results are bit-identical across repeated
/// calls; the instance is evaluated lazily and never mutated, so callers
/// may issue queries concurrently.
class TransferEvaluator {
 public:
  explicit TransferEvaluator(std::vector<OrbitalElements> bodies);

  /// Cost of one fixed transfer: delta-v plus the time cost of
  /// (tau + t), or of t alone when waiting is free. Lambert failures
  /// surface as z = +infinity with feasible = false.
  InnerCost inner_cost(int from, int to, double eta, double tau, double t,
                       bool waiting_free) const;

  /// Full objective: min delta_v + rate*(tau + t), tau in [0, tau_max].
  TransferResult best_transfer(const TransferQuery& q) const;

  /// Wait-free objective over departure epochs [eta, eta + tau_f];
  /// a valid lower bound for any transfer departing inside the window.
  TransferResult best_transfer_relaxed(const TransferQuery& q) const;

  /// Full objective under the additional cap tau + t <= theta.
  TransferResult best_transfer_capped(const TransferQuery& q) const;

  std::int64_t full_calls() const { return full_calls_.load(); }
  std::int64_t relaxed_calls() const { return relaxed_calls_.load(); }
  std::int64_t capped_calls() const { return capped_calls_.load(); }

  int body_count() const { return static_cast<int>(bodies_.size()); }
  const OrbitalElements& body(int index) const { return bodies_.at(index); }

 private:
  enum class Mode { Full, Relaxed, Capped };
  TransferResult optimize(const TransferQuery& q, Mode mode) const;

  std::vector<OrbitalElements> bodies_;
  mutable std::atomic<std::int64_t> full_calls_{0};
  mutable std::atomic<std::int64_t> relaxed_calls_{0};
  mutable std::atomic<std::int64_t> capped_calls_{0};
};

}  // namespace arp

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arp/orbital.hpp"

namespace arp {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A routing problem: Earth at index 0 plus n asteroids at indices 1..n.
struct Instance {
  std::vector<std::string> names;       // names[0] == "Earth"
  std::vector<OrbitalElements> bodies;  // bodies[0] is Earth
  double tau_max = 730.0;               // per-leg wait bound, days
  double t_max = 730.0;                 // per-leg travel bound, days
  double mission_start = 0.0;           // departure epoch eta_1

  int n() const { return static_cast<int>(bodies.size()) - 1; }
};

/// A complete visit order: index 0 is Earth, then a permutation of 1..n.
using Tour = std::vector<int>;

/// Earth's default elements when a CSV carries no Earth row.
OrbitalElements earth_elements();

/// Deterministic synthetic instance.
///
/// Elements are derived from a splitmix64 stream seeded with `seed`;
/// asteroid k consumes six consecutive 53-bit uniform draws in the order
/// a, e, i, raan, argp, M0 and maps them affinely onto
/// a in [2.0, 3.5] au, e in [0, 0.25], i in [0, 10 deg], and
/// raan/argp/M0 in [0, 2 pi). The stream makes instances byte-identical
/// across platforms.
Instance generate(int n, std::uint64_t seed);

/// CSV round trip. Columns: name,a_km,e,i_rad,raan_rad,argp_rad,M0_rad,epoch_day.
/// Epochs are normalized on load so Earth sits at epoch 0.
Instance load_csv(const std::string& path);
void save_csv(const Instance& instance, const std::string& path);

/// Rejects tours that are not Earth followed by a permutation of 1..n.
void validate_tour(const Instance& instance, const Tour& tour);

struct BoundMemo;

/// True tour cost: legs are chained through the memo's solution trie, so
/// re-evaluating any previously seen prefix performs no new transfer
/// optimizations. Returns +infinity when some leg is infeasible.
double evaluate_tour(const Instance& instance, const Tour& tour,
                     BoundMemo& memo, int multi = 1);

}  // namespace arp

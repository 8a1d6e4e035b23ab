#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace arp {

/// Physical and unit constants used throughout the library.
///
/// All internal math runs in km, km/s and seconds; module boundaries
/// exchange epochs and durations in days.
struct Constants {
  static constexpr double mu_sun = 1.32712440018e11;  // km^3/s^2
  static constexpr double day_seconds = 86400.0;
  static constexpr double au_km = 1.495978707e8;
  // Cost of elapsed mission time in km/s per day, kept as an exact ratio.
  static constexpr double time_cost_rate = 2.0 / 30.0;
};

/// Classical heliocentric elements. Angles in radians, epoch in days.
struct OrbitalElements {
  double a_km = 0.0;    // semi-major axis, must be > 0 (elliptical only)
  double e = 0.0;       // eccentricity, 0 <= e < 1
  double i = 0.0;       // inclination
  double raan = 0.0;    // right ascension of ascending node
  double argp = 0.0;    // argument of perihelion
  double M0 = 0.0;      // mean anomaly at epoch
  double epoch = 0.0;   // reference epoch, days
};

/// Cartesian state at an epoch. Position km, velocity km/s, epoch days.
struct BodyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double epoch = 0.0;
};

/// Velocities at both ends of a ballistic transfer arc, km/s.
struct LambertSolution {
  Eigen::Vector3d v_depart = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_arrive = Eigen::Vector3d::Zero();
};

class KeplerError : public std::runtime_error {
 public:
  explicit KeplerError(const std::string& what) : std::runtime_error(what) {}
};

class LambertGeometryError : public std::runtime_error {
 public:
  explicit LambertGeometryError(const std::string& what)
      : std::runtime_error(what) {}
};

class LambertConvergenceError : public std::runtime_error {
 public:
  explicit LambertConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Solves E - e*sin(E) = M for the eccentric anomaly E.
///
/// The returned E keeps the same 2*pi revolution count as M, so the
/// residual |E - e*sin(E) - M| <= 1e-12 holds without angle reduction.
/// Throws KeplerError if Newton iteration fails to converge (50 steps).
double solve_kepler(double mean_anomaly, double e);

/// Two-body propagation of elliptical elements to an epoch given in days.
BodyState propagate(const OrbitalElements& elements, double epoch_day);

/// Single-revolution Lambert solver (Izzo-style Householder iteration).
///
/// tof is in seconds. Prograde selects motion direction about +z.
/// Transfer angles near zero throw LambertGeometryError: a conic through
/// two colinear points on the same ray is rectilinear. Angles near pi are
/// solved in the plane spanned by r1 and the projection of +z orthogonal
/// to r1; transfer speeds at pi do not depend on that choice.
/// Non-convergence within 60 iterations throws LambertConvergenceError.
LambertSolution lambert(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2,
                        double tof_s, bool prograde = true);

}  // namespace arp

#include "arp/orbital.hpp"

#include <cmath>
#include <limits>

namespace arp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_to_pi(double angle) {
  double wrapped = std::fmod(angle + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

}  // namespace

double solve_kepler(double mean_anomaly, double e) {
  if (!(e >= 0.0 && e < 1.0) || !std::isfinite(mean_anomaly)) {
    throw std::invalid_argument("solve_kepler: need finite M and 0 <= e < 1");
  }
  const double m = wrap_to_pi(mean_anomaly);
  const double shift = mean_anomaly - m;

  // Danby's starter, then Newton. Quadratic convergence everywhere on e < 1.
  double ec = m + 0.85 * e * (std::sin(m) >= 0.0 ? 1.0 : -1.0);
  for (int iter = 0; iter < 50; ++iter) {
    const double f = ec - e * std::sin(ec) - m;
    if (std::abs(f) <= 1e-14) return ec + shift;
    const double fp = 1.0 - e * std::cos(ec);
    const double step = f / fp;
    ec -= step;
    if (std::abs(step) <= 1e-15 && std::abs(f) <= 1e-13) return ec + shift;
  }
  const double residual = std::abs(ec - e * std::sin(ec) - m);
  if (residual <= 1e-12) return ec + shift;
  throw KeplerError("solve_kepler: no convergence, residual " +
                    std::to_string(residual));
}

BodyState propagate(const OrbitalElements& el, double epoch_day) {
  if (!(el.a_km > 0.0) || !(el.e >= 0.0 && el.e < 1.0)) {
    throw std::invalid_argument("propagate: elliptical elements required");
  }
  const double mu = Constants::mu_sun;
  const double n = std::sqrt(mu / (el.a_km * el.a_km * el.a_km));  // rad/s
  const double dt_s = (epoch_day - el.epoch) * Constants::day_seconds;
  const double mean = el.M0 + n * dt_s;
  const double ecc_anom = solve_kepler(mean, el.e);

  const double ce = std::cos(ecc_anom);
  const double se = std::sin(ecc_anom);
  const double b_over_a = std::sqrt(1.0 - el.e * el.e);
  const double r = el.a_km * (1.0 - el.e * ce);

  const Eigen::Vector3d r_pf(el.a_km * (ce - el.e), el.a_km * b_over_a * se,
                             0.0);
  const double vscale = std::sqrt(mu * el.a_km) / r;
  const Eigen::Vector3d v_pf(-vscale * se, vscale * b_over_a * ce, 0.0);

  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(el.raan, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(el.i, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(el.argp, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();

  return BodyState{rot * r_pf, rot * v_pf, epoch_day};
}

namespace {

// 2F1(3, 1, 5/2, x) by series; used by the time-of-flight expansion near x=1.
double hyp2f1b(double x) {
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  double cj = 1.0, res = 1.0;
  for (int j = 0; j < 200; ++j) {
    cj *= (3.0 + j) * (1.0 + j) / (2.5 + j) * x / (j + 1.0);
    res += cj;
    if (std::abs(cj) < 1e-15 * std::abs(res)) break;
  }
  return res;
}

// Non-dimensional time of flight for iterate x (single revolution).
double tof_from_x(double x, double lambda) {
  const double battin = 0.01, lagrange = 0.2;
  const double dist = std::abs(x - 1.0);
  if (dist < lagrange && dist > battin) {
    // Lagrange form
    const double a = 1.0 / (1.0 - x * x);
    if (a > 0.0) {
      const double alfa = 2.0 * std::acos(std::max(-1.0, std::min(1.0, x)));
      double beta = 2.0 * std::asin(std::sqrt(lambda * lambda / a));
      if (lambda < 0.0) beta = -beta;
      return a * std::sqrt(a) *
             ((alfa - std::sin(alfa)) - (beta - std::sin(beta))) / 2.0;
    }
    const double a_h = -a;
    const double alfa = 2.0 * std::acosh(x);
    double beta = 2.0 * std::asinh(std::sqrt(-lambda * lambda / a));
    if (lambda < 0.0) beta = -beta;
    return a_h * std::sqrt(a_h) *
           ((beta - std::sinh(beta)) - (alfa - std::sinh(alfa))) / 2.0;
  }
  const double e2 = x * x - 1.0;
  const double rho = std::abs(e2);
  const double z = std::sqrt(1.0 + lambda * lambda * e2);
  if (dist < battin) {
    // Battin series form, stable through x = 1
    const double eta = z - lambda * x;
    const double s1 = 0.5 * (1.0 - lambda - x * eta);
    const double q = 4.0 / 3.0 * hyp2f1b(s1);
    return (eta * eta * eta * q + 4.0 * lambda * eta) / 2.0;
  }
  // Lancaster form
  const double y = std::sqrt(rho);
  const double g = x * z - lambda * e2;
  double d;
  if (e2 < 0.0) {
    const double l = std::acos(std::max(-1.0, std::min(1.0, g)));
    d = l;
  } else {
    d = std::log(std::max(1e-300, y * (z - lambda * x) + g));
  }
  return (x - lambda * z - d / y) / e2;
}

void tof_derivatives(double x, double tof, double lambda, double& dt,
                     double& ddt, double& dddt) {
  const double l2 = lambda * lambda;
  const double l3 = l2 * lambda;
  const double umx2 = 1.0 - x * x;
  const double y = std::sqrt(1.0 - l2 * umx2);
  const double y2 = y * y;
  dt = 1.0 / umx2 * (3.0 * tof * x - 2.0 + 2.0 * l3 * x / y);
  ddt = 1.0 / umx2 * (3.0 * tof + 5.0 * x * dt + 2.0 * (1.0 - l2) * l3 / (y2 * y));
  dddt = 1.0 / umx2 *
         (7.0 * x * ddt + 8.0 * dt - 6.0 * (1.0 - l2) * l2 * l3 * x / (y2 * y2 * y));
}

}  // namespace

LambertSolution lambert(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2,
                        double tof_s, bool prograde) {
  if (!(tof_s > 0.0)) {
    throw std::invalid_argument("lambert: time of flight must be positive");
  }
  const double r1n = r1.norm();
  const double r2n = r2.norm();
  if (!(r1n > 0.0) || !(r2n > 0.0)) {
    throw std::invalid_argument("lambert: zero-length position vector");
  }

  const double cn = (r2 - r1).norm();
  const double s = 0.5 * (r1n + r2n + cn);
  double lambda = std::sqrt(std::max(0.0, 1.0 - cn / s));

  const Eigen::Vector3d ir1 = r1 / r1n;
  const Eigen::Vector3d ir2 = r2 / r2n;
  Eigen::Vector3d ih = ir1.cross(ir2);
  const double sin_theta = ih.norm();

  if (sin_theta < 1e-9) {
    if (ir1.dot(ir2) > 0.0) {
      throw LambertGeometryError("lambert: transfer angle ~ 0, plane and arc undefined");
    }
    // Antiparallel endpoints: every plane containing the line works and the
    // transfer speeds agree across them. Use the plane closest to prograde.
    Eigen::Vector3d ref = Eigen::Vector3d::UnitZ();
    ref -= ref.dot(ir1) * ir1;
    if (ref.norm() < 1e-12) {
      ref = Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitX().dot(ir1) * ir1;
    }
    ih = ref.normalized();
    lambda = 0.0;  // c == 2s at pi; keep it exact
  } else {
    ih /= sin_theta;
  }

  if (prograde) {
    if (ih.z() < 0.0) {
      lambda = -lambda;
      ih = -ih;
    }
  } else {
    if (ih.z() > 0.0) {
      lambda = -lambda;
      ih = -ih;
    }
  }

  const Eigen::Vector3d it1 = ih.cross(ir1);
  const Eigen::Vector3d it2 = ih.cross(ir2);

  const double mu = Constants::mu_sun;
  const double big_t = tof_s * std::sqrt(2.0 * mu / (s * s * s));

  // Initial guess (single revolution)
  const double t00 = std::acos(lambda) + lambda * std::sqrt(1.0 - lambda * lambda);
  const double t1 = 2.0 / 3.0 * (1.0 - lambda * lambda * lambda);
  double x;
  if (big_t >= t00) {
    x = std::pow(t00 / big_t, 2.0 / 3.0) - 1.0;
  } else if (big_t < t1) {
    x = 2.5 * t1 * (t1 - big_t) / (big_t * (1.0 - std::pow(lambda, 5.0))) + 1.0;
  } else {
    x = std::pow(big_t / t00, std::log(2.0) / std::log(t1 / t00)) - 1.0;
  }

  // Householder third-order iteration on the time-of-flight equation
  bool converged = false;
  for (int iter = 0; iter < 60; ++iter) {
    const double tof_x = tof_from_x(x, lambda);
    double dt, ddt, dddt;
    tof_derivatives(x, tof_x, lambda, dt, ddt, dddt);
    const double delta = tof_x - big_t;
    const double dt2 = dt * dt;
    const double xnew =
        x - delta * (dt2 - delta * ddt / 2.0) /
                (dt * (dt2 - delta * ddt) + dddt * delta * delta / 6.0);
    const double change = std::abs(x - xnew);
    x = xnew;
    if (!std::isfinite(x)) {
      throw LambertConvergenceError("lambert: iterate diverged");
    }
    if (change < 1e-13) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw LambertConvergenceError("lambert: no convergence in 60 iterations");
  }

  const double y = std::sqrt(1.0 - lambda * lambda * (1.0 - x * x));
  const double gamma = std::sqrt(mu * s / 2.0);
  const double rho = (r1n - r2n) / (cn > 0.0 ? cn : 1.0);
  const double sigma = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  const double vr1 = gamma * ((lambda * y - x) - rho * (lambda * y + x)) / r1n;
  const double vr2 = -gamma * ((lambda * y - x) + rho * (lambda * y + x)) / r2n;
  const double vt = gamma * sigma * (y + lambda * x);

  LambertSolution sol;
  sol.v_depart = vr1 * ir1 + (vt / r1n) * it1;
  sol.v_arrive = vr2 * ir2 + (vt / r2n) * it2;
  return sol;
}

}  // namespace arp

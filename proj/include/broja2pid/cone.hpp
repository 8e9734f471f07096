#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "broja2pid/errors.hpp"

namespace broja2pid {

/// One (r, p, q) block; in the exponential cone iff r <= q ln(p / q).
struct ConePoint {
  double r = 0.0;
  double p = 0.0;
  double q = 0.0;
};

/// One (u, v, w) block of the dual exponential cone.
struct DualConePoint {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

inline bool in_exp_cone(const ConePoint& pt, double tol) {
  if (pt.q > 0.0 && pt.q * std::exp(pt.r / pt.q) <= pt.p + tol) return true;
  return std::abs(pt.q) <= tol && pt.r <= tol && pt.p >= -tol;
}

inline bool in_dual_exp_cone(const DualConePoint& pt, double tol) {
  if (pt.u < 0.0 &&
      -pt.u * std::exp(pt.w / pt.u) <= std::numbers::e * pt.v + tol) {
    return true;
  }
  return std::abs(pt.u) <= tol && pt.v >= -tol && pt.w >= -tol;
}

/// Slack of the nonlinear inequality, q ln(p/q) - r. Only meaningful for
/// p, q > 0.
inline double cone_slack(const ConePoint& pt) {
  return pt.q * std::log(pt.p / pt.q) - pt.r;
}

struct BarrierEval {
  double value = 0.0;
  Eigen::Vector3d gradient;
  Eigen::Matrix3d hessian;
};

/// Degree of the barrier below (its logarithmic homogeneity parameter).
inline constexpr double kBarrierDegree = 3.0;

/// Value of -ln(q ln(p/q) - r) - ln p - ln q, or nullopt outside the open
/// cone.
inline std::optional<double> barrier_value(const ConePoint& pt) {
  if (!(pt.p > 0.0) || !(pt.q > 0.0)) return std::nullopt;
  const double s = cone_slack(pt);
  if (!(s > 0.0)) return std::nullopt;
  return -std::log(s) - std::log(pt.p) - std::log(pt.q);
}

/// Value, gradient and Hessian of the barrier, or nullopt outside the open
/// cone.
inline std::optional<BarrierEval> try_barrier(const ConePoint& pt) {
  const double p = pt.p;
  const double q = pt.q;
  if (!(p > 0.0) || !(q > 0.0)) return std::nullopt;
  const double lpq = std::log(p / q);
  const double s = q * lpq - pt.r;
  if (!(s > 0.0)) return std::nullopt;

  // Gradient of the slack s with respect to (r, p, q).
  const double ds_r = -1.0;
  const double ds_p = q / p;
  const double ds_q = lpq - 1.0;
  const double inv_s = 1.0 / s;
  const double inv_s2 = inv_s * inv_s;

  BarrierEval out;
  out.value = -std::log(s) - std::log(p) - std::log(q);
  out.gradient << -ds_r * inv_s, -ds_p * inv_s - 1.0 / p,
      -ds_q * inv_s - 1.0 / q;

  // H = grad s grad s^T / s^2 - hess s / s + diag(0, 1/p^2, 1/q^2), with
  // hess s = [[0,0,0],[0,-q/p^2,1/p],[0,1/p,-1/q]].
  Eigen::Matrix3d& h = out.hessian;
  h(0, 0) = inv_s2;
  h(0, 1) = ds_r * ds_p * inv_s2;
  h(0, 2) = ds_r * ds_q * inv_s2;
  h(1, 1) = ds_p * ds_p * inv_s2 + q / (p * p) * inv_s + 1.0 / (p * p);
  h(1, 2) = ds_p * ds_q * inv_s2 - inv_s / p;
  h(2, 2) = ds_q * ds_q * inv_s2 + inv_s / q + 1.0 / (q * q);
  h(1, 0) = h(0, 1);
  h(2, 0) = h(0, 2);
  h(2, 1) = h(1, 2);
  return out;
}

/// Throwing variant of try_barrier.
inline BarrierEval barrier(const ConePoint& pt) {
  if (auto b = try_barrier(pt)) return *b;
  throw BoundaryPoint("(" + std::to_string(pt.r) + ", " + std::to_string(pt.p) +
                      ", " + std::to_string(pt.q) + ") is not interior");
}

}  // namespace broja2pid

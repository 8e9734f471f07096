#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "broja2pid/model.hpp"
#include "broja2pid/solver.hpp"

namespace broja2pid {

/// Audit triple of a returned primal-dual pair:
///   [0] primal feasibility violation (>= 0),
///   [1] dual feasibility violation (<= 0),
///   [2] duality gap violation (>= 0).
struct NumErr {
  double primal_violation = 0.0;
  double dual_violation = 0.0;
  double gap_violation = 0.0;
  bool dual_domain_violation = false;

  double max_abs() const {
    return std::max({std::abs(primal_violation), std::abs(dual_violation),
                     std::abs(gap_violation)});
  }
};

inline constexpr double kDualDomainSentinel = -1e308;

/// delta = max( |q'_{x,y,*} - b_y|, |q'_{x,*,z} - b_z|, -q ) with q' the
/// positive part of q. Coupling rows are not audited.
inline double primal_violation(std::span<const double> q,
                               const ExpConeModel& model) {
  const auto cy = model.cells_y();
  const auto cz = model.cells_z();
  std::vector<double> sum_y(cy.size(), 0.0);
  std::vector<double> sum_z(cz.size(), 0.0);
  const int ny = static_cast<int>(cy.size());
  double delta = 0.0;
  for (int i = 0; i < model.num_triplets(); ++i) {
    const double qp = q[i] > 0.0 ? q[i] : 0.0;
    sum_y[model.row_y(i)] += qp;
    sum_z[model.row_z(i) - ny] += qp;
    delta = std::max(delta, -q[i]);
  }
  for (std::size_t k = 0; k < cy.size(); ++k) {
    delta = std::max(delta, std::abs(sum_y[k] - cy[k].p));
  }
  for (std::size_t k = 0; k < cz.size(); ++k) {
    delta = std::max(delta, std::abs(sum_z[k] - cz[k].p));
  }
  return delta;
}

struct DualViolation {
  double value = 0.0;
  bool domain_violation = false;
};

/// min over triplets of lam_xy + lam_xz + mu_{*,y,z} + 1 + ln(-mu_xyz),
/// clamped above at 0. A mu >= -1e-300 has no logarithm; it maps to the
/// sentinel -1e308 and raises the domain flag.
inline DualViolation dual_violation(const ExpConeModel& model,
                                    std::span<const double> lambda_y,
                                    std::span<const double> lambda_z,
                                    std::span<const double> mu) {
  const int ny = static_cast<int>(model.cells_y().size());
  std::vector<double> mu_star(model.num_yz_groups(), 0.0);
  for (int i = 0; i < model.num_triplets(); ++i) {
    mu_star[model.yz_group_of(i)] += mu[i];
  }
  DualViolation out;
  for (int i = 0; i < model.num_triplets(); ++i) {
    if (mu[i] >= -1e-300) {
      out.domain_violation = true;
      continue;
    }
    const double v = lambda_y[model.row_y(i)] + lambda_z[model.row_z(i) - ny] +
                     mu_star[model.yz_group_of(i)] + 1.0 + std::log(-mu[i]);
    out.value = std::min(out.value, v);
  }
  if (out.domain_violation) out.value = kDualDomainSentinel;
  return out;
}

/// -H(X|Y,Z) + lambda^T b before clamping, with H evaluated on the positive
/// part of q.
inline double gap_expression(std::span<const double> q,
                             std::span<const double> lambda_y,
                             std::span<const double> lambda_z,
                             const ExpConeModel& model) {
  std::vector<double> q_star(model.num_yz_groups(), 0.0);
  for (int i = 0; i < model.num_triplets(); ++i) {
    if (q[i] > 0.0) q_star[model.yz_group_of(i)] += q[i];
  }
  double neg_h = 0.0;
  for (int i = 0; i < model.num_triplets(); ++i) {
    if (q[i] > 0.0) neg_h += q[i] * std::log(q[i] / q_star[model.yz_group_of(i)]);
  }
  double lambda_b = 0.0;
  const auto cy = model.cells_y();
  const auto cz = model.cells_z();
  for (std::size_t k = 0; k < cy.size(); ++k) lambda_b += lambda_y[k] * cy[k].p;
  for (std::size_t k = 0; k < cz.size(); ++k) lambda_b += lambda_z[k] * cz[k].p;
  return neg_h + lambda_b;
}

inline double gap_violation(std::span<const double> q,
                            std::span<const double> lambda_y,
                            std::span<const double> lambda_z,
                            const ExpConeModel& model) {
  return std::max(gap_expression(q, lambda_y, lambda_z, model), 0.0);
}

inline NumErr audit(const PrimalDualSolution& sol, const ExpConeModel& model) {
  const auto q = sol.q();
  NumErr e;
  e.primal_violation = primal_violation(q, model);
  const auto dv = dual_violation(model, sol.dual.lambda_y, sol.dual.lambda_z,
                                 sol.dual.mu);
  e.dual_violation = dv.value;
  e.dual_domain_violation = dv.domain_violation;
  e.gap_violation = gap_violation(q, sol.dual.lambda_y, sol.dual.lambda_z, model);
  return e;
}

}  // namespace broja2pid

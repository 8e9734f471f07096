#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "broja2pid/cone.hpp"
#include "broja2pid/errors.hpp"
#include "broja2pid/kkt.hpp"
#include "broja2pid/model.hpp"

namespace broja2pid {

/// Tolerances and iteration budget. Names follow the usual conic-solver knobs.
struct SolverParams {
  double feastol = 1e-7;
  double abstol = 1e-6;
  double reltol = 1e-6;
  double feastol_inacc = 1e-3;
  double abstol_inacc = 1e-4;
  double reltol_inacc = 1e-4;
  int max_iter = 100;  // outer (barrier parameter) iterations
  KktBackend kkt = KktBackend::kAuto;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw InvalidParams(std::string(name) + " must be > 0");
    };
    positive(feastol, "feastol");
    positive(abstol, "abstol");
    positive(reltol, "reltol");
    positive(feastol_inacc, "feastol_inacc");
    positive(abstol_inacc, "abstol_inacc");
    positive(reltol_inacc, "reltol_inacc");
    if (feastol_inacc < feastol || abstol_inacc < abstol ||
        reltol_inacc < reltol) {
      throw InvalidParams("relaxed tolerances must not be tighter than strict ones");
    }
    if (max_iter < 1) throw InvalidParams("max_iter must be >= 1");
  }
};

enum class SolveStatus { kOptimal, kOptimalInaccurate, kMaxIterations, kNumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kOptimalInaccurate: return "OptimalInaccurate";
    case SolveStatus::kMaxIterations: return "MaxIterations";
    case SolveStatus::kNumericalFailure: return "NumericalFailure";
  }
  return "?";
}

/// Dual multipliers in the layout of the model: one lambda per positive b_y
/// cell, one per positive b_z cell, one mu per triplet, and the induced dual
/// cone block nu = c + A^T eta per triplet.
struct DualSolution {
  std::vector<double> lambda_y;
  std::vector<double> lambda_z;
  std::vector<double> mu;
  std::vector<DualConePoint> nu;
  Eigen::VectorXd eta;  // (lambda_y, lambda_z, mu) stacked in row order
};

/// Per outer iteration record.
struct IterationRecord {
  int outer = 0;
  double t = 0.0;
  int newton_steps = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double gap_bound = 0.0;
  double primal_residual = 0.0;
  double min_dual_slack = 0.0;  // min over triplets of the scalarized dual constraint
  bool duals_in_cone = false;
};

struct PrimalDualSolution {
  std::vector<ConePoint> primal;
  DualSolution dual;
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::string detail;  // which stopping test fired, or why it failed
  int iterations = 0;    // outer iterations
  int newton_steps = 0;  // total Newton steps
  double t = 0.0;
  double objective_primal = 0.0;
  double objective_dual = 0.0;
  std::vector<IterationRecord> trace;

  std::vector<double> lambda_y() const { return dual.lambda_y; }
  std::vector<double> q() const {
    std::vector<double> out(primal.size());
    for (std::size_t i = 0; i < primal.size(); ++i) out[i] = primal[i].q;
    return out;
  }
};

/// Current point of the barrier method.
struct BarrierState {
  Eigen::VectorXd w;
  double t = 1.0;
};

namespace detail {

struct BlockDerivatives {
  Eigen::VectorXd gradient;
};

inline std::optional<BlockDerivatives> derivatives(const Eigen::VectorXd& w) {
  const int n = static_cast<int>(w.size() / 3);
  BlockDerivatives d;
  d.gradient.resize(w.size());
  for (int i = 0; i < n; ++i) {
    auto b = try_barrier({w[3 * i], w[3 * i + 1], w[3 * i + 2]});
    if (!b) return std::nullopt;
    d.gradient.segment<3>(3 * i) = b->gradient;
  }
  return d;
}

struct NewtonStep {
  Eigen::VectorXd dw;
  Eigen::VectorXd nu;
  double decrement2 = 0.0;  // dw^T H dw
  double directional = 0.0;  // (t c + g)^T dw
};

/// nu_ref is a guess for the multipliers (empty for none). The system is
/// solved for the correction nu - nu_ref, whose right-hand side is small near
/// the central path even when t is large.
inline NewtonStep newton_step(const ExpConeModel& model, KktSolver& kkt,
                              const Eigen::VectorXd& w, double t,
                              const BlockDerivatives& d,
                              const Eigen::VectorXd& nu_ref = {}) {
  const auto& prog = model.program();
  const Eigen::VectorXd grad_phi = t * prog.c + d.gradient;
  kkt.factor(unpack(w));
  const bool warm = nu_ref.size() == model.num_rows();
  Eigen::VectorXd r1 = -grad_phi;
  if (warm) r1 -= prog.A.transpose() * nu_ref;
  auto sol = kkt.solve(r1, prog.b - prog.A * w);
  NewtonStep s;
  s.dw = std::move(sol.dw);
  s.nu = warm ? Eigen::VectorXd(nu_ref + sol.nu) : std::move(sol.nu);
  s.decrement2 = sol.decrement2;
  s.directional = grad_phi.dot(s.dw);
  return s;
}

inline DualSolution duals_from_multipliers(const ExpConeModel& model,
                                           const Eigen::VectorXd& eta) {
  const auto& prog = model.program();
  const int ny = static_cast<int>(model.cells_y().size());
  const int nz = static_cast<int>(model.cells_z().size());
  const int n = model.num_triplets();
  DualSolution out;
  out.eta = eta;
  out.lambda_y.assign(eta.data(), eta.data() + ny);
  out.lambda_z.assign(eta.data() + ny, eta.data() + ny + nz);
  out.mu.assign(eta.data() + ny + nz, eta.data() + ny + nz + n);
  const Eigen::VectorXd theta = prog.c + prog.A.transpose() * eta;
  out.nu.resize(n);
  for (int i = 0; i < n; ++i) {
    out.nu[i] = {theta[3 * i + kR], theta[3 * i + kP], theta[3 * i + kQ]};
  }
  return out;
}

}  // namespace detail

/// Reads dual multipliers off the Newton system at a strictly interior
/// iterate. With H dw + A^T nu = -(t c + g), eta = nu / t gives
/// c + A^T eta = -(g + H dw) / t, which lies in the dual cone whenever the
/// Newton decrement is below one.
inline DualSolution recover_duals(const ExpConeModel& model,
                                  const BarrierState& state,
                                  KktBackend backend = KktBackend::kAuto) {
  auto d = detail::derivatives(state.w);
  if (!d) throw BoundaryPoint("iterate is not strictly interior");
  KktSolver kkt(model, backend);
  const auto step = detail::newton_step(model, kkt, state.w, state.t, *d);
  return detail::duals_from_multipliers(model, step.nu / state.t);
}

/// The scalarized dual constraint lam_xy + lam_xz + mu_{*,y,z} + 1 + ln(-mu)
/// written in terms of the dual cone block (u = -1, v = -mu,
/// w = lam_xy + lam_xz + mu_{*,y,z}): w + 1 + ln v. -inf when v <= 0.
inline double dual_constraint_value(const DualConePoint& nu) {
  if (!(nu.v > 0.0)) return -std::numeric_limits<double>::infinity();
  return nu.w + 1.0 + std::log(nu.v);
}

/// c^T w + b^T eta. With h = 0 this is the full duality gap.
inline double duality_gap(const PrimalDualSolution& sol,
                          const ExpConeModel& model) {
  double cw = 0.0;
  for (const auto& pt : sol.primal) cw -= pt.r;
  double beta = 0.0;
  const auto cy = model.cells_y();
  const auto cz = model.cells_z();
  for (std::size_t k = 0; k < cy.size(); ++k) beta += sol.dual.lambda_y[k] * cy[k].p;
  for (std::size_t k = 0; k < cz.size(); ++k) beta += sol.dual.lambda_z[k] * cz[k].p;
  return cw + beta;
}

namespace detail {

struct CenteringResult {
  int steps = 0;
  bool converged = false;
  std::string failure;
  Eigen::VectorXd nu;  // KKT multipliers at the returned point when converged
};

inline constexpr double kCenteringTolerance = 1e-10;  // on decrement^2 / 2
inline constexpr int kMaxNewtonSteps = 100;
inline constexpr double kFractionToBoundary = 0.99;
inline constexpr double kArmijo = 0.01;
inline constexpr double kFullStepDecrement = 0.25;

/// Minimizes t c^T w + F(w) subject to A w = b by Newton's method with
/// backtracking, starting from a strictly interior w.
inline CenteringResult center(const ExpConeModel& model, KktSolver& kkt,
                              Eigen::VectorXd& w, double t,
                              Eigen::VectorXd nu_ref = {}) {
  const auto& c = model.program().c;
  const int n = model.num_triplets();
  CenteringResult res;
  for (; res.steps < kMaxNewtonSteps; ++res.steps) {
    auto d = derivatives(w);
    if (!d) {
      res.failure = "iterate left the cone interior";
      return res;
    }
    NewtonStep s;
    try {
      s = newton_step(model, kkt, w, t, *d, nu_ref);
    } catch (const IllConditionedKKT& e) {
      res.failure = e.what();
      return res;
    }
    if (s.decrement2 / 2.0 <= kCenteringTolerance) {
      res.converged = true;
      res.nu = std::move(s.nu);
      return res;
    }
    const double lambda = std::sqrt(s.decrement2);
    nu_ref = s.nu;

    double alpha = 1.0;
    for (int i = 0; i < n; ++i) {
      const double dp = s.dw[3 * i + kP];
      const double dq = s.dw[3 * i + kQ];
      if (dp < 0.0) alpha = std::min(alpha, -kFractionToBoundary * w[3 * i + kP] / dp);
      if (dq < 0.0) alpha = std::min(alpha, -kFractionToBoundary * w[3 * i + kQ] / dq);
    }

    std::vector<double> f_old(n);
    for (int i = 0; i < n; ++i) {
      f_old[i] = *barrier_value({w[3 * i], w[3 * i + 1], w[3 * i + 2]});
    }
    bool accepted = false;
    Eigen::VectorXd trial;
    for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
      trial = w + alpha * s.dw;
      // Per-block barrier differences keep the comparison accurate when the
      // objective term t c^T w is large.
      double delta = t * alpha * c.dot(s.dw);
      bool interior = true;
      for (int i = 0; i < n && interior; ++i) {
        auto f = barrier_value({trial[3 * i], trial[3 * i + 1], trial[3 * i + 2]});
        if (!f) {
          interior = false;
        } else {
          delta += *f - f_old[i];
        }
      }
      if (!interior) continue;  // BoundaryPoint: halve
      if (lambda < kFullStepDecrement || s.directional >= 0.0 ||
          delta <= kArmijo * alpha * s.directional) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.failure = "line search failed";
      return res;
    }
    w = trial;
  }
  res.failure = "Newton step budget exhausted";
  return res;
}

struct IterateQuality {
  double primal_residual = 0.0;
  double cone_violation = 0.0;  // max over blocks of (q e^{r/q} - p)_+
  double dual_violation = 0.0;  // max over blocks of (-(w + 1 + ln v))_+
  double gap = 0.0;
  double relgap = std::numeric_limits<double>::infinity();
};

inline IterateQuality assess(const ExpConeModel& model, const Eigen::VectorXd& w,
                             const DualSolution& dual, double pobj, double dobj) {
  IterateQuality q;
  q.primal_residual = equality_residual(model, w);
  for (int i = 0; i < model.num_triplets(); ++i) {
    const ConePoint pt{w[3 * i], w[3 * i + 1], w[3 * i + 2]};
    double v = 0.0;
    if (pt.q > 0.0) {
      v = pt.q * std::exp(pt.r / pt.q) - pt.p;
    } else {
      v = std::max({std::abs(pt.q), pt.r, -pt.p});
    }
    q.cone_violation = std::max(q.cone_violation, v);
    q.dual_violation =
        std::max(q.dual_violation, -dual_constraint_value(dual.nu[i]));
  }
  q.gap = pobj - dobj;
  if (pobj < 0.0) {
    q.relgap = q.gap / -pobj;
  } else if (dobj > 0.0) {
    q.relgap = q.gap / dobj;
  }
  return q;
}

inline bool meets(const IterateQuality& q, double feastol, double abstol,
                  double reltol) {
  return q.primal_residual <= feastol && q.cone_violation <= feastol &&
         q.dual_violation <= feastol && (q.gap <= abstol || q.relgap <= reltol);
}

}  // namespace detail

/// Primal path-following barrier method on the exponential-cone program.
///
/// Starts at the interior point from initial_point() with t = 1, centers
/// with Newton's method, reads off duals, and multiplies t by 10 until the
/// central-path gap bound 3|T|/t drops below abstol (or below reltol
/// relative to the objective). The returned solution is the last centered
/// iterate in every status.
inline PrimalDualSolution solve(const ExpConeModel& model,
                                const SolverParams& params = {},
                                std::ostream* log = nullptr) {
  params.validate();
  constexpr double kGrowth = 10.0;
  const auto& prog = model.program();
  const int n = model.num_triplets();
  const double degree = kBarrierDegree * n;

  KktSolver kkt(model, params.kkt);
  Eigen::VectorXd w = pack(initial_point(model));
  double t = 1.0;

  PrimalDualSolution sol;
  std::optional<detail::IterateQuality> best_quality;
  bool have_iterate = false;

  if (log) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "barrier solver: %d triplets, %d variables, %d equality rows, %s KKT\n",
                  n, model.num_variables(), model.num_rows(),
                  kkt.backend() == KktBackend::kDenseSchur ? "dense" : "sparse");
    *log << buf;
    *log << " iter         t   newton      pcost           dcost           gap       bound     pres\n";
  }

  Eigen::VectorXd nu_ref;  // multipliers scale linearly with t on the path
  for (int outer = 1; outer <= params.max_iter; ++outer) {
    Eigen::VectorXd w_try = w;
    auto centering = detail::center(model, kkt, w_try, t, nu_ref);
    sol.newton_steps += centering.steps;
    if (!centering.converged) {
      sol.detail = "centering failed at t=" + std::to_string(t) + ": " +
                   centering.failure;
      // A partially centered point is still interior; keep it only if
      // nothing better exists.
      if (have_iterate) break;
      w = w_try;
    } else {
      w = w_try;
    }

    DualSolution dual;
    try {
      dual = centering.converged
                 ? detail::duals_from_multipliers(model, centering.nu / t)
                 : recover_duals(model, {w, t}, kkt.backend());
    } catch (const Exception& e) {
      if (!have_iterate) throw SolverException(std::string("no iterate: ") + e.what());
      sol.detail += std::string("; dual recovery failed: ") + e.what();
      break;
    }
    const double pobj = prog.c.dot(w);
    const double dobj = -prog.b.dot(dual.eta);
    const auto quality = detail::assess(model, w, dual, pobj, dobj);
    const double bound = degree / t;

    IterationRecord rec;
    rec.outer = outer;
    rec.t = t;
    rec.newton_steps = centering.steps;
    rec.primal_objective = pobj;
    rec.dual_objective = dobj;
    rec.gap = quality.gap;
    rec.gap_bound = bound;
    rec.primal_residual = quality.primal_residual;
    rec.min_dual_slack = -quality.dual_violation;
    rec.duals_in_cone = std::all_of(dual.nu.begin(), dual.nu.end(),
                                    [](const DualConePoint& v) {
                                      return in_dual_exp_cone(v, 1e-9);
                                    });
    for (const auto& v : dual.nu) {
      rec.min_dual_slack = std::min(rec.min_dual_slack, dual_constraint_value(v));
    }
    sol.trace.push_back(rec);
    if (log) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "%5d %9.2e %8d %+.8e %+.8e %9.2e %9.2e %8.1e\n", outer, t,
                    centering.steps, pobj, dobj, quality.gap, bound,
                    quality.primal_residual);
      *log << buf;
    }

    sol.primal = unpack(w);
    sol.dual = std::move(dual);
    sol.iterations = outer;
    sol.t = t;
    sol.objective_primal = pobj;
    sol.objective_dual = dobj;
    best_quality = quality;
    have_iterate = true;

    if (!centering.converged) break;

    const bool abs_stop = bound < params.abstol;
    const bool rel_stop = pobj < 0.0 ? bound < params.reltol * -pobj
                                     : (dobj > 0.0 && bound < params.reltol * dobj);
    if (abs_stop || rel_stop) {
      sol.detail = abs_stop ? "gap bound below abstol" : "gap bound below reltol";
      break;
    }
    nu_ref = kGrowth * centering.nu;
    t *= kGrowth;
  }

  if (!have_iterate) throw SolverException("solver produced no iterate");

  const auto& q = *best_quality;
  const bool stopped = sol.detail.rfind("gap bound", 0) == 0;
  if (detail::meets(q, params.feastol, params.abstol, params.reltol) && stopped) {
    sol.status = SolveStatus::kOptimal;
  } else if (detail::meets(q, params.feastol_inacc, params.abstol_inacc,
                           params.reltol_inacc)) {
    sol.status = SolveStatus::kOptimalInaccurate;
  } else if (sol.iterations >= params.max_iter && sol.detail.empty()) {
    sol.status = SolveStatus::kMaxIterations;
    sol.detail = "max_iter reached";
  } else {
    sol.status = SolveStatus::kNumericalFailure;
  }
  if (sol.status == SolveStatus::kOptimalInaccurate && sol.detail.empty()) {
    sol.detail = "max_iter reached";
  }
  if (log) {
    *log << "status: " << to_string(sol.status);
    if (!sol.detail.empty()) *log << " (" << sol.detail << ")";
    *log << ", " << sol.iterations << " outer iterations, " << sol.newton_steps
         << " Newton steps\n";
  }
  return sol;
}

}  // namespace broja2pid

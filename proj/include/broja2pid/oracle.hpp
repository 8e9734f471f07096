#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "broja2pid/distributions.hpp"
#include "broja2pid/errors.hpp"
#include "broja2pid/pid.hpp"

// Brute-force reference minimizer. Shares nothing with the cone model or the
// barrier solver beyond the marginals themselves.
namespace broja2pid::oracle {

inline constexpr int kMaxNullDimension = 3;
inline constexpr double kRankThreshold = 1e-10;
inline constexpr double kMaxGridPoints = 2e8;
inline constexpr double kNegativeSlack = 1e-13;

/// Feasible set of the marginal equations, q = q0 + basis * alpha.
struct PolytopeParam {
  std::vector<std::tuple<int, int, int>> support;  // (x, y, z) per coordinate
  Eigen::VectorXd q0;
  Eigen::MatrixXd basis;  // orthonormal columns
  Eigen::VectorXd lower;  // box on alpha implied by q in the simplex
  Eigen::VectorXd upper;
  Eigen::MatrixXd equations;  // marginal equality rows over support
  Eigen::VectorXd rhs;

  int dimension() const { return static_cast<int>(basis.cols()); }
  Eigen::VectorXd point(const Eigen::VectorXd& alpha) const {
    return q0 + basis * alpha;
  }
};

inline PolytopeParam parametrize(const MarginalPair& m) {
  PolytopeParam out;
  const int nx = m.nx(), ny = m.ny(), nz = m.nz();
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      if (!(m.b_y(x, y) > 0.0)) continue;
      for (int z = 0; z < nz; ++z) {
        if (m.b_z(x, z) > 0.0) out.support.emplace_back(x, y, z);
      }
    }
  }
  const int n = static_cast<int>(out.support.size());
  if (n == 0) throw EmptyModel("no admissible outcome");

  std::map<std::pair<int, int>, int> row_y, row_z;
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      if (m.b_y(x, y) > 0.0) row_y.emplace(std::pair{x, y}, static_cast<int>(row_y.size()));
    }
  }
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      if (m.b_z(x, z) > 0.0) row_z.emplace(std::pair{x, z}, static_cast<int>(row_z.size()));
    }
  }
  const int rows = static_cast<int>(row_y.size() + row_z.size());
  out.equations = Eigen::MatrixXd::Zero(rows, n);
  out.rhs.resize(rows);
  for (const auto& [k, r] : row_y) out.rhs[r] = m.b_y(k.first, k.second);
  for (const auto& [k, r] : row_z) {
    out.rhs[static_cast<int>(row_y.size()) + r] = m.b_z(k.first, k.second);
  }
  for (int j = 0; j < n; ++j) {
    const auto [x, y, z] = out.support[j];
    out.equations(row_y.at({x, y}), j) = 1.0;
    out.equations(static_cast<int>(row_y.size()) + row_z.at({x, z}), j) = 1.0;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(out.equations);
  cod.setThreshold(kRankThreshold);
  out.q0 = cod.solve(out.rhs);

  // Null space of the equations: trailing columns of Q in a pivoted QR of E^T.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.equations.transpose());
  qr.setThreshold(kRankThreshold);
  const int rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd q_full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  out.basis = q_full.rightCols(n - rank);

  // On the simplex, alpha_j = b_j . (q - q0) ranges between the extreme
  // entries of b_j.
  const int d = static_cast<int>(out.basis.cols());
  out.lower.resize(d);
  out.upper.resize(d);
  for (int j = 0; j < d; ++j) {
    const double shift = out.basis.col(j).dot(out.q0);
    out.lower[j] = out.basis.col(j).minCoeff() - shift;
    out.upper[j] = out.basis.col(j).maxCoeff() - shift;
  }
  return out;
}

/// Sum q ln(q / q_{*,y,z}) in nats over a point of the polytope, or +inf
/// when some coordinate is negative beyond rounding.
inline double objective(const PolytopeParam& poly, const Eigen::VectorXd& q) {
  std::map<std::pair<int, int>, double> marg;
  for (int j = 0; j < q.size(); ++j) {
    if (q[j] < -kNegativeSlack) return std::numeric_limits<double>::infinity();
    const auto [x, y, z] = poly.support[j];
    if (q[j] > 0.0) marg[{y, z}] += q[j];
  }
  double f = 0.0;
  for (int j = 0; j < q.size(); ++j) {
    if (q[j] > 0.0) {
      const auto [x, y, z] = poly.support[j];
      f += q[j] * std::log(q[j] / marg.at({y, z}));
    }
  }
  return f;
}

struct Result {
  std::vector<Entry> q;  // over the alphabets of the marginals
  double objective = 0.0;  // nats
  int dimension = 0;
  long long evaluations = 0;
  double max_residual = 0.0;  // marginal residual of q
};

namespace detail {

inline std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> v;
  if (hi < lo) return v;
  const long long k = static_cast<long long>(std::floor((hi - lo) / step));
  v.reserve(k + 2);
  for (long long i = 0; i <= k; ++i) v.push_back(lo + i * step);
  if (v.back() < hi) v.push_back(hi);
  return v;
}

}  // namespace detail

/// Exhaustive grid over the alpha box at grid_step, then coordinate descent
/// from the incumbent at grid_step / 10, / 100, ... down to / 10^4.
inline Result brute_force_min(const MarginalPair& m, double grid_step) {
  if (!(grid_step > 0.0)) throw InvalidParams("grid step must be positive");
  const auto poly = parametrize(m);
  const int d = poly.dimension();
  if (d > kMaxNullDimension) {
    throw DimensionTooLarge("null space of dimension " + std::to_string(d));
  }
  std::vector<std::vector<double>> axes(d);
  double points = 1.0;
  for (int j = 0; j < d; ++j) {
    axes[j] = detail::axis(poly.lower[j], poly.upper[j], grid_step);
    points *= static_cast<double>(axes[j].size());
  }
  if (points > kMaxGridPoints) {
    throw DimensionTooLarge("grid of " + std::to_string(points) + " points");
  }

  Result res;
  res.dimension = d;
  Eigen::VectorXd best_alpha = Eigen::VectorXd::Zero(d);
  double best = objective(poly, poly.point(best_alpha));
  ++res.evaluations;

  std::vector<std::size_t> idx(d, 0);
  Eigen::VectorXd alpha(d);
  if (d > 0) {
    while (true) {
      for (int j = 0; j < d; ++j) alpha[j] = axes[j][idx[j]];
      const double f = objective(poly, poly.point(alpha));
      ++res.evaluations;
      if (f < best) {
        best = f;
        best_alpha = alpha;
      }
      int j = 0;
      while (j < d && ++idx[j] == axes[j].size()) idx[j++] = 0;
      if (j == d) break;
    }
  }

  // Coordinate descent on finer and finer grids: keep stepping along one axis
  // while the objective improves, cycle axes until a sweep makes no progress.
  for (double h = grid_step / 10.0; h >= grid_step * 0.99e-4; h /= 10.0) {
    for (bool improved = d > 0; improved;) {
      improved = false;
      for (int j = 0; j < d; ++j) {
        for (double dir : {1.0, -1.0}) {
          while (true) {
            Eigen::VectorXd trial = best_alpha;
            trial[j] += dir * h;
            const double f = objective(poly, poly.point(trial));
            ++res.evaluations;
            if (!(f < best)) break;
            best = f;
            best_alpha = trial;
            improved = true;
          }
        }
      }
    }
  }

  Eigen::VectorXd q = poly.point(best_alpha);
  q = q.cwiseMax(0.0);
  res.max_residual = (poly.equations * q - poly.rhs).lpNorm<Eigen::Infinity>();
  res.objective = objective(poly, q);
  for (int j = 0; j < q.size(); ++j) {
    const auto [x, y, z] = poly.support[j];
    if (q[j] > 0.0) res.q.push_back({x, y, z, q[j]});
  }
  return res;
}

/// The decomposition computed from the oracle's minimizer, in bits.
inline PidResult decomposition(const JointDistribution& p, double grid_step) {
  const auto r = brute_force_min(marginals(p), grid_step);
  PidResult out = decompose_entries(p, r.q);
  out.solver = "oracle";
  return out;
}

}  // namespace broja2pid::oracle

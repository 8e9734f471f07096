#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "broja2pid/cone.hpp"
#include "broja2pid/errors.hpp"
#include "broja2pid/model.hpp"

namespace broja2pid {

enum class KktBackend {
  kAuto,        // dense below kSparseThreshold variables, sparse above
  kDenseSchur,  // block-eliminate H, pivoted LDL^T of A H^-1 A^T
  kSparseLdlt,  // same Schur complement, assembled sparsely, sparse LDL^T
};

inline constexpr int kSparseThreshold = 3000;
inline constexpr int kRefinementPasses = 10;

/// Barrier Hessian of one block in split form.
///
/// With s = q ln(p/q) - r and a = grad s = (-1, q/p, ln(p/q) - 1),
///
///   H = a a^T / s^2 + [0 0; 0 M],   M = diag(1/p^2, 1/q^2) + b b^T / s,
///
/// b = (q/p, -1) / sqrt(q). T = [a^T; e_p^T; e_q^T] is its own inverse, so
/// H = T^T diag(1/s^2, M) T and H^-1 = T diag(s^2, M^-1) T^T. The a a^T / s^2
/// term grows like t^2 along the path; keeping it separate avoids inverting
/// a 3x3 matrix whose condition number is of that order.
struct HessianBlock {
  double s = 0.0;
  double alpha = 0.0;  // q / p
  double beta = 0.0;   // ln(p/q) - 1
  Eigen::Matrix2d m;
  Eigen::Matrix2d m_inv;

  static HessianBlock at(const ConePoint& pt) {
    HessianBlock h;
    const double p = pt.p;
    const double q = pt.q;
    h.s = cone_slack(pt);
    h.alpha = q / p;
    h.beta = std::log(p / q) - 1.0;
    const double s = h.s;
    h.m << q / (p * p * s) + 1.0 / (p * p), -1.0 / (p * s),
        -1.0 / (p * s), 1.0 / (q * s) + 1.0 / (q * q);
    // Closed-form inverse; det M = (2q + s) / (p^2 q^2 s) has no cancellation.
    const double d = 2.0 * q + s;
    h.m_inv << p * p * (q + s) / d, p * q * q / d, p * q * q / d,
        q * q * (q + s) / d;
    return h;
  }

  Eigen::Matrix3d dense() const {
    const Eigen::Vector3d a(-1.0, alpha, beta);
    Eigen::Matrix3d out = a * a.transpose() / (s * s);
    out.bottomRightCorner<2, 2>() += m;
    return out;
  }
};

/// Newton direction and multipliers, plus the Newton decrement squared
/// dw^T H dw evaluated in split form.
struct KktSolution {
  Eigen::VectorXd dw;
  Eigen::VectorXd nu;
  double decrement2 = 0.0;
  double residual = 0.0;
};

/// Solves the equality-constrained Newton system
///
///   [ H  A^T ] [dw]   [r1]
///   [ A   0  ] [nu] = [r2]
///
/// with H block diagonal (one barrier block per triplet). A has no entries in
/// r columns, so in the coordinates y = T dw the u component decouples and
/// only the (p, q) part needs a factorization.
/// The equality matrix loses one rank per x (the y-marginal and z-marginal
/// rows of each x sum to the same vector). No row is deleted; both backends
/// Jacobi-scale the Schur complement, add 1e-10 to its unit diagonal, and refine
class KktSolver {
 public:
  KktSolver(const ExpConeModel& model, KktBackend backend,
            double regularization = 1e-10)
      : model_(&model), reg_(regularization) {
    backend_ = backend;
    if (backend_ == KktBackend::kAuto) {
      backend_ = model.num_variables() > kSparseThreshold
                     ? KktBackend::kSparseLdlt
                     : KktBackend::kDenseSchur;
    }
    build_pq_matrix();
  }

  KktBackend backend() const { return backend_; }

  void factor(std::span<const ConePoint> blocks) {
    blocks_.resize(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (!(blocks[i].p > 0.0 && blocks[i].q > 0.0 && cone_slack(blocks[i]) > 0.0)) {
        throw IllConditionedKKT("Hessian requested outside the cone interior");
      }
      blocks_[i] = HessianBlock::at(blocks[i]);
    }
    if (backend_ == KktBackend::kDenseSchur) {
      factor_dense();
    } else {
      factor_sparse();
    }
  }

  const std::vector<HessianBlock>& blocks() const { return blocks_; }

  /// Throws IllConditionedKKT if the normwise backward error of the result
  /// exceeds 1e-8.
  KktSolution solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) const {
    const int n = static_cast<int>(blocks_.size());
    // Right-hand side in split coordinates.
    Eigen::VectorXd ru(n), rpq(2 * n);
    for (int i = 0; i < n; ++i) {
      const auto& h = blocks_[i];
      const double rr = r1[3 * i + kR];
      ru[i] = -rr;
      rpq[2 * i] = h.alpha * rr + r1[3 * i + kP];
      rpq[2 * i + 1] = h.beta * rr + r1[3 * i + kQ];
    }
    Eigen::VectorXd ypq, nu;
    if (backend_ == KktBackend::kDenseSchur) {
      solve_dense(rpq, r2, ypq, nu);
    } else {
      solve_sparse(rpq, r2, ypq, nu);
    }

    KktSolution out;
    out.nu = nu;
    out.dw.resize(3 * n);
    for (int i = 0; i < n; ++i) {
      const auto& h = blocks_[i];
      const double yu = h.s * h.s * ru[i];
      const Eigen::Vector2d y = ypq.segment<2>(2 * i);
      out.dw[3 * i + kR] = -yu + h.alpha * y[0] + h.beta * y[1];
      out.dw[3 * i + kP] = y[0];
      out.dw[3 * i + kQ] = y[1];
      out.decrement2 += yu * yu / (h.s * h.s) + y.dot(h.m * y);
    }

    const Eigen::VectorXd e1 = rpq - apply_m(ypq) - apq_.transpose() * nu;
    const Eigen::VectorXd e2 = r2 - apq_ * ypq;
    // Normwise backward error |r - K x| / (|K| |x| + |r|), infinity norms,
    // with K the split-coordinate system [M A^T; A 0].
    double k_norm = a_row_norm_;
    for (int i = 0; i < n; ++i) {
      const auto& m = blocks_[i].m;
      for (int j = 0; j < 2; ++j) {
        k_norm = std::max(k_norm, std::abs(m(j, 0)) + std::abs(m(j, 1)) + a_col_norm_[2 * i + j]);
      }
    }
    const double x_norm =
        std::max(ypq.lpNorm<Eigen::Infinity>(), nu.lpNorm<Eigen::Infinity>());
    const double r_norm =
        std::max(rpq.lpNorm<Eigen::Infinity>(), r2.lpNorm<Eigen::Infinity>());
    const double e_norm = std::max(e1.lpNorm<Eigen::Infinity>(), e2.lpNorm<Eigen::Infinity>());
    const double denom = k_norm * x_norm + r_norm;
    out.residual = denom > 0.0 ? e_norm / denom : e_norm;
    if (!std::isfinite(out.residual) || out.residual > 1e-8) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "relative KKT residual %.3e", out.residual);
      throw IllConditionedKKT(buf);
    }
    return out;
  }

 private:
  // A restricted to the (p, q) columns, ordered (p_0, q_0, p_1, ...).
  void build_pq_matrix() {
    const auto& a = model_->program().A;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nonZeros());
    for (int k = 0; k < a.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, k); it;
           ++it) {
        const int block = static_cast<int>(it.col() / 3);
        const int slot = static_cast<int>(it.col() % 3);
        if (slot == kR) continue;  // never populated
        t.emplace_back(k, 2 * block + (slot - 1), it.value());
      }
    }
    apq_.resize(a.rows(), 2 * model_->num_triplets());
    apq_.setFromTriplets(t.begin(), t.end());
    apq_.makeCompressed();
    a_row_norm_ = 0.0;
    for (int k = 0; k < apq_.outerSize(); ++k) {
      double sum = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(apq_, k); it; ++it) {
        sum += std::abs(it.value());
      }
      a_row_norm_ = std::max(a_row_norm_, sum);
    }
    a_col_norm_ = Eigen::VectorXd::Ones(apq_.rows()).transpose() * apq_.cwiseAbs();
  }

  Eigen::VectorXd apply_m(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(y.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      out.segment<2>(2 * i) = blocks_[i].m * y.segment<2>(2 * i);
    }
    return out;
  }

  Eigen::VectorXd apply_m_inv(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(y.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      out.segment<2>(2 * i) = blocks_[i].m_inv * y.segment<2>(2 * i);
    }
    return out;
  }

  void build_columns() {
    if (!cols_.empty()) return;
    const Eigen::SparseMatrix<double> ac = apq_;
    cols_.resize(ac.cols());
    for (int c = 0; c < ac.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ac, c); it; ++it) {
        cols_[c].push_back({static_cast<int>(it.row()), it.value()});
      }
    }
  }

  // Calls add(row, col, value) for every contribution to A M^-1 A^T.
  template <class Add>
  void for_each_schur_term(Add&& add) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Eigen::Matrix2d& mi = blocks_[i].m_inv;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double h = mi(a, b);
          for (const auto& [ra, va] : cols_[2 * i + a]) {
            for (const auto& [rb, vb] : cols_[2 * i + b]) add(ra, rb, va * h * vb);
          }
        }
      }
    }
  }

  // S nu = A M^-1 r1 - r2, then y = M^-1 (r1 - A^T nu). The factorization is
  // of the Jacobi-scaled, regularized S; refinement uses the residual of the
  // constraint rows themselves, r2 - A y.
  template <class Factor>
  void solve_schur(const Factor& f, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                   Eigen::VectorXd& y, Eigen::VectorXd& nu) const {
    auto apply_inv = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return scale_.cwiseProduct(f.solve(scale_.cwiseProduct(v)));
    };
    const Eigen::VectorXd m_inv_r1 = apply_m_inv(r1);
    nu = apply_inv(apq_ * m_inv_r1 - r2);
    y = m_inv_r1 - apply_m_inv(apq_.transpose() * nu);
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kRefinementPasses; ++it) {
      const Eigen::VectorXd e2 = r2 - apq_ * y;
      const double norm = e2.lpNorm<Eigen::Infinity>();
      if (norm <= 1e-17 * (1.0 + r2.lpNorm<Eigen::Infinity>()) || !(norm < 0.5 * last)) break;
      last = norm;
      const Eigen::VectorXd d = apply_inv(-e2);
      nu += d;
      y -= apply_m_inv(apq_.transpose() * d);
    }
  }

  // Jacobi scaling of S; rows with an empty diagonal keep scale 1.
  template <class Diag>
  void set_scale(const Diag& diag) {
    scale_.resize(diag.size());
    for (Eigen::Index r = 0; r < diag.size(); ++r) {
      scale_[r] = diag[r] > 0.0 ? 1.0 / std::sqrt(diag[r]) : 1.0;
    }
  }

  // ---- dense Schur complement ------------------------------------------

  void factor_dense() {
    const int m = model_->num_rows();
    build_columns();
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for_each_schur_term([&](int r, int c, double v) { schur(r, c) += v; });
    set_scale(schur.diagonal());
    schur = scale_.asDiagonal() * schur * scale_.asDiagonal();
    schur.diagonal().array() += reg_;
    schur_ldlt_.compute(schur);
    if (schur_ldlt_.info() != Eigen::Success) {
      throw IllConditionedKKT("Schur complement factorization failed");
    }
  }

  void solve_dense(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                   Eigen::VectorXd& y, Eigen::VectorXd& nu) const {
    solve_schur(schur_ldlt_, r1, r2, y, nu);
  }

  // ---- sparse Schur complement -----------------------------------------

  void factor_sparse() {
    const int m = model_->num_rows();
    build_columns();
    std::vector<Eigen::Triplet<double>> t;
    for_each_schur_term([&](int r, int c, double v) {
      if (r >= c) t.emplace_back(r, c, v);
    });
    Eigen::SparseMatrix<double> schur(m, m);
    schur.setFromTriplets(t.begin(), t.end());
    set_scale(Eigen::VectorXd(schur.diagonal()));
    schur = scale_.asDiagonal() * schur * scale_.asDiagonal();
    for (int r = 0; r < m; ++r) schur.coeffRef(r, r) += reg_;
    if (!pattern_analyzed_) {
      sparse_ldlt_.analyzePattern(schur);
      pattern_analyzed_ = true;
    }
    sparse_ldlt_.factorize(schur);
    if (sparse_ldlt_.info() != Eigen::Success) {
      throw IllConditionedKKT("sparse LDL^T factorization failed");
    }
  }

  void solve_sparse(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                    Eigen::VectorXd& y, Eigen::VectorXd& nu) const {
    solve_schur(sparse_ldlt_, r1, r2, y, nu);
  }

  struct ColEntry {
    int row;
    double value;
  };

  const ExpConeModel* model_;
  KktBackend backend_;
  double reg_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> apq_;
  double a_row_norm_ = 0.0;
  Eigen::VectorXd a_col_norm_;
  std::vector<HessianBlock> blocks_;

  std::vector<std::vector<ColEntry>> cols_;
  Eigen::VectorXd scale_;
  Eigen::LDLT<Eigen::MatrixXd> schur_ldlt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                        Eigen::AMDOrdering<int>>
      sparse_ldlt_;
  bool pattern_analyzed_ = false;
};

}  // namespace broja2pid

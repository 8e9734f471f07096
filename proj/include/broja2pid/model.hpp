#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "broja2pid/cone.hpp"
#include "broja2pid/distributions.hpp"
#include "broja2pid/errors.hpp"

namespace broja2pid {

struct Triplet {
  int x = 0;
  int y = 0;
  int z = 0;
  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

/// Triplets (x, y, z) with b_y(x,y) > 0 and b_z(x,z) > 0, in lexicographic
/// index order.
class TripletIndex {
 public:
  TripletIndex() = default;
  explicit TripletIndex(std::vector<Triplet> triplets)
      : triplets_(std::move(triplets)) {}

  std::span<const Triplet> triplets() const { return triplets_; }
  int size() const { return static_cast<int>(triplets_.size()); }
  const Triplet& operator[](int i) const { return triplets_[i]; }

  /// Position of (x, y, z), or -1 when it is not admissible.
  int position(int x, int y, int z) const {
    const Triplet key{x, y, z};
    auto it = std::lower_bound(triplets_.begin(), triplets_.end(), key);
    return (it != triplets_.end() && *it == key)
               ? static_cast<int>(it - triplets_.begin())
               : -1;
  }

 private:
  std::vector<Triplet> triplets_;
};

/// min c^T w  s.t.  A w = b,  each consecutive 3-block of w in K_exp.
struct GenericConeProgram {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;
  int num_blocks = 0;
};

/// Variable offsets inside one cone block.
enum BlockSlot : int { kR = 0, kP = 1, kQ = 2 };

/// The exponential-cone program for a pair of marginals.
///
/// Variables are stored block-wise, (r_i, p_i, q_i) at 3i..3i+2 for the i-th
/// admissible triplet. Equality rows come in three groups: one per positive
/// b_y cell, one per positive b_z cell, then one coupling row
/// q_{*,y,z} - p_{x,y,z} = 0 per triplet. All coefficients are +1 or -1.
class ExpConeModel {
 public:
  const MarginalPair& marginals() const { return marginals_; }
  const TripletIndex& index() const { return index_; }
  std::span<const MarginalCell> cells_y() const { return cells_y_; }
  std::span<const MarginalCell> cells_z() const { return cells_z_; }
  const GenericConeProgram& program() const { return program_; }

  int num_triplets() const { return index_.size(); }
  int num_variables() const { return 3 * index_.size(); }
  int num_rows() const {
    return static_cast<int>(cells_y_.size() + cells_z_.size()) + num_triplets();
  }

  static int var(int triplet, BlockSlot slot) { return 3 * triplet + slot; }

  int row_y(int triplet) const { return row_y_[triplet]; }
  int row_z(int triplet) const { return row_z_[triplet]; }
  int row_coupling(int triplet) const {
    return static_cast<int>(cells_y_.size() + cells_z_.size()) + triplet;
  }
  int first_coupling_row() const { return row_coupling(0); }

  /// Triplets sharing the same (y, z) as the given one (including itself).
  std::span<const int> yz_group(int triplet) const {
    return yz_members_[yz_of_[triplet]];
  }
  int num_yz_groups() const { return static_cast<int>(yz_members_.size()); }
  std::span<const int> yz_group_members(int g) const { return yz_members_[g]; }
  int yz_group_of(int triplet) const { return yz_of_[triplet]; }

 private:
  friend ExpConeModel build_model(const MarginalPair& m);

  MarginalPair marginals_;
  TripletIndex index_;
  std::vector<MarginalCell> cells_y_;
  std::vector<MarginalCell> cells_z_;
  std::vector<int> row_y_;
  std::vector<int> row_z_;
  std::vector<int> yz_of_;
  std::vector<std::vector<int>> yz_members_;
  GenericConeProgram program_;
};

inline ExpConeModel build_model(const MarginalPair& m) {
  ExpConeModel model;
  model.marginals_ = m;
  model.cells_y_ = m.cells_y();
  model.cells_z_ = m.cells_z();

  Eigen::MatrixXi cell_y = Eigen::MatrixXi::Constant(m.nx(), m.ny(), -1);
  Eigen::MatrixXi cell_z = Eigen::MatrixXi::Constant(m.nx(), m.nz(), -1);
  for (int k = 0; k < static_cast<int>(model.cells_y_.size()); ++k) {
    cell_y(model.cells_y_[k].x, model.cells_y_[k].other) = k;
  }
  const int nzrow0 = static_cast<int>(model.cells_y_.size());
  for (int k = 0; k < static_cast<int>(model.cells_z_.size()); ++k) {
    cell_z(model.cells_z_[k].x, model.cells_z_[k].other) = nzrow0 + k;
  }

  std::vector<Triplet> triplets;
  for (const auto& cy : model.cells_y_) {
    for (const auto& cz : model.cells_z_) {
      if (cz.x == cy.x) triplets.push_back({cy.x, cy.other, cz.other});
    }
  }
  if (triplets.empty()) throw EmptyModel("no admissible triplet");
  std::sort(triplets.begin(), triplets.end());
  model.index_ = TripletIndex(std::move(triplets));

  const int n = model.num_triplets();
  model.row_y_.resize(n);
  model.row_z_.resize(n);
  model.yz_of_.resize(n);
  Eigen::MatrixXi yz_id = Eigen::MatrixXi::Constant(m.ny(), m.nz(), -1);
  for (int i = 0; i < n; ++i) {
    const auto& t = model.index_[i];
    model.row_y_[i] = cell_y(t.x, t.y);
    model.row_z_[i] = cell_z(t.x, t.z);
    int& g = yz_id(t.y, t.z);
    if (g < 0) {
      g = static_cast<int>(model.yz_members_.size());
      model.yz_members_.emplace_back();
    }
    model.yz_of_[i] = g;
    model.yz_members_[g].push_back(i);
  }

  auto& prog = model.program_;
  prog.num_blocks = n;
  prog.c = Eigen::VectorXd::Zero(3 * n);
  for (int i = 0; i < n; ++i) prog.c[ExpConeModel::var(i, kR)] = -1.0;

  const int rows = model.num_rows();
  prog.b = Eigen::VectorXd::Zero(rows);
  for (int k = 0; k < nzrow0; ++k) prog.b[k] = model.cells_y_[k].p;
  for (int k = 0; k < static_cast<int>(model.cells_z_.size()); ++k) {
    prog.b[nzrow0 + k] = model.cells_z_[k].p;
  }

  std::vector<Eigen::Triplet<double>> coeffs;
  for (int i = 0; i < n; ++i) {
    const int qi = ExpConeModel::var(i, kQ);
    coeffs.emplace_back(model.row_y_[i], qi, 1.0);
    coeffs.emplace_back(model.row_z_[i], qi, 1.0);
    const int rc = model.row_coupling(i);
    coeffs.emplace_back(rc, ExpConeModel::var(i, kP), -1.0);
    for (int j : model.yz_group(i)) {
      coeffs.emplace_back(rc, ExpConeModel::var(j, kQ), 1.0);
    }
  }
  prog.A.resize(rows, 3 * n);
  prog.A.setFromTriplets(coeffs.begin(), coeffs.end());
  prog.A.makeCompressed();
  return model;
}

// ---------------------------------------------------------------------------
// Conversions between per-triplet blocks and the flat variable vector.

inline Eigen::VectorXd pack(std::span<const ConePoint> blocks) {
  Eigen::VectorXd w(3 * blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    w[3 * i + kR] = blocks[i].r;
    w[3 * i + kP] = blocks[i].p;
    w[3 * i + kQ] = blocks[i].q;
  }
  return w;
}

inline std::vector<ConePoint> unpack(const Eigen::VectorXd& w) {
  std::vector<ConePoint> out(w.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {w[3 * i + kR], w[3 * i + kP], w[3 * i + kQ]};
  }
  return out;
}

/// Objective value -sum r.
inline double objective(const ExpConeModel& model, const Eigen::VectorXd& w) {
  return model.program().c.dot(w);
}

/// Max-norm of A w - b.
inline double equality_residual(const ExpConeModel& model,
                                const Eigen::VectorXd& w) {
  const auto& prog = model.program();
  return (prog.A * w - prog.b).lpNorm<Eigen::Infinity>();
}

/// Max-norm of the marginal rows only (q-part of A w - b).
inline double marginal_residual(const ExpConeModel& model,
                                const Eigen::VectorXd& w) {
  const auto& prog = model.program();
  const int nm = model.first_coupling_row();
  return (prog.A.topRows(nm) * w - prog.b.head(nm)).lpNorm<Eigen::Infinity>();
}

/// The interior starting point
///   q = b_y(x,y) b_z(x,z) / b_y(x,*),  p = q_{*,y,z},  r = q ln(p/q) - 100.
inline std::vector<ConePoint> initial_point(const ExpConeModel& model) {
  const auto& m = model.marginals();
  const Eigen::VectorXd px = m.b_y.rowwise().sum();
  const int n = model.num_triplets();
  std::vector<ConePoint> pts(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = model.index()[i];
    pts[i].q = m.b_y(t.x, t.y) * m.b_z(t.x, t.z) / px[t.x];
  }
  for (int g = 0; g < model.num_yz_groups(); ++g) {
    double sum = 0.0;
    for (int j : model.yz_group_members(g)) sum += pts[j].q;
    for (int j : model.yz_group_members(g)) pts[j].p = sum;
  }
  for (auto& pt : pts) pt.r = pt.q * std::log(pt.p / pt.q) - 100.0;
  return pts;
}

inline std::vector<ConePoint> initial_point(const MarginalPair& m) {
  return initial_point(build_model(m));
}

/// Lifts a point q of the convex program into the cone program:
/// (q ln(q_{*,y,z}/q), q_{*,y,z}, q) for q > 0 and (0, q_{*,y,z}, 0) for
/// q = 0. Throws InfeasiblePoint unless q satisfies the marginal equations
/// and q >= 0 within 1e-9.
inline std::vector<ConePoint> embed_cp_point(const ExpConeModel& model,
                                             std::span<const double> q) {
  constexpr double kTol = 1e-9;
  const int n = model.num_triplets();
  if (static_cast<int>(q.size()) != n) {
    throw InfeasiblePoint("expected " + std::to_string(n) + " values, got " +
                          std::to_string(q.size()));
  }
  std::vector<ConePoint> pts(n);
  for (int i = 0; i < n; ++i) {
    if (q[i] < -kTol) throw InfeasiblePoint("negative entry");
    pts[i].q = std::max(q[i], 0.0);
  }
  for (int g = 0; g < model.num_yz_groups(); ++g) {
    double sum = 0.0;
    for (int j : model.yz_group_members(g)) sum += pts[j].q;
    for (int j : model.yz_group_members(g)) pts[j].p = sum;
  }
  for (auto& pt : pts) {
    pt.r = pt.q > 0.0 ? pt.q * std::log(pt.p / pt.q) : 0.0;
  }
  if (marginal_residual(model, pack(pts)) > kTol) {
    throw InfeasiblePoint("marginal equations violated");
  }
  return pts;
}

/// Same, for a distribution whose support lies inside the model's triplets.
inline std::vector<ConePoint> embed_cp_point(const ExpConeModel& model,
                                             const JointDistribution& q) {
  std::vector<double> v(model.num_triplets(), 0.0);
  for (const auto& e : q.entries()) {
    const Outcome o = q.outcome(e);
    const auto& a = *model.marginals().alphabets;
    auto idx = [](const std::vector<Symbol>& s, const Symbol& v) {
      auto it = std::lower_bound(s.begin(), s.end(), v);
      return (it != s.end() && *it == v) ? static_cast<int>(it - s.begin()) : -1;
    };
    const int ix = idx(a.x, o.x), iy = idx(a.y, o.y), iz = idx(a.z, o.z);
    const int pos = (ix < 0 || iy < 0 || iz < 0) ? -1
                                                 : model.index().position(ix, iy, iz);
    if (pos < 0) throw InfeasiblePoint("mass outside the admissible triplets");
    v[pos] = e.p;
  }
  return embed_cp_point(model, v);
}

}  // namespace broja2pid

#include <random>

#include <gtest/gtest.h>

#include "broja2pid/gates.hpp"
#include "broja2pid/kkt.hpp"
#include "broja2pid/model.hpp"

using namespace broja2pid;

namespace {

// Full-system residual of [H A^T; A 0][dw; nu] = [r1; r2].
double kkt_residual(const ExpConeModel& m, const std::vector<ConePoint>& pts,
                    const KktSolution& sol, const Eigen::VectorXd& r1,
                    const Eigen::VectorXd& r2) {
  const auto& a = m.program().A;
  Eigen::VectorXd top = a.transpose() * sol.nu - r1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    top.segment<3>(3 * i) += barrier(pts[i]).hessian * sol.dw.segment<3>(3 * i);
  }
  const Eigen::VectorXd bottom = a * sol.dw - r2;
  return std::max(top.lpNorm<Eigen::Infinity>(), bottom.lpNorm<Eigen::Infinity>());
}

}  // namespace

class KktBackends : public ::testing::TestWithParam<KktBackend> {};

TEST_P(KktBackends, SolvesNewtonSystem) {
  const auto m = build_model(marginals(build_distribution(random_simplex_distribution(3, 3, 2, 5))));
  const auto pts = initial_point(m);
  KktSolver kkt(m, GetParam());
  kkt.factor(pts);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd r1(m.num_variables());
  for (auto& v : r1) v = g(rng);
  const Eigen::VectorXd r2 = Eigen::VectorXd::Zero(m.num_rows());
  const auto sol = kkt.solve(r1, r2);
  EXPECT_LE(kkt_residual(m, pts, sol, r1, r2), 1e-8 * (1 + r1.lpNorm<Eigen::Infinity>()));
  // decrement^2 = dw^T H dw
  double dhd = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d d = sol.dw.segment<3>(3 * i);
    dhd += d.dot(barrier(pts[i]).hessian * d);
  }
  EXPECT_NEAR(sol.decrement2, dhd, 1e-9 * (1 + dhd));
}

TEST_P(KktBackends, RejectsBoundary) {
  const auto m = build_model(marginals(build_distribution(gate("XOR"))));
  auto pts = initial_point(m);
  pts[0].r = pts[0].q * std::log(pts[0].p / pts[0].q);
  KktSolver kkt(m, GetParam());
  EXPECT_THROW(kkt.factor(pts), IllConditionedKKT);
}

INSTANTIATE_TEST_SUITE_P(Backends, KktBackends,
                         ::testing::Values(KktBackend::kDenseSchur, KktBackend::kSparseLdlt));

TEST(Kkt, AutoBackend) {
  const auto small = build_model(marginals(build_distribution(gate("AND"))));
  EXPECT_EQ(KktSolver(small, KktBackend::kAuto).backend(), KktBackend::kDenseSchur);
  const auto big = build_model(marginals(build_distribution(random_simplex_distribution(11, 11, 11, 1))));
  EXPECT_EQ(KktSolver(big, KktBackend::kAuto).backend(), KktBackend::kSparseLdlt);
}

TEST(Kkt, BackendsAgree) {
  const auto m = build_model(marginals(build_distribution(random_simplex_distribution(4, 3, 3, 8))));
  const auto pts = initial_point(m);
  KktSolver dense(m, KktBackend::kDenseSchur), sparse(m, KktBackend::kSparseLdlt);
  dense.factor(pts);
  sparse.factor(pts);
  Eigen::VectorXd r1 = Eigen::VectorXd::LinSpaced(m.num_variables(), -1.0, 1.0);
  Eigen::VectorXd r2 = Eigen::VectorXd::Zero(m.num_rows());
  const auto a = dense.solve(r1, r2);
  const auto b = sparse.solve(r1, r2);
  EXPECT_LE((a.dw - b.dw).lpNorm<Eigen::Infinity>(), 1e-8 * (1 + a.dw.lpNorm<Eigen::Infinity>()));
}

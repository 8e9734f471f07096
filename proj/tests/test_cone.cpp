#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "broja2pid/cone.hpp"
#include "broja2pid/kkt.hpp"

using namespace broja2pid;

namespace {

// Random interior point: q, p log-uniform, r below q ln(p/q) by a random slack.
ConePoint random_interior(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lg(-2.0, 1.0);
  std::uniform_real_distribution<double> slack(0.05, 2.0);
  ConePoint pt;
  pt.p = std::pow(10.0, lg(rng));
  pt.q = std::pow(10.0, lg(rng));
  pt.r = pt.q * std::log(pt.p / pt.q) - slack(rng);
  return pt;
}

Eigen::Vector3d vec(const ConePoint& pt) { return {pt.r, pt.p, pt.q}; }
ConePoint point(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

}  // namespace

TEST(Cone, Membership) {
  EXPECT_TRUE(in_exp_cone({0.0, 1.0, 1.0}, 1e-12));
  EXPECT_TRUE(in_exp_cone({-1.0, 1.0, 1.0}, 1e-12));
  EXPECT_FALSE(in_exp_cone({0.1, 1.0, 1.0}, 1e-12));
  EXPECT_TRUE(in_exp_cone({0.0, 0.0, 0.0}, 1e-12));
  EXPECT_TRUE(in_exp_cone({-5.0, 2.0, 0.0}, 1e-12));
  EXPECT_FALSE(in_exp_cone({0.5, 2.0, 0.0}, 1e-12));
  EXPECT_TRUE(in_exp_cone({std::log(2.0), 2.0, 1.0}, 1e-12));
}

TEST(Cone, DualMembership) {
  EXPECT_TRUE(in_dual_exp_cone({-1.0, 0.40, 0.0}, 1e-12));
  EXPECT_FALSE(in_dual_exp_cone({-1.0, 0.30, 0.0}, 1e-12));
  EXPECT_TRUE(in_dual_exp_cone({0.0, 1.0, 1.0}, 1e-12));
  EXPECT_FALSE(in_dual_exp_cone({0.0, -1.0, 1.0}, 1e-12));
}

TEST(Cone, BarrierValue) {
  EXPECT_NEAR(*barrier_value({-1.0, 1.0, 1.0}), 0.0, 1e-15);
  EXPECT_FALSE(barrier_value({0.0, 1.0, 1.0}).has_value());
  EXPECT_THROW(barrier({0.0, 1.0, 1.0}), BoundaryPoint);
  EXPECT_THROW(barrier({-1.0, 0.0, 1.0}), BoundaryPoint);
  EXPECT_THROW(barrier({-1.0, 1.0, -1.0}), BoundaryPoint);
}

TEST(Cone, FiniteDifferences) {
  std::mt19937_64 rng(3);
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const auto pt = random_interior(rng);
    const auto b = barrier(pt);
    const Eigen::Vector3d x = vec(pt);
    for (int i = 0; i < 3; ++i) {
      const double step = h * std::max(1.0, std::abs(x[i]));
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[i] = step;
      const double fd = (barrier(point(x + e)).value - barrier(point(x - e)).value) / (2 * step);
      EXPECT_NEAR(fd, b.gradient[i], 1e-5 * std::max(1.0, std::abs(b.gradient[i])));
      const Eigen::Vector3d gd =
          (barrier(point(x + e)).gradient - barrier(point(x - e)).gradient) / (2 * step);
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(gd[j], b.hessian(j, i), 1e-5 * std::max(1.0, std::abs(b.hessian(j, i))));
      }
    }
  }
}

TEST(Cone, LogHomogeneous) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto pt = random_interior(rng);
    const auto b = barrier(pt);
    for (double t : {0.5, 2.0, 10.0}) {
      const auto bt = barrier(point(t * vec(pt)));
      EXPECT_NEAR(bt.value, b.value - kBarrierDegree * std::log(t), 1e-12 * (1 + std::abs(b.value)));
    }
    // g(x)^T x = -3
    EXPECT_NEAR(b.gradient.dot(vec(pt)), -kBarrierDegree, 1e-9);
  }
}

TEST(Cone, HessianPositiveDefinite) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const auto b = barrier(random_interior(rng));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(b.hessian);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Cone, DualPairing) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  std::uniform_real_distribution<double> sym(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    // primal: r <= q ln(p/q); dual: -u exp(w/u) <= e v
    ConePoint a;
    a.q = u(rng);
    a.p = u(rng);
    a.r = a.q * std::log(a.p / a.q) - u(rng);
    DualConePoint d;
    d.u = -u(rng);
    d.w = sym(rng);
    d.v = -d.u * std::exp(d.w / d.u) / std::numbers::e + u(rng);
    ASSERT_TRUE(in_exp_cone(a, 0.0));
    ASSERT_TRUE(in_dual_exp_cone(d, 0.0));
    EXPECT_GE(a.r * d.u + a.p * d.v + a.q * d.w, -1e-12);
  }
}

TEST(Cone, SplitHessianMatches) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    const auto pt = random_interior(rng);
    const auto h = HessianBlock::at(pt);
    const auto b = barrier(pt);
    EXPECT_LE((h.dense() - b.hessian).norm(), 1e-10 * b.hessian.norm());
    // rounding bound for a product with condition number |M| |M^-1|
    EXPECT_LE((h.m * h.m_inv - Eigen::Matrix2d::Identity()).norm(),
              1e-14 * h.m.norm() * h.m_inv.norm());
  }
}

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "broja2pid/gates.hpp"
#include "broja2pid/model.hpp"

using namespace broja2pid;

namespace {

ExpConeModel model_of(const RawDistribution& raw) {
  return build_model(marginals(build_distribution(raw)));
}

RawDistribution full8(double w = 0.125) {
  RawDistribution r;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) r[{x, y, z}] = w;
  return r;
}

// -H(X|Y,Z) of q in nats, straight from the definition.
double neg_cond_entropy(const ExpConeModel& m, const std::vector<double>& q) {
  std::map<std::pair<int, int>, double> yz;
  for (int i = 0; i < m.num_triplets(); ++i) {
    yz[{m.index()[i].y, m.index()[i].z}] += q[i];
  }
  double f = 0.0;
  for (int i = 0; i < m.num_triplets(); ++i) {
    if (q[i] > 0) f += q[i] * std::log(q[i] / yz[{m.index()[i].y, m.index()[i].z}]);
  }
  return f;
}

}  // namespace

TEST(Model, AndSize) {
  const auto m = model_of(gate("AND"));
  EXPECT_EQ(m.num_triplets(), 5);
  EXPECT_EQ(m.num_variables(), 15);
  EXPECT_EQ(m.num_rows(), 3 + 3 + 5);
}

TEST(Model, FullSupportSize) {
  const auto m = model_of(full8());
  EXPECT_EQ(m.num_variables(), 24);
  EXPECT_EQ(m.num_rows(), 16);
}

TEST(Model, PointMass) {
  const auto m = model_of({{{0, 0, 0}, 1.0}});
  EXPECT_EQ(m.num_variables(), 3);
  EXPECT_EQ(m.num_rows(), 3);
}

TEST(Model, Coefficients) {
  const auto m = model_of(random_simplex_distribution(2, 3, 2, 4));
  const auto& a = m.program().A;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, k); it; ++it) {
      EXPECT_TRUE(it.value() == 1.0 || it.value() == -1.0);
    }
  }
  for (int i = 0; i < m.num_triplets(); ++i) {
    EXPECT_EQ(m.program().c[3 * i], -1.0);
    EXPECT_EQ(m.program().c[3 * i + 1], 0.0);
    EXPECT_EQ(m.program().c[3 * i + 2], 0.0);
  }
  // coupling rows have zero right-hand side
  for (int r = m.first_coupling_row(); r < m.num_rows(); ++r) {
    EXPECT_EQ(m.program().b[r], 0.0);
  }
}

TEST(Model, AndInitialPoint) {
  const auto m = model_of(gate("AND"));
  const auto pts = initial_point(m);
  const int i000 = m.index().position(0, 0, 0);
  ASSERT_GE(i000, 0);
  EXPECT_NEAR(pts[i000].q, 1.0 / 3.0, 1e-15);
}

TEST(Model, InitialPointFeasible) {
  for (const auto& name : gate_names()) {
    const auto m = model_of(gate(name));
    const auto pts = initial_point(m);
    EXPECT_LE(equality_residual(m, pack(pts)), 1e-12) << name;
    for (const auto& pt : pts) {
      EXPECT_NEAR(cone_slack(pt), 100.0, 1e-9) << name;
      EXPECT_GT(pt.q, 0.0);
    }
  }
}

TEST(Model, EmbedZeroEntry) {
  const auto m = model_of(gate("AND"));
  // the AND joint has mass zero on (0,1,1) which is admissible
  const auto pts = embed_cp_point(m, build_distribution(gate("AND")));
  const int i = m.index().position(0, 1, 1);
  ASSERT_GE(i, 0);
  EXPECT_EQ(pts[i].q, 0.0);
  EXPECT_EQ(pts[i].r, 0.0);
  EXPECT_NEAR(pts[i].p, 0.25, 1e-15);
  EXPECT_LE(equality_residual(m, pack(pts)), 1e-15);
}

TEST(Model, EmbedXorAndUniform) {
  const auto m = model_of(gate("XOR"));
  const auto pts = embed_cp_point(m, build_distribution(gate("XOR")));
  EXPECT_NEAR(objective(m, pack(pts)), 0.0, 1e-15);

  const std::vector<double> uni(m.num_triplets(), 0.125);
  const auto u = embed_cp_point(m, uni);
  // -sum r = sum q ln(q / q_{*yz}) = -H(X|Y,Z) = -ln 2
  EXPECT_NEAR(objective(m, pack(u)), -std::numbers::ln2, 1e-15);
}

TEST(Model, EmbedRejects) {
  const auto m = model_of(gate("XOR"));
  std::vector<double> q(m.num_triplets(), 0.125);
  q[0] += 0.01;
  EXPECT_THROW(embed_cp_point(m, q), InfeasiblePoint);
  std::vector<double> neg(m.num_triplets(), 0.125);
  neg[0] = -0.01;
  EXPECT_THROW(embed_cp_point(m, neg), InfeasiblePoint);
  EXPECT_THROW(embed_cp_point(m, std::vector<double>(3, 0.0)), InfeasiblePoint);
}

TEST(Model, ObjectiveMatchesConvexProgram) {
  // Random feasible q on the 2x2x2 full support: the uniform point plus a
  // multiple of the null-space direction (-1)^(x+y+z).
  const auto m = model_of(full8());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.125, 0.125);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng);
    std::vector<double> q(m.num_triplets());
    for (int i = 0; i < m.num_triplets(); ++i) {
      const auto& t = m.index()[i];
      q[i] = 0.125 + ((t.x + t.y + t.z) % 2 ? -a : a);
    }
    const auto w = pack(embed_cp_point(m, q));
    EXPECT_NEAR(objective(m, w), neg_cond_entropy(m, q), 1e-14);
    EXPECT_LE(equality_residual(m, w), 1e-15);
  }
}

TEST(Model, Deterministic) {
  const auto raw = random_simplex_distribution(3, 2, 3, 12);
  const auto a = model_of(raw);
  const auto b = model_of(raw);
  EXPECT_EQ(a.program().c, b.program().c);
  EXPECT_EQ(a.program().b, b.program().b);
  EXPECT_EQ(Eigen::MatrixXd(a.program().A), Eigen::MatrixXd(b.program().A));
}

TEST(Model, PackRoundTrip) {
  const auto m = model_of(gate("XORAND"));
  const auto pts = initial_point(m);
  const auto back = unpack(pack(pts));
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].r, pts[i].r);
    EXPECT_EQ(back[i].p, pts[i].p);
    EXPECT_EQ(back[i].q, pts[i].q);
  }
}

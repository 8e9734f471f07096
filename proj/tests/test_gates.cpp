#include <cmath>

#include <gtest/gtest.h>

#include "broja2pid/distributions.hpp"
#include "broja2pid/gates.hpp"

using namespace broja2pid;

TEST(Gates, Supports) {
  const auto a = gate("AND");
  EXPECT_EQ(a.size(), 4u);
  EXPECT_DOUBLE_EQ(a.at({1, 1, 1}), 0.25);
  EXPECT_DOUBLE_EQ(a.at({0, 0, 1}), 0.25);
  const auto x = gate("XOR");
  EXPECT_EQ(x.size(), 4u);
  EXPECT_DOUBLE_EQ(x.at({1, 0, 1}), 0.25);
  const auto r = gate("RDN");
  EXPECT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r.at({1, 1, 1}), 0.5);
  EXPECT_EQ(gate("RDNXOR").size(), 8u);
  EXPECT_EQ(gate("RDNUNQXOR").size(), 32u);
  EXPECT_EQ(gate("XORAND").size(), 4u);
  for (const auto& name : gate_names()) {
    double total = 0.0;
    for (const auto& [o, w] : gate(name)) total += w;
    EXPECT_DOUBLE_EQ(total, 1.0) << name;
  }
}

TEST(Gates, Unknown) {
  EXPECT_THROW(gate("NAND"), UnknownGate);
  EXPECT_THROW(gate_reference("NAND"), UnknownGate);
}

TEST(Gates, ReferencesSumToMutualInformation) {
  for (const auto& name : gate_names()) {
    const auto ref = gate_reference(name);
    const auto p = build_distribution(gate(name));
    const double mi = mutual_information(p, Grouping::kXwithYZ) / std::log(2.0);
    EXPECT_NEAR(ref.si + ref.uiy + ref.uiz + ref.ci, mi, 1e-14) << name;
  }
}

TEST(Gates, Copy) {
  const auto c = copy_gate(2, 2);
  EXPECT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c.at({3, 1, 1}), 0.25);
  const auto d = copy_gate(2, 3);
  EXPECT_EQ(d.size(), 6u);
  EXPECT_DOUBLE_EQ(d.at({5, 1, 2}), 1.0 / 6.0);
  EXPECT_THROW(copy_gate(0, 3), InvalidSize);
  EXPECT_THROW(copy_gate(2, -1), InvalidSize);
  const auto one = copy_gate(1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one.at({0, 0, 0}), 1.0);
}

TEST(Gates, RandomDeterministic) {
  EXPECT_EQ(random_simplex_distribution(2, 3, 2, 5), random_simplex_distribution(2, 3, 2, 5));
  EXPECT_NE(random_simplex_distribution(2, 3, 2, 5), random_simplex_distribution(2, 3, 2, 6));
  EXPECT_THROW(random_simplex_distribution(0, 1, 1, 1), InvalidSize);
}

TEST(Gates, RandomUniformOnSimplex) {
  // Each coordinate of a uniform point on the 8-simplex has mean 1/8 and
  // variance (1/8)(7/8)/9.
  const int draws = 100000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    const auto d = random_simplex_distribution(2, 2, 2, 1000 + k);
    sum += d.at({0, 0, 0});
  }
  const double mean = sum / draws;
  const double se = std::sqrt(0.125 * 0.875 / 9.0 / draws);
  EXPECT_NEAR(mean, 0.125, 3 * se);
}

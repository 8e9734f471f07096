#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "broja2pid/gates.hpp"
#include "broja2pid/pid.hpp"

using namespace broja2pid;

namespace {

void expect_atoms(const PidResult& r, double si, double uiy, double uiz, double ci,
                  double tol) {
  EXPECT_NEAR(r.si, si, tol);
  EXPECT_NEAR(r.uiy, uiy, tol);
  EXPECT_NEAR(r.uiz, uiz, tol);
  EXPECT_NEAR(r.ci, ci, tol);
}

double bits(double nats) { return nats_to_bits(nats); }

}  // namespace

TEST(Pid, Xor) { expect_atoms(pid(gate("XOR")), 0, 0, 0, 1, 1e-6); }
TEST(Pid, Rdn) { expect_atoms(pid(gate("RDN")), 1, 0, 0, 0, 1e-6); }

TEST(Pid, And) {
  const auto r = pid(gate("AND"));
  expect_atoms(r, 0.31127812445913283, 0, 0, 0.5, 1e-6);
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_EQ(r.solver, kSolverName);
  EXPECT_FALSE(r.consistency_warning);
}

TEST(Pid, Copy4x4) { expect_atoms(pid(copy_gate(4, 4)), 0, 2, 2, 0, 1e-6); }

TEST(Pid, RejectsNegative) {
  EXPECT_THROW(pid({{{0, 0, 0}, 1.2}, {{1, 1, 1}, -0.2}}), NegativeProbability);
}

TEST(Pid, SumRuleAndIdentities) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto raw = random_simplex_distribution(2, 3, 3, seed);
    const auto p = build_distribution(raw);
    const auto r = pid(raw);
    const double mi = bits(mutual_information(p, Grouping::kXwithYZ));
    EXPECT_NEAR(r.si + r.uiy + r.uiz + r.ci, mi, 1e-9);
    EXPECT_NEAR(r.si + r.uiy, bits(mutual_information(p, Grouping::kXwithY)), 1e-9);
    EXPECT_NEAR(r.si + r.uiz, bits(mutual_information(p, Grouping::kXwithZ)), 1e-6);
    EXPECT_NEAR(r.uiy + r.ci, bits(mutual_information(p, Grouping::kXwithYgivenZ)), 1e-6);
    EXPECT_GE(r.si, -1e-6);
    EXPECT_GE(r.uiy, -1e-6);
    EXPECT_GE(r.uiz, -1e-6);
    EXPECT_GE(r.ci, -1e-6);
  }
}

TEST(Pid, RelabelSymmetry) {
  const auto raw = random_simplex_distribution(3, 2, 2, 31);
  RawDistribution renamed;
  for (const auto& [o, w] : raw) {
    renamed[{Symbol("x" + o.x.to_string()), Symbol(7 - o.y.as_integer()),
             Symbol("z" + o.z.to_string())}] = w;
  }
  const auto a = pid(raw);
  const auto b = pid(renamed);
  expect_atoms(b, a.si, a.uiy, a.uiz, a.ci, 1e-6);
}

TEST(Pid, SwapYZ) {
  const auto raw = random_simplex_distribution(2, 3, 2, 77);
  RawDistribution swapped;
  for (const auto& [o, w] : raw) swapped[{o.x, o.z, o.y}] = w;
  const auto a = pid(raw);
  const auto b = pid(swapped);
  expect_atoms(b, a.si, a.uiz, a.uiy, a.ci, 1e-6);
}

TEST(Pid, ReturndataRoundTrip) {
  const auto r = pid(gate("AND"));
  const auto j = to_returndata(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"SI", "UIY", "UIZ", "CI", "Num_err", "Solver"}));
  std::ostringstream os;
  print_returndata(os, r);
  const auto back = parse_returndata(os.str());
  EXPECT_EQ(back.si, r.si);
  EXPECT_EQ(back.uiy, r.uiy);
  EXPECT_EQ(back.uiz, r.uiz);
  EXPECT_EQ(back.ci, r.ci);
  EXPECT_EQ(back.num_err.primal_violation, r.num_err.primal_violation);
  EXPECT_EQ(back.num_err.dual_violation, r.num_err.dual_violation);
  EXPECT_EQ(back.num_err.gap_violation, r.num_err.gap_violation);
  EXPECT_EQ(back.solver, r.solver);
}

TEST(Pid, ReturndataRejects) {
  EXPECT_THROW(parse_returndata(std::string_view("{\"SI\": 1}")), ParseError);
  EXPECT_THROW(parse_returndata(std::string_view("not json")), ParseError);
  auto j = nlohmann::json::parse(to_returndata(pid(gate("XOR"))).dump());
  j["extra"] = 1;
  EXPECT_THROW(parse_returndata(j), ParseError);
}

TEST(Pid, OutputModes) {
  std::ostringstream o0, o1, o2;
  pid(gate("XOR"), {}, 0, &o0);
  pid(gate("XOR"), {}, 1, &o1);
  pid(gate("XOR"), {}, 2, &o2);
  const std::string s0 = o0.str();
  EXPECT_EQ(std::count(s0.begin(), s0.end(), '\n'), 1);
  EXPECT_NE(o1.str().find(o0.str()), std::string::npos);
  EXPECT_NE(o2.str().find(o0.str()), std::string::npos);
  EXPECT_NE(o1.str().find("# BROJA_2PID: calling solver"), std::string::npos);
  EXPECT_NE(o2.str().find("# BROJA_2PID: calling solver"), std::string::npos);
  EXPECT_GT(o2.str().size(), o1.str().size());
  EXPECT_THROW(pid(gate("XOR"), {}, 3, &o0), InvalidParams);
}

TEST(Pid, MassLoss) {
  const auto p = build_distribution(gate("XOR"));
  EXPECT_THROW(decompose_entries(p, {{0, 0, 0, 0.5}}), MassLoss);
  const auto r = decompose_entries(p, {{0, 0, 0, 0.25}, {1, 0, 1, 0.25}, {1, 1, 0, 0.25},
                                       {0, 1, 1, 0.25}, {1, 1, 1, -0.0}});
  EXPECT_NEAR(r.ci, 0.0, 1e-15);
}

TEST(Pid, PointMass) { expect_atoms(pid({{{1, 2, 3}, 1.0}}), 0, 0, 0, 0, 1e-9); }

// Copyright 2026 The fedtrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fedtrade/lp.hpp"

namespace fedtrade::lp {
namespace {

TEST(Solve, OneDimensional) {
  Model m;
  auto x = m.add_variable(1.0);
  m.add_row({{x, 1.0}}, Relation::kLe, 3.0);
  auto s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 3.0, 1e-12);
  EXPECT_NEAR(s.x[0], 3.0, 1e-12);
  EXPECT_NEAR(s.duals[0], 1.0, 1e-12);
}

TEST(Solve, InfeasibleAndUnbounded) {
  Model m;
  auto x = m.add_variable(1.0);
  m.add_row({{x, 0.0}}, Relation::kLe, -1.0);
  EXPECT_EQ(solve(m).status, Status::kInfeasible);

  Model u;
  auto a = u.add_variable(1.0);
  auto b = u.add_variable(0.0);
  u.add_row({{a, 1.0}, {b, -1.0}}, Relation::kLe, 1.0);
  EXPECT_EQ(solve(u).status, Status::kUnbounded);

  Model empty;
  empty.add_row({}, Relation::kGe, 1.0);
  EXPECT_EQ(solve(empty).status, Status::kInfeasible);
  EXPECT_TRUE(solve(Model{}).optimal());
}

TEST(Solve, EqualityAndGreaterRowsWithBoundDuals) {
  // max 2x + y, x + y = 4, x >= 1, x <= 3 (explicit bound), y <= 10.
  Model m;
  auto x = m.add_variable(2.0, 3.0);
  auto y = m.add_variable(1.0, 10.0);
  m.add_row({{x, 1.0}, {y, 1.0}}, Relation::kEq, 4.0);
  m.add_row({{x, 1.0}}, Relation::kGe, 1.0);
  auto s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 7.0, 1e-9);
  EXPECT_NEAR(s.x[x], 3.0, 1e-9);
  EXPECT_NEAR(s.duals[0], 1.0, 1e-9);
  EXPECT_NEAR(s.duals[1], 0.0, 1e-9);
  EXPECT_NEAR(s.bound_duals[x], 1.0, 1e-9);
  EXPECT_NEAR(dual_objective(m, s), s.objective, 1e-9);
}

TEST(Solve, RedundantEqualityRows) {
  Model m;
  auto x = m.add_variable(1.0);
  auto y = m.add_variable(1.0);
  m.add_row({{x, 1.0}, {y, 1.0}}, Relation::kEq, 2.0);
  m.add_row({{x, 2.0}, {y, 2.0}}, Relation::kEq, 4.0);
  auto s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 2.0, 1e-9);
  EXPECT_LE(m.primal_residual(s.x), 1e-9);
  EXPECT_LE(dual_residual(m, s), 1e-9);
}

TEST(Solve, TwoBuyerOneSellerAuctionRelaxation) {
  // One seller with 2 VMs at ask 1; unit bundles bid 5 and 3.
  Model m;
  auto a = m.add_variable(5.0 - 1.0, 1.0, true);
  auto b = m.add_variable(3.0 - 1.0, 1.0, true);
  m.add_row({{a, 1.0}}, Relation::kLe, 1.0);
  m.add_row({{b, 1.0}}, Relation::kLe, 1.0);
  m.add_row({{a, 1.0}, {b, 1.0}}, Relation::kLe, 2.0);
  auto s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 6.0, 1e-12);
  auto ip = brute_force_ip(m);
  ASSERT_TRUE(ip.feasible);
  EXPECT_NEAR(ip.objective, 6.0, 1e-12);
  EXPECT_EQ(ip.x, (std::vector<long>{1, 1}));
}

TEST(BruteForce, EmptyLexTieAndCap) {
  auto e = brute_force_ip(Model{});
  EXPECT_TRUE(e.feasible);
  EXPECT_EQ(e.objective, 0);

  Model tie;
  auto a = tie.add_variable(1.0, 1.0, true);
  auto b = tie.add_variable(1.0, 1.0, true);
  tie.add_row({{a, 1.0}, {b, 1.0}}, Relation::kLe, 1.0);
  EXPECT_EQ(brute_force_ip(tie).x, (std::vector<long>{0, 1}));

  Model big;
  for (int j = 0; j < 25; ++j) big.add_variable(1.0, 1.0, true);
  EXPECT_THROW(brute_force_ip(big), std::length_error);
  Model cont;
  cont.add_variable(1.0, 1.0, false);
  EXPECT_THROW(brute_force_ip(cont), std::invalid_argument);
}

Model random_model(std::mt19937_64& rng, bool integer) {
  std::uniform_real_distribution<> u(-1, 1);
  Model m;
  const int n = 1 + static_cast<int>(rng() % 6);
  const int rows = 1 + static_cast<int>(rng() % 5);
  for (int j = 0; j < n; ++j) m.add_variable(std::round(10 * u(rng)) / 2, 1 + rng() % 3, integer);
  for (int r = 0; r < rows; ++r) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (int j = 0; j < n; ++j)
      if (rng() % 3) terms.push_back({static_cast<std::size_t>(j), std::round(6 * u(rng)) / 2});
    const int kind = static_cast<int>(rng() % 5);
    const Relation rel = kind < 3 ? Relation::kLe : kind == 3 ? Relation::kGe : Relation::kEq;
    double rhs = std::round(8 * u(rng)) / 2;
    if (rel == Relation::kLe) rhs = std::abs(rhs) + 1;
    m.add_row(std::move(terms), rel, rhs);
  }
  return m;
}

// Optimality is certified by feasibility on both sides and equal objectives.
TEST(Solve, RandomModelsCertifyOptimality) {
  std::mt19937_64 rng(1234);
  int optimal = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Model m = random_model(rng, false);
    auto s = solve(m);
    if (!s.optimal()) continue;
    ++optimal;
    EXPECT_LE(m.primal_residual(s.x), 1e-6) << trial;
    EXPECT_LE(dual_residual(m, s), 1e-6) << trial;
    EXPECT_NEAR(dual_objective(m, s), s.objective, 1e-6 * std::max(1.0, std::abs(s.objective))) << trial;
  }
  EXPECT_GT(optimal, 500);
}

TEST(Solve, ScalingObjectivePreservesSolution) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    Model m = random_model(rng, false);
    auto s = solve(m);
    if (!s.optimal()) continue;
    Model scaled = m;
    for (std::size_t j = 0; j < m.num_vars(); ++j) scaled.set_objective(j, 2.5 * m.objective()[j]);
    auto t = solve(scaled);
    ASSERT_TRUE(t.optimal());
    EXPECT_NEAR(t.objective, 2.5 * s.objective, 1e-9 * std::max(1.0, std::abs(s.objective)));
    for (std::size_t j = 0; j < m.num_vars(); ++j) EXPECT_NEAR(t.x[j], s.x[j], 1e-9);
  }
}

TEST(BruteForce, DominatedByRelaxationAndMatchesIntegralOptima) {
  std::mt19937_64 rng(4321);
  for (int trial = 0; trial < 1000; ++trial) {
    Model m = random_model(rng, true);
    auto s = solve(m);
    auto ip = brute_force_ip(m);
    if (!ip.feasible) continue;
    ASSERT_TRUE(s.optimal()) << trial;
    EXPECT_LE(ip.objective, s.objective + 1e-6) << trial;
    bool integral = true;
    for (double v : s.x) integral = integral && std::abs(v - std::round(v)) < 1e-9;
    if (integral) {
      EXPECT_NEAR(ip.objective, s.objective, 1e-6) << trial;
    }
  }
}

TEST(Solve, Deterministic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Model m = random_model(rng, false);
    auto a = solve(m), b = solve(m);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.duals, b.duals);
  }
}

TEST(LpText, DumpsRowsAndBounds) {
  Model m;
  auto x = m.add_variable(4.0, 1.0, true, "y_1_2");
  auto y = m.add_variable(-1.0, kInf, false, "z");
  m.add_row({{x, 1.0}, {y, -2.0}}, Relation::kLe, 3.0, "cap_1");
  std::ostringstream os;
  write_lp_text(os, m);
  EXPECT_EQ(os.str(),
            "Maximize\n obj: 4 y_1_2 - z\nSubject To\n cap_1: y_1_2 - 2 z <= 3\nBounds\n"
            " 0 <= y_1_2 <= 1\n z >= 0\nGenerals\n y_1_2\nEnd\n");
}

}  // namespace
}  // namespace fedtrade::lp

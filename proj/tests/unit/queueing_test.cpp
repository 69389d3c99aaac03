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

#include <gtest/gtest.h>

#include "fedtrade/queueing.hpp"
#include "test_support.hpp"

namespace fedtrade {
namespace {

using testing::cloud;
using testing::job_type;
using testing::make_config;

TEST(JobQueue, Update) {
  EXPECT_EQ(update_job_queue(5, 2, 0, 3), 6);
  EXPECT_EQ(update_job_queue(0, 0, 0, 0), 0);
  EXPECT_EQ(update_job_queue(2, 5, 0, 1), 1);
  EXPECT_THROW(update_job_queue(-1, 0, 0, 0), std::domain_error);
}

TEST(VirtualQueue, Update) {
  EXPECT_DOUBLE_EQ(update_virtual_queue(4, 3, 1, 2, 0, 10), 3);
  EXPECT_DOUBLE_EQ(update_virtual_queue(4, 0, 1, 0, 0, 10), 0);
  EXPECT_DOUBLE_EQ(update_virtual_queue(0, 1, 2, 0, 0, 10), 2);
  EXPECT_THROW(update_virtual_queue(0, 1, 0, 0, 0, 10), std::domain_error);
}

TEST(DropDecision, Threshold) {
  EXPECT_EQ(drop_decision(40, 5, 1, 10, 5, 3), 0);
  EXPECT_EQ(drop_decision(40, 11, 1, 10, 5, 3), 3);
  EXPECT_EQ(drop_decision(0, 0, 1, 10, 5, 3), 0);
  EXPECT_EQ(drop_decision(0, 0, 3, 0, 0, 3), 0);
  EXPECT_EQ(drop_decision(0, 0, 2, 1, 0, 3), 0);
}

TEST(DropDecision, MonotoneInBacklog) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<> u(0, 50);
  for (int i = 0; i < 5000; ++i) {
    const long q = rng() % 40;
    const double Z = u(rng);
    const int w = 1 + rng() % 5;
    const double V = u(rng), alpha = u(rng);
    if (drop_decision(q, Z, w, V, alpha, 2) == 0) continue;
    EXPECT_EQ(drop_decision(q + static_cast<long>(rng() % 5), Z + u(rng), w, V, alpha, 2), 2);
  }
}

TEST(DelayBound, Ceiling) {
  EXPECT_EQ(delay_bound(10, 20, 2), 15);
  EXPECT_EQ(delay_bound(0, 0, 1), 0);
  EXPECT_EQ(delay_bound(1, 1, 3), 1);
  EXPECT_THROW(delay_bound(1, 1, 0), std::domain_error);
  EXPECT_THROW(delay_bound(1, 1, -2), std::domain_error);
}

TEST(NoDropCondition, BothSides) {
  auto cfg = make_config({cloud(10, 1)}, {job_type(1, 1)});
  cfg.params.gamma = 2;
  auto check = no_drop_condition(cfg);
  EXPECT_DOUBLE_EQ(check.lhs, 2);
  EXPECT_DOUBLE_EQ(check.rhs, 10);
  EXPECT_TRUE(check.holds);
  cfg.clouds[0].servers = 1;
  check = no_drop_condition(cfg);
  EXPECT_DOUBLE_EQ(check.lhs, 2);
  EXPECT_DOUBLE_EQ(check.rhs, 1);
  EXPECT_FALSE(check.holds);
  cfg.params.gamma = 1;
  EXPECT_THROW(no_drop_condition(cfg), std::domain_error);
}

TEST(NoDropCondition, ThreeCloudScale) {
  auto cfg = make_config({cloud(1000, 10), cloud(1000, 10), cloud(1000, 10)},
                         {job_type(1, 1), job_type(5, 5)});
  cfg.params.gamma = 80;
  cfg.params.a_max = 1;
  auto check = no_drop_condition(cfg);
  // 3*5*5*(25+1)/1 = 1950 against (75/80)*2*30000/25 = 2250.
  EXPECT_DOUBLE_EQ(check.lhs, 1950);
  EXPECT_DOUBLE_EQ(check.rhs, 2250);
  EXPECT_TRUE(check.holds);
}

TEST(StepQueues, FixedPointAndSingleQueue) {
  auto cfg = make_config({cloud(10, 1)}, {job_type(1, 1)});
  auto zero = QueueState::zeros(1, 1);
  Grid<long> none(1, 1, 0);
  EXPECT_EQ(step_queues(zero, none, none, none, cfg), zero);

  QueueState s = zero;
  s.q(0, 0) = 5;
  s.Z(0, 0) = 4;
  auto next = step_queues(s, Grid<long>(1, 1, 2), none, Grid<long>(1, 1, 3), cfg);
  EXPECT_EQ(next.q(0, 0), 6);
  EXPECT_DOUBLE_EQ(next.Z(0, 0), 3);
  EXPECT_THROW(step_queues(s, Grid<long>(1, 1, -1), none, none, cfg), std::domain_error);
}

TEST(StepQueues, MatchesScalarOpsEntrywise) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto cfg = make_config({cloud(1 + rng() % 4, 1 + rng() % 4), cloud(1 + rng() % 4, 2)},
                           {job_type(1, 1), job_type(2, 3), job_type(3, 2)});
    for (auto& e : cfg.epsilon.values()) e = 0.25 + (rng() % 8) * 0.25;
    QueueState s = QueueState::zeros(2, 3);
    Grid<long> U(2, 3), G(2, 3), A(2, 3);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 3; ++k) {
        s.q(j, k) = rng() % 6;
        s.Z(j, k) = (rng() % 20) * 0.5;
        U(j, k) = rng() % 4;
        G(j, k) = rng() % 3;
        A(j, k) = rng() % 3;
      }
    auto next = step_queues(s, U, G, A, cfg);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 3; ++k) {
        const long q = s.q(j, k);
        const long u = std::min(q, U(j, k));
        const long g = std::min(G(j, k), q - u);
        long cap = 0;
        for (const auto& c : cfg.clouds) cap += c.servers * c.vms_per_server / cfg.job_types[k].vm_count;
        EXPECT_EQ(next.q(j, k), update_job_queue(q, u, g, A(j, k)));
        EXPECT_DOUBLE_EQ(next.Z(j, k),
                         update_virtual_queue(s.Z(j, k), q, cfg.epsilon(j, k), u, g, cap));
        EXPECT_GE(next.q(j, k), 0);
        EXPECT_GE(next.Z(j, k), 0.0);
      }
  }
}

}  // namespace
}  // namespace fedtrade

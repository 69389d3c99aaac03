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

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "fedtrade/config_io.hpp"
#include "fedtrade/domain.hpp"
#include "test_support.hpp"

namespace fedtrade {
namespace {

using testing::cloud;
using testing::job_type;
using testing::make_config;

FederationConfig three_cloud_setup() {
  auto cfg = make_config({cloud(1000, 10, 0.12), cloud(1000, 10, 0.12), cloud(1000, 10, 0.12)},
                         {job_type(1, 1, 0.5), job_type(3, 4, 2.0), job_type(5, 5, 5.0)});
  cfg.params.gamma = 16 * cfg.w_max();
  return cfg;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

TEST(Grid, NestedRoundTrip) {
  Grid<int> g(2, 3, 0);
  g(1, 2) = 7;
  EXPECT_EQ(Grid<int>::from_nested(g.to_nested()), g);
  EXPECT_THROW(g.at(2, 0), std::out_of_range);
  EXPECT_THROW(Grid<int>::from_nested({{1, 2}, {3}}), std::invalid_argument);
}

TEST(Capacity, Products) {
  EXPECT_EQ(capacity(cloud(1000, 10)), 10000);
  EXPECT_EQ(capacity(cloud(1, 1)), 1);
  EXPECT_EQ(capacity(cloud(3, 7)), 21);
}

TEST(ValidateConfig, WellFormedThreeCloudSetup) {
  EXPECT_TRUE(validate_config(three_cloud_setup()).empty());
}

TEST(ValidateConfig, FrameMustExceedLongestJob) {
  auto cfg = three_cloud_setup();
  cfg.params.gamma = cfg.w_max();
  auto v = validate_config(cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "Γ must exceed w^max");
  EXPECT_EQ(v[0].field, "params.gamma");
}

TEST(ValidateConfig, EpsilonAboveArrivalBound) {
  auto cfg = three_cloud_setup();
  cfg.epsilon(1, 2) = cfg.params.a_max + 1;
  auto v = validate_config(cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "ε exceeds A^max");
  EXPECT_EQ(v[0].field, "penalties.epsilon[2][3]");
}

TEST(ValidateConfig, ReportsEveryBrokenField) {
  auto cfg = three_cloud_setup();
  cfg.clouds[0].servers = 0;
  cfg.clouds[1].egress_price = -1;
  cfg.job_types[0].vm_count = 0;
  cfg.alpha(0, 0) = -2;
  cfg.params.V = 0;
  cfg.params.g_max_drop = Grid<long>(1, 1, 0);
  auto v = validate_config(cfg);
  EXPECT_TRUE(has_rule(v, "must be a positive integer"));
  EXPECT_TRUE(has_rule(v, "must be nonnegative"));
  EXPECT_TRUE(has_rule(v, "must be at least 1"));
  EXPECT_TRUE(has_rule(v, "α must be nonnegative"));
  EXPECT_TRUE(has_rule(v, "V must be positive"));
  EXPECT_TRUE(has_rule(v, "must be a 3x3 table"));
  cfg.clouds[2].price_series = {0.1, -0.2};
  EXPECT_TRUE(has_rule(validate_config(cfg), "VM cost must be nonnegative"));
}

// Random placements against a direct recount of both placement rules.
TEST(Placement, ValidatorAgreesWithRecount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t J = 1 + rng() % 3;
    std::vector<CloudConfig> clouds;
    for (std::size_t i = 0; i < J; ++i) clouds.push_back(cloud(1 + rng() % 3, 1 + rng() % 3));
    auto cfg = make_config(clouds, {job_type(1, 1), job_type(2, 1), job_type(3, 2)});
    std::vector<Job> jobs;
    const int n = static_cast<int>(rng() % 6);
    for (int l = 0; l < n; ++l) {
      Job job;
      job.uid = static_cast<JobUid>(l + 1);
      job.type = rng() % 3;
      jobs.push_back(job);
    }
    Placement p;
    for (const auto& job : jobs) {
      const int copies = (rng() % 10 == 0) ? static_cast<int>(rng() % 3) : 1;
      for (int c = 0; c < copies; ++c) p.push_back({job.uid, static_cast<CloudIndex>(rng() % J)});
    }
    bool expected_ok = true;
    std::vector<long> used(J, 0);
    for (const auto& job : jobs) {
      int hits = 0;
      for (const auto& e : p)
        if (e.job == job.uid) {
          ++hits;
          used[e.cloud] += cfg.job_types[job.type].vm_count;
        }
      if (hits != 1) expected_ok = false;
    }
    for (std::size_t i = 0; i < J; ++i)
      if (used[i] > cfg.clouds[i].servers * cfg.clouds[i].vms_per_server) expected_ok = false;
    EXPECT_EQ(placement_violations(cfg, jobs, p).empty(), expected_ok) << "trial " << trial;
  }
}

TEST(ConfigIo, FileRoundTripIsIdentity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto cfg = three_cloud_setup();
    for (auto& a : cfg.alpha.values()) a = std::uniform_real_distribution<>(0, 50)(rng);
    for (auto& c : cfg.clouds) c.egress_price = std::uniform_real_distribution<>(0, 1)(rng);
    cfg.params.seed = rng();
    cfg.params.V = std::uniform_real_distribution<>(0.1, 100)(rng);
    const std::string path = ::testing::TempDir() + "cfg_roundtrip.json";
    save_config(cfg, path);
    EXPECT_EQ(load_config(path), cfg);
    std::remove(path.c_str());
  }
}

TEST(ConfigIo, RejectsMissingFieldsAndBadIds) {
  auto j = config_to_json(three_cloud_setup());
  auto missing = j;
  missing["clouds"][0].erase("servers");
  EXPECT_THROW(config_from_json(missing), ConfigError);
  auto bad_id = j;
  bad_id["job_types"][1]["id"] = 7;
  EXPECT_THROW(config_from_json(bad_id), ConfigError);
  auto ragged = j;
  ragged["penalties"]["alpha"][1] = nlohmann::json::array({1.0});
  EXPECT_THROW(config_from_json(ragged), ConfigError);
}

}  // namespace
}  // namespace fedtrade

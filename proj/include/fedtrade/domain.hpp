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

#pragma once

/// \file
/// Core value types of a cloud federation: clouds, job types, jobs,
/// placements, queue state and configuration.
///
/// All indices are 0-based in memory. File formats and log output use
/// 1-based cloud and job-type identifiers.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedtrade/grid.hpp"

namespace fedtrade {

using CloudIndex = std::size_t;
using TypeIndex = std::size_t;
using JobUid = std::uint64_t;
using Slot = long;

struct JobType {
  int vm_count = 1;          ///< VMs per job (g)
  int duration = 1;          ///< slots the job runs (w)
  double migration_data = 0; ///< data moved per migrated VM (phi)

  bool operator==(const JobType&) const = default;
};

struct CloudConfig {
  long servers = 1;
  long vms_per_server = 1;
  double egress_price = 0;  ///< per unit of data leaving this cloud
  /// Per-slot VM cost. Usually filled from a price trace, not the config file.
  std::vector<double> price_series;

  bool operator==(const CloudConfig&) const = default;
};

/// VMs a cloud can host at once.
inline long capacity(const CloudConfig& cloud) {
  return cloud.servers * cloud.vms_per_server;
}

struct AlgorithmParams {
  double V = 1;
  int gamma = 2;            ///< refresh frame length
  int a_max = 1;            ///< per-slot arrival bound for one (cloud, type)
  Grid<long> g_max_drop;    ///< per (cloud, type) drop cap
  std::uint64_t seed = 0;
  int w_min = 1;            ///< accepted for completeness; unused

  bool operator==(const AlgorithmParams&) const = default;
};

/// Static description of a federation.
struct FederationConfig {
  std::vector<CloudConfig> clouds;
  std::vector<JobType> job_types;
  Grid<double> alpha;    ///< drop penalty per (cloud, type)
  Grid<double> epsilon;  ///< virtual-queue fill rate per (cloud, type)
  AlgorithmParams params;

  std::size_t num_clouds() const noexcept { return clouds.size(); }
  std::size_t num_types() const noexcept { return job_types.size(); }

  int w_max() const {
    int w = 0;
    for (const auto& t : job_types) w = std::max(w, t.duration);
    return w;
  }
  int g_max() const {
    int g = 0;
    for (const auto& t : job_types) g = std::max(g, t.vm_count);
    return g;
  }
  int g_min() const {
    if (job_types.empty()) return 0;
    int g = job_types.front().vm_count;
    for (const auto& t : job_types) g = std::min(g, t.vm_count);
    return g;
  }
  long total_capacity() const {
    long c = 0;
    for (const auto& cl : clouds) c += capacity(cl);
    return c;
  }

  bool operator==(const FederationConfig&) const = default;
};

/// A single job of some owner cloud.
struct Job {
  JobUid uid = 0;
  CloudIndex owner = 0;
  TypeIndex type = 0;
  Slot arrival_slot = 0;
  std::optional<Slot> start_slot;
  int remaining_slots = 0;
  std::optional<CloudIndex> current_cloud;  ///< set iff running

  bool running() const noexcept { return current_cloud.has_value(); }
  bool operator==(const Job&) const = default;
};

/// Co-located placement: each running job sits entirely in one cloud.
struct PlacementEntry {
  JobUid job = 0;
  CloudIndex cloud = 0;
};
using Placement = std::vector<PlacementEntry>;

/// g x g traffic volumes between the VMs of one job. Diagonal is ignored.
struct TrafficMatrix {
  std::size_t dim = 0;
  std::vector<double> volumes;  ///< row-major dim*dim

  static TrafficMatrix zeros(std::size_t n) { return {n, std::vector<double>(n * n, 0.0)}; }
  double operator()(std::size_t r, std::size_t s) const { return volumes[r * dim + s]; }
  double& operator()(std::size_t r, std::size_t s) { return volumes[r * dim + s]; }
};

struct QueueState {
  Grid<long> q;    ///< unscheduled jobs per (cloud, type)
  Grid<double> Z;  ///< virtual backlog per (cloud, type)

  static QueueState zeros(std::size_t clouds, std::size_t types) {
    return {Grid<long>(clouds, types, 0), Grid<double>(clouds, types, 0.0)};
  }
  bool operator==(const QueueState&) const = default;
};

struct Violation {
  std::string field;
  std::string rule;
};

/// Lists every broken invariant of `cfg`. An empty list means valid.
inline std::vector<Violation> validate_config(const FederationConfig& cfg) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };
  const std::size_t J = cfg.num_clouds();
  const std::size_t K = cfg.num_types();
  if (J == 0) add("clouds", "at least one cloud required");
  if (K == 0) add("job_types", "at least one job type required");

  for (std::size_t j = 0; j < J; ++j) {
    const auto& c = cfg.clouds[j];
    const std::string f = "clouds[" + std::to_string(j + 1) + "]";
    if (c.servers < 1) add(f + ".servers", "must be a positive integer");
    if (c.vms_per_server < 1) add(f + ".vms_per_server", "must be a positive integer");
    if (c.servers >= 1 && c.vms_per_server >= 1 && capacity(c) < 1)
      add(f, "capacity N*H must be at least 1");
    if (!(c.egress_price >= 0)) add(f + ".egress_price", "must be nonnegative");
    for (std::size_t t = 0; t < c.price_series.size(); ++t)
      if (!(c.price_series[t] >= 0)) {
        add(f + ".price_series[" + std::to_string(t) + "]", "VM cost must be nonnegative");
        break;
      }
  }
  const int w_max = cfg.w_max();
  for (std::size_t k = 0; k < K; ++k) {
    const auto& t = cfg.job_types[k];
    const std::string f = "job_types[" + std::to_string(k + 1) + "]";
    if (t.vm_count < 1) add(f + ".vm_count", "must be at least 1");
    if (t.duration < 1) add(f + ".duration", "must be at least 1");
    if (!(t.migration_data >= 0)) add(f + ".migration_data", "must be nonnegative");
  }

  const auto& p = cfg.params;
  if (!(p.V > 0)) add("params.V", "V must be positive");
  if (p.a_max < 1) add("params.a_max", "A^max must be a positive integer");
  if (p.gamma <= w_max) add("params.gamma", "Γ must exceed w^max");

  auto check_dims = [&](const auto& grid, const std::string& f) {
    if (grid.rows() != J || grid.cols() != K) {
      add(f, "must be a " + std::to_string(J) + "x" + std::to_string(K) + " table");
      return false;
    }
    return true;
  };
  if (check_dims(cfg.alpha, "penalties.alpha"))
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k)
        if (!(cfg.alpha(j, k) >= 0))
          add("penalties.alpha[" + std::to_string(j + 1) + "][" + std::to_string(k + 1) + "]",
              "α must be nonnegative");
  if (check_dims(cfg.epsilon, "penalties.epsilon"))
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k) {
        const double e = cfg.epsilon(j, k);
        const std::string f =
            "penalties.epsilon[" + std::to_string(j + 1) + "][" + std::to_string(k + 1) + "]";
        if (!(e > 0)) add(f, "ε must be positive");
        else if (e > p.a_max) add(f, "ε exceeds A^max");
      }
  if (check_dims(p.g_max_drop, "params.g_max_drop"))
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k)
        if (p.g_max_drop(j, k) < 0)
          add("params.g_max_drop[" + std::to_string(j + 1) + "][" + std::to_string(k + 1) + "]",
              "drop cap must be nonnegative");
  return out;
}

/// Checks one-cloud-per-job and per-cloud capacity for `placement` of the
/// running jobs in `jobs`. Returns the violated rules.
inline std::vector<Violation> placement_violations(const FederationConfig& cfg,
                                                   const std::vector<Job>& jobs,
                                                   const Placement& placement) {
  std::vector<Violation> out;
  std::vector<long> used(cfg.num_clouds(), 0);
  for (const auto& job : jobs) {
    const std::string f = "job " + std::to_string(job.uid);
    int hits = 0;
    for (const auto& e : placement) {
      if (e.job != job.uid) continue;
      ++hits;
      if (e.cloud >= cfg.num_clouds()) {
        out.push_back({f, "placed in unknown cloud"});
        continue;
      }
      if (job.type >= cfg.num_types()) {
        out.push_back({f, "unknown job type"});
        continue;
      }
      used[e.cloud] += cfg.job_types[job.type].vm_count;
    }
    if (hits != 1) out.push_back({f, "must be placed in exactly one cloud"});
  }
  for (const auto& e : placement) {
    bool known = std::any_of(jobs.begin(), jobs.end(), [&](const Job& j) { return j.uid == e.job; });
    if (!known) out.push_back({"job " + std::to_string(e.job), "placement for unknown job"});
  }
  for (std::size_t i = 0; i < cfg.num_clouds(); ++i)
    if (used[i] > capacity(cfg.clouds[i]))
      out.push_back({"clouds[" + std::to_string(i + 1) + "]", "placement exceeds capacity"});
  return out;
}

}  // namespace fedtrade

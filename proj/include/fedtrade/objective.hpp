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
/// Cost and objective evaluators for one slot: per-job costs, the
/// quadratic queue potential, the drop and placement objectives, and the
/// drift and approximation-gap constants.

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedtrade/domain.hpp"
#include "fedtrade/queueing.hpp"

namespace fedtrade {

/// A job still running from the previous slot.
struct LeftoverJob {
  JobUid uid = 0;
  CloudIndex owner = 0;
  TypeIndex type = 0;
  CloudIndex host = 0;
  int remaining_slots = 1;

  bool operator==(const LeftoverJob&) const = default;
};

/// Everything the one-slot decision depends on.
struct SlotContext {
  std::shared_ptr<const FederationConfig> config;
  Slot slot = 0;
  std::vector<double> beta;  ///< VM cost per cloud in this slot
  QueueState queues;
  std::vector<LeftoverJob> leftovers;

  const FederationConfig& cfg() const { return *config; }
  int frame_remaining() const {
    const int gamma = config->params.gamma;
    return gamma - static_cast<int>(slot % gamma);
  }
  /// (w^2 q + Z) of queue (j, k).
  double queue_weight(CloudIndex j, TypeIndex k) const {
    const double w = config->job_types[k].duration;
    return w * w * static_cast<double>(queues.q(j, k)) + queues.Z(j, k);
  }
  /// Per-VM value of serving one job from queue (j, k).
  double queue_value(CloudIndex j, TypeIndex k) const {
    return queue_weight(j, k) / (config->params.V * config->job_types[k].vm_count);
  }
  double migration_price(CloudIndex from, TypeIndex k) const {
    return config->clouds[from].egress_price * config->job_types[k].migration_data;
  }
  /// VMs already held by leftovers in each cloud.
  std::vector<long> leftover_load() const {
    std::vector<long> load(config->num_clouds(), 0);
    for (const auto& l : leftovers) load[l.host] += config->job_types[l.type].vm_count;
    return load;
  }
};

inline void check_context(const SlotContext& ctx) {
  if (!ctx.config) throw std::invalid_argument("slot context without config");
  const auto& cfg = ctx.cfg();
  if (ctx.beta.size() != cfg.num_clouds())
    throw std::invalid_argument("slot context: one VM cost per cloud required");
  for (double b : ctx.beta)
    if (!(b >= 0)) throw std::invalid_argument("slot context: VM cost must be nonnegative");
  if (ctx.queues.q.rows() != cfg.num_clouds() || ctx.queues.q.cols() != cfg.num_types() ||
      ctx.queues.Z.rows() != cfg.num_clouds() || ctx.queues.Z.cols() != cfg.num_types())
    throw std::invalid_argument("slot context: queue tables do not match config");
  for (const auto& l : ctx.leftovers)
    if (l.host >= cfg.num_clouds() || l.owner >= cfg.num_clouds() || l.type >= cfg.num_types())
      throw std::invalid_argument("slot context: leftover job " + std::to_string(l.uid) +
                                  " refers to unknown cloud or type");
}

/// New jobs of one queue sent to one cloud.
struct NewAssignment {
  CloudIndex owner = 0;
  TypeIndex type = 0;
  CloudIndex dest = 0;
  long count = 0;

  bool operator==(const NewAssignment&) const = default;
};

/// One slot's co-located decision.
struct Allocation {
  std::vector<CloudIndex> leftover_dest;  ///< parallel to SlotContext::leftovers
  std::vector<NewAssignment> new_jobs;
  Grid<long> drops;

  static Allocation stay_all(const SlotContext& ctx) {
    Allocation a;
    for (const auto& l : ctx.leftovers) a.leftover_dest.push_back(l.host);
    a.drops = Grid<long>(ctx.cfg().num_clouds(), ctx.cfg().num_types(), 0);
    return a;
  }
  long scheduled(CloudIndex owner, TypeIndex type) const {
    long n = 0;
    for (const auto& a : new_jobs)
      if (a.owner == owner && a.type == type) n += a.count;
    return n;
  }
  bool operator==(const Allocation&) const = default;
};

/// Lists capacity, backlog and frame violations of `alloc` under `ctx`.
inline std::vector<std::string> allocation_violations(const Allocation& alloc,
                                                      const SlotContext& ctx) {
  std::vector<std::string> out;
  const auto& cfg = ctx.cfg();
  if (alloc.leftover_dest.size() != ctx.leftovers.size()) {
    out.push_back("one destination per leftover job required");
    return out;
  }
  std::vector<long> used(cfg.num_clouds(), 0);
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
    const CloudIndex d = alloc.leftover_dest[n];
    if (d >= cfg.num_clouds()) {
      out.push_back("leftover " + std::to_string(ctx.leftovers[n].uid) + " sent to unknown cloud");
      continue;
    }
    used[d] += cfg.job_types[ctx.leftovers[n].type].vm_count;
  }
  Grid<long> taken(cfg.num_clouds(), cfg.num_types(), 0);
  for (const auto& a : alloc.new_jobs) {
    if (a.owner >= cfg.num_clouds() || a.type >= cfg.num_types() || a.dest >= cfg.num_clouds()) {
      out.push_back("new assignment refers to unknown cloud or type");
      continue;
    }
    if (a.count < 0) out.push_back("negative new-job count");
    if (a.count > 0 && cfg.job_types[a.type].duration > ctx.frame_remaining())
      out.push_back("new job of type " + std::to_string(a.type + 1) + " would cross the frame");
    taken(a.owner, a.type) += a.count;
    used[a.dest] += a.count * cfg.job_types[a.type].vm_count;
  }
  for (std::size_t j = 0; j < cfg.num_clouds(); ++j)
    for (std::size_t k = 0; k < cfg.num_types(); ++k)
      if (taken(j, k) > ctx.queues.q(j, k))
        out.push_back("queue (" + std::to_string(j + 1) + "," + std::to_string(k + 1) +
                      ") scheduled beyond its backlog");
  for (std::size_t i = 0; i < cfg.num_clouds(); ++i)
    if (used[i] > capacity(cfg.clouds[i]))
      out.push_back("cloud " + std::to_string(i + 1) + " over capacity");
  return out;
}

enum class JobKind { kNew, kLeftover, kDropped };

struct JobRef {
  JobKind kind = JobKind::kNew;
  CloudIndex owner = 0;
  TypeIndex type = 0;
  CloudIndex host = 0;  ///< leftovers only
};

/// Cost of running `job` with all its VMs in `dest` (ignored for drops).
inline double job_cost_colocated(const JobRef& job, CloudIndex dest, const SlotContext& ctx) {
  const auto& cfg = ctx.cfg();
  if (job.type >= cfg.num_types()) throw std::domain_error("job_cost: unknown job type");
  if (job.kind == JobKind::kDropped) return cfg.alpha.at(job.owner, job.type);
  if (dest >= cfg.num_clouds()) throw std::domain_error("job_cost: unknown destination");
  const double g = cfg.job_types[job.type].vm_count;
  double cost = ctx.beta[dest] * g;
  if (job.kind == JobKind::kLeftover && dest != job.host)
    cost += ctx.migration_price(job.host, job.type) * g;
  return cost;
}

/// Cost of a job whose VMs may be spread over clouds. `vm_cloud[s]` hosts
/// VM s now; `prev_cloud`, when given, is where VM s ran last slot.
inline double job_cost_general(TypeIndex type, const std::vector<CloudIndex>& vm_cloud,
                               const std::optional<std::vector<CloudIndex>>& prev_cloud,
                               const TrafficMatrix& traffic, const SlotContext& ctx) {
  const auto& cfg = ctx.cfg();
  if (type >= cfg.num_types()) throw std::domain_error("job_cost_general: unknown job type");
  const std::size_t g = static_cast<std::size_t>(cfg.job_types[type].vm_count);
  if (vm_cloud.size() != g || traffic.dim != g || traffic.volumes.size() != g * g ||
      (prev_cloud && prev_cloud->size() != g))
    throw std::domain_error("job_cost_general: dimension mismatch");
  double cost = 0;
  for (std::size_t s = 0; s < g; ++s) {
    if (vm_cloud[s] >= cfg.num_clouds()) throw std::domain_error("job_cost_general: unknown cloud");
    cost += ctx.beta[vm_cloud[s]];
  }
  for (std::size_t r = 0; r < g; ++r)
    for (std::size_t s = 0; s < g; ++s)
      if (r != s && vm_cloud[r] != vm_cloud[s])
        cost += cfg.clouds[vm_cloud[r]].egress_price * traffic(r, s);
  if (prev_cloud)
    for (std::size_t s = 0; s < g; ++s)
      if ((*prev_cloud)[s] != vm_cloud[s])
        cost += ctx.migration_price((*prev_cloud)[s], type);
  return cost;
}

inline double lyapunov(const QueueState& state, const std::vector<JobType>& types) {
  double sum = 0;
  for (std::size_t j = 0; j < state.q.rows(); ++j)
    for (std::size_t k = 0; k < state.q.cols(); ++k) {
      const double w = types.at(k).duration;
      const double q = static_cast<double>(state.q(j, k));
      sum += w * w * q * q + state.Z(j, k) * state.Z(j, k);
    }
  return 0.5 * sum;
}

inline double phi1(const Grid<long>& drops, const SlotContext& ctx) {
  const auto& cfg = ctx.cfg();
  double sum = 0;
  for (std::size_t j = 0; j < drops.rows(); ++j)
    for (std::size_t k = 0; k < drops.cols(); ++k)
      if (drops(j, k) != 0)
        sum += (cfg.params.V * cfg.alpha(j, k) - ctx.queue_weight(j, k)) *
               static_cast<double>(drops(j, k));
  return sum;
}

/// Linear placement objective of a co-located allocation.
inline double phi2_tilde(const Allocation& alloc, const SlotContext& ctx) {
  if (auto v = allocation_violations(alloc, ctx); !v.empty())
    throw std::domain_error("phi2_tilde: infeasible allocation: " + v.front());
  const auto& cfg = ctx.cfg();
  const double V = cfg.params.V;
  double sum = 0;
  for (const auto& a : alloc.new_jobs) {
    const double g = cfg.job_types[a.type].vm_count;
    sum += static_cast<double>(a.count) * (V * g * ctx.beta[a.dest] - ctx.queue_weight(a.owner, a.type));
  }
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
    const auto& l = ctx.leftovers[n];
    const CloudIndex d = alloc.leftover_dest[n];
    const double g = cfg.job_types[l.type].vm_count;
    double per_vm = ctx.beta[d];
    if (d != l.host) per_vm += ctx.migration_price(l.host, l.type);
    sum += V * g * per_vm;
  }
  return sum;
}

/// Per-cloud drift constant.
inline double constant_B(CloudIndex j, const FederationConfig& cfg) {
  const double a = cfg.params.a_max;
  double sum = 0;
  for (std::size_t k = 0; k < cfg.num_types(); ++k) {
    const double w = cfg.job_types[k].duration;
    const double eps = cfg.epsilon.at(j, k);
    const double caps = static_cast<double>(service_cap(cfg, k) + cfg.params.g_max_drop.at(j, k));
    sum += w * w * a * a + eps * eps + (w * w + 1) * caps * caps;
  }
  return 0.5 * sum;
}

struct PriceRange {
  double min = 0;
  double max = 0;
};

inline PriceRange price_range(const FederationConfig& cfg) {
  PriceRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& c : cfg.clouds)
    for (double b : c.price_series) {
      r.min = std::min(r.min, b);
      r.max = std::max(r.max, b);
      any = true;
    }
  if (!any) throw std::domain_error("constant_C: no VM prices configured");
  return r;
}

/// Gap constant for a known VM price range.
inline double constant_C(const FederationConfig& cfg, double V, PriceRange beta) {
  if (cfg.num_clouds() == 0 || cfg.num_types() == 0)
    throw std::domain_error("constant_C: empty config");
  double alpha_max = 0;
  for (double a : cfg.alpha.values()) alpha_max = std::max(alpha_max, a);
  double mig_min = std::numeric_limits<double>::infinity(), mig_max = 0;
  for (const auto& c : cfg.clouds)
    for (const auto& t : cfg.job_types) {
      mig_min = std::min(mig_min, c.egress_price * t.migration_data);
      mig_max = std::max(mig_max, c.egress_price * t.migration_data);
    }
  const double drop_side = alpha_max / cfg.g_min() - beta.min;
  const double move_side = beta.max + mig_max - beta.min - mig_min;
  return V * static_cast<double>(cfg.num_clouds()) * cfg.g_max() * std::max(drop_side, move_side);
}

/// Gap constant over the configured price series.
inline double constant_C(const FederationConfig& cfg, double V) {
  return constant_C(cfg, V, price_range(cfg));
}

}  // namespace fedtrade

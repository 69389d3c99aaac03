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
/// Greedy one-slot scheduler: move leftover jobs toward cheaper clouds,
/// fill every cloud cheaper than the most urgent queue's per-VM value with
/// jobs from that queue, then apply the drop rule.

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedtrade/objective.hpp"
#include "fedtrade/queueing.hpp"

namespace fedtrade {

class InfeasibleState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CloudSplit {
  std::vector<CloudIndex> below;     ///< VM cost strictly under the target value
  std::vector<CloudIndex> at_least;  ///< the rest
};

inline CloudSplit classify_clouds(const SlotContext& ctx, double target_value) {
  CloudSplit s;
  for (CloudIndex i = 0; i < ctx.beta.size(); ++i)
    (ctx.beta[i] < target_value ? s.below : s.at_least).push_back(i);
  return s;
}

struct QueueRef {
  CloudIndex owner = 0;
  TypeIndex type = 0;
  bool operator==(const QueueRef&) const = default;
};

/// Nonempty queue with the largest per-VM value among types that finish
/// inside the current frame. Ties go to the smallest (owner, type).
inline std::optional<QueueRef> select_target_queue(const SlotContext& ctx, int frame_remaining) {
  const auto& cfg = ctx.cfg();
  std::optional<QueueRef> best;
  for (CloudIndex j = 0; j < cfg.num_clouds(); ++j)
    for (TypeIndex k = 0; k < cfg.num_types(); ++k) {
      if (ctx.queues.q(j, k) <= 0 || cfg.job_types[k].duration > frame_remaining) continue;
      if (!best) {
        best = QueueRef{j, k};
        continue;
      }
      // Compare weight/g across queues without dividing.
      const double lhs = ctx.queue_weight(j, k) * cfg.job_types[best->type].vm_count;
      const double rhs = ctx.queue_weight(best->owner, best->type) * cfg.job_types[k].vm_count;
      if (lhs > rhs) best = QueueRef{j, k};
    }
  return best;
}

/// Order in which clouds are offered capacity: cheapest first.
inline std::vector<CloudIndex> clouds_by_cost(const SlotContext& ctx) {
  std::vector<CloudIndex> order(ctx.beta.size());
  std::iota(order.begin(), order.end(), CloudIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](CloudIndex a, CloudIndex b) { return ctx.beta[a] < ctx.beta[b]; });
  return order;
}

/// Value of keeping leftover `l` where it is rather than paying to move it.
inline double leftover_value(const SlotContext& ctx, const LeftoverJob& l) {
  return ctx.beta[l.host] - ctx.migration_price(l.host, l.type);
}

/// Greedy migration pass. Returns an allocation with leftover destinations
/// set and no new jobs.
inline Allocation migrate_leftovers(const SlotContext& ctx) {
  check_context(ctx);
  const auto& cfg = ctx.cfg();
  const std::size_t J = cfg.num_clouds();
  std::vector<long> load = ctx.leftover_load();
  long total = 0, cap_total = 0;
  for (std::size_t i = 0; i < J; ++i) {
    total += load[i];
    cap_total += capacity(cfg.clouds[i]);
    if (load[i] > capacity(cfg.clouds[i]))
      throw InfeasibleState("leftover jobs exceed the capacity of cloud " + std::to_string(i + 1));
  }
  if (total > cap_total) throw InfeasibleState("leftover jobs exceed federation capacity");

  Allocation alloc = Allocation::stay_all(ctx);
  std::vector<std::size_t> order(ctx.leftovers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return leftover_value(ctx, ctx.leftovers[a]) > leftover_value(ctx, ctx.leftovers[b]);
  });
  const std::vector<CloudIndex> dc = clouds_by_cost(ctx);

  std::size_t l = 0, i = 0;
  while (l < order.size() && i < dc.size()) {
    const LeftoverJob& job = ctx.leftovers[order[l]];
    const CloudIndex dest = dc[i];
    if (!(leftover_value(ctx, job) > ctx.beta[dest])) break;
    const long g = cfg.job_types[job.type].vm_count;
    if (capacity(cfg.clouds[dest]) - load[dest] >= g) {
      load[dest] += g;
      load[job.host] -= g;
      alloc.leftover_dest[order[l]] = dest;
      ++l;
    } else {
      ++i;
    }
  }
  return alloc;
}

/// Fills cheap clouds from the target queue and sets drops.
inline Allocation schedule_new(const SlotContext& ctx, Allocation alloc) {
  const auto& cfg = ctx.cfg();
  const std::size_t J = cfg.num_clouds();
  std::vector<long> free(J);
  for (std::size_t i = 0; i < J; ++i) free[i] = capacity(cfg.clouds[i]);
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n)
    free[alloc.leftover_dest[n]] -= cfg.job_types[ctx.leftovers[n].type].vm_count;

  if (auto target = select_target_queue(ctx, ctx.frame_remaining())) {
    const double value = ctx.queue_value(target->owner, target->type);
    const long g = cfg.job_types[target->type].vm_count;
    long backlog = ctx.queues.q(target->owner, target->type);
    for (CloudIndex i : clouds_by_cost(ctx)) {
      if (backlog == 0) break;
      if (!(ctx.beta[i] < value)) continue;
      const long n = std::min(backlog, free[i] / g);
      if (n <= 0) continue;
      alloc.new_jobs.push_back({target->owner, target->type, i, n});
      free[i] -= n * g;
      backlog -= n;
    }
  }

  alloc.drops = Grid<long>(J, cfg.num_types(), 0);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < cfg.num_types(); ++k)
      alloc.drops(j, k) = drop_decision(ctx.queues.q(j, k), ctx.queues.Z(j, k),
                                        cfg.job_types[k].duration, cfg.params.V, cfg.alpha(j, k),
                                        cfg.params.g_max_drop(j, k));
  return alloc;
}

inline Allocation run_slot_cooperative(const SlotContext& ctx) {
  return schedule_new(ctx, migrate_leftovers(ctx));
}

}  // namespace fedtrade

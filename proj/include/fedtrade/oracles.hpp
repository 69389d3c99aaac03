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

// Exhaustive oracles for tiny instances. Exponential; never on a
// production path.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fedtrade/bids.hpp"
#include "fedtrade/lp.hpp"
#include "fedtrade/objective.hpp"

namespace fedtrade {

/// Smallest placement objective when every VM may sit in any cloud and VMs
/// of one job exchange `traffic[type]`. Queued jobs are optional; each
/// scheduled one earns its queue weight.
inline double brute_force_split_phi2(const SlotContext& ctx, const std::vector<TrafficMatrix>& traffic,
                                     std::size_t max_jobs = 4) {
  check_context(ctx);
  const auto& cfg = ctx.cfg();
  if (traffic.size() != cfg.num_types())
    throw std::invalid_argument("brute_force_split_phi2: one traffic matrix per type required");
  const std::size_t J = cfg.num_clouds();
  const double V = cfg.params.V;

  struct Item {
    TypeIndex type;
    CloudIndex owner;
    std::optional<CloudIndex> host;  ///< set for leftovers
  };
  std::vector<Item> items;
  for (const auto& l : ctx.leftovers) items.push_back({l.type, l.owner, l.host});
  for (CloudIndex j = 0; j < J; ++j)
    for (TypeIndex k = 0; k < cfg.num_types(); ++k) {
      if (cfg.job_types[k].duration > ctx.frame_remaining()) continue;
      for (long n = 0; n < ctx.queues.q(j, k); ++n) items.push_back({k, j, std::nullopt});
    }
  if (items.size() > max_jobs) throw std::length_error("brute_force_split_phi2: too many jobs");

  std::vector<long> used(J, 0);
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](auto&& self, std::size_t n, double acc) -> void {
    if (n == items.size()) {
      best = std::min(best, acc);
      return;
    }
    const Item& it = items[n];
    const std::size_t g = static_cast<std::size_t>(cfg.job_types[it.type].vm_count);
    if (!it.host) self(self, n + 1, acc);  // leave the queued job waiting
    std::vector<CloudIndex> where(g, 0);
    std::optional<std::vector<CloudIndex>> prev;
    if (it.host) prev.emplace(g, *it.host);
    // Odometer over J^g VM placements.
    while (true) {
      bool fits = true;
      for (std::size_t s = 0; s < g; ++s) ++used[where[s]];
      for (CloudIndex i = 0; i < J; ++i) fits = fits && used[i] <= capacity(cfg.clouds[i]);
      if (fits) {
        double term = V * job_cost_general(it.type, where, prev, traffic[it.type], ctx);
        if (!it.host) term -= ctx.queue_weight(it.owner, it.type);
        self(self, n + 1, acc + term);
      }
      for (std::size_t s = 0; s < g; ++s) --used[where[s]];
      std::size_t s = 0;
      while (s < g && ++where[s] == J) where[s++] = 0;
      if (s == g) break;
    }
  };
  visit(visit, 0, 0.0);
  return best;
}

/// Best co-located allocation by enumeration of every integral decision.
inline double brute_force_phi2_tilde(const SlotContext& ctx) {
  check_context(ctx);
  const auto& cfg = ctx.cfg();
  const std::size_t J = cfg.num_clouds();
  struct Queue {
    CloudIndex owner;
    TypeIndex type;
  };
  std::vector<Queue> queues;
  for (CloudIndex j = 0; j < J; ++j)
    for (TypeIndex k = 0; k < cfg.num_types(); ++k)
      if (ctx.queues.q(j, k) > 0 && cfg.job_types[k].duration <= ctx.frame_remaining())
        queues.push_back({j, k});
  Allocation a = Allocation::stay_all(ctx);
  double best = std::numeric_limits<double>::infinity();
  auto place_new = [&](auto&& self, std::size_t pos) -> void {
    if (pos == queues.size() * J) {
      if (allocation_violations(a, ctx).empty()) best = std::min(best, phi2_tilde(a, ctx));
      return;
    }
    const Queue& q = queues[pos / J];
    const CloudIndex dest = pos % J;
    for (long n = 0; n <= ctx.queues.q(q.owner, q.type); ++n) {
      if (n > 0) a.new_jobs.push_back({q.owner, q.type, dest, n});
      self(self, pos + 1);
      if (n > 0) a.new_jobs.pop_back();
    }
  };
  auto place_left = [&](auto&& self, std::size_t n) -> void {
    if (n == ctx.leftovers.size()) {
      place_new(place_new, 0);
      return;
    }
    for (CloudIndex i = 0; i < J; ++i) {
      a.leftover_dest[n] = i;
      self(self, n + 1);
    }
  };
  place_left(place_left, 0);
  return best;
}

/// Integral WDP optimum by exhaustive search.
inline double brute_force_wdp(const BidSet& bids) {
  const auto w = build_wdp(bids);
  if (w.model.num_vars() == 0) return 0.0;
  const auto sol = lp::brute_force_ip(w.model);
  if (!sol.feasible) throw std::logic_error("brute_force_wdp: zero allocation must be feasible");
  return sol.objective;
}

}  // namespace fedtrade

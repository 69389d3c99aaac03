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

// Fractional version of the co-located placement objective. Leftovers may
// be split across clouds, queued jobs are aggregated per (owner, type) and
// only types that fit in the rest of the frame may be placed.

#include <stdexcept>
#include <vector>

#include "fedtrade/lp.hpp"
#include "fedtrade/objective.hpp"

namespace fedtrade {

struct PlacementRelaxation {
  lp::Model model;  ///< maximizes the negated objective
  struct Leftover {
    std::size_t job;
    CloudIndex cloud;
  };
  struct Queued {
    CloudIndex owner;
    TypeIndex type;
    CloudIndex cloud;
  };
  std::vector<Leftover> leftover_vars;
  std::vector<Queued> queued_vars;
};

inline PlacementRelaxation build_placement_relaxation(const SlotContext& ctx) {
  check_context(ctx);
  const auto& cfg = ctx.cfg();
  const double V = cfg.params.V;
  const std::size_t J = cfg.num_clouds();
  PlacementRelaxation r;
  std::vector<std::vector<std::pair<std::size_t, double>>> cap(J);

  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
    const auto& l = ctx.leftovers[n];
    const double g = cfg.job_types[l.type].vm_count;
    std::vector<std::pair<std::size_t, double>> one;
    for (CloudIndex i = 0; i < J; ++i) {
      double per_vm = ctx.beta[i];
      if (i != l.host) per_vm += ctx.migration_price(l.host, l.type);
      const auto v = r.model.add_variable(-V * g * per_vm, 1.0, false,
                                          "I_" + std::to_string(n + 1) + "_" + std::to_string(i + 1));
      r.leftover_vars.push_back({n, i});
      one.push_back({v, 1.0});
      cap[i].push_back({v, g});
    }
    r.model.add_row(std::move(one), lp::Relation::kEq, 1.0, "place_" + std::to_string(n + 1));
  }

  const int frame_left = ctx.frame_remaining();
  for (CloudIndex j = 0; j < J; ++j)
    for (TypeIndex k = 0; k < cfg.num_types(); ++k) {
      const long q = ctx.queues.q(j, k);
      if (q <= 0 || cfg.job_types[k].duration > frame_left) continue;
      const double g = cfg.job_types[k].vm_count;
      const double weight = ctx.queue_weight(j, k);
      std::vector<std::pair<std::size_t, double>> backlog;
      for (CloudIndex i = 0; i < J; ++i) {
        const auto v = r.model.add_variable(
            weight - V * g * ctx.beta[i], static_cast<double>(q), false,
            "u_" + std::to_string(j + 1) + "_" + std::to_string(k + 1) + "_" + std::to_string(i + 1));
        r.queued_vars.push_back({j, k, i});
        backlog.push_back({v, 1.0});
        cap[i].push_back({v, g});
      }
      r.model.add_row(std::move(backlog), lp::Relation::kLe, static_cast<double>(q),
                      "backlog_" + std::to_string(j + 1) + "_" + std::to_string(k + 1));
    }
  for (CloudIndex i = 0; i < J; ++i)
    if (!cap[i].empty())
      r.model.add_row(std::move(cap[i]), lp::Relation::kLe,
                      static_cast<double>(capacity(cfg.clouds[i])), "cap_" + std::to_string(i + 1));
  return r;
}

/// Optimum of the relaxed placement objective (a lower bound on every
/// integral co-located allocation).
inline double relaxed_phi2_tilde(const SlotContext& ctx) {
  const auto r = build_placement_relaxation(ctx);
  const auto sol = lp::solve(r.model);
  if (!sol.optimal())
    throw std::runtime_error(std::string("placement relaxation is ") + lp::to_string(sol.status));
  return -sol.objective;
}

}  // namespace fedtrade

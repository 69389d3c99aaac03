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
/// Per-slot evolution of job queues and their delay-enforcing virtual
/// queues, the threshold drop rule, and the closed-form delay and
/// no-drop predicates derived from them.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedtrade/domain.hpp"

namespace fedtrade {

inline long update_job_queue(long q, long served, long dropped, long arrivals) {
  if (q < 0 || served < 0 || dropped < 0 || arrivals < 0)
    throw std::domain_error("update_job_queue: negative input");
  return std::max(q - served - dropped, 0L) + arrivals;
}

inline double update_virtual_queue(double Z, long q, double epsilon, long served, long dropped,
                                   long served_cap) {
  if (Z < 0 || q < 0 || served < 0 || dropped < 0 || served_cap < 0)
    throw std::domain_error("update_virtual_queue: negative input");
  if (!(epsilon > 0)) throw std::domain_error("update_virtual_queue: epsilon must be positive");
  double next = Z - static_cast<double>(dropped);
  if (q > 0)
    next += epsilon - static_cast<double>(served);
  else
    next -= static_cast<double>(served_cap);
  return std::max(next, 0.0);
}

/// All-or-nothing: drop the cap when the weighted backlog outweighs the
/// scaled penalty.
inline long drop_decision(long q, double Z, int duration, double V, double alpha, long drop_cap) {
  if (q < 0 || Z < 0 || duration < 0 || V < 0 || alpha < 0 || drop_cap < 0)
    throw std::domain_error("drop_decision: negative input");
  const double w = duration;
  return (w * w * static_cast<double>(q) + Z > V * alpha) ? drop_cap : 0;
}

inline long delay_bound(double Z_max, double q_max, double epsilon) {
  if (!(epsilon > 0)) throw std::domain_error("delay_bound: epsilon must be positive");
  return static_cast<long>(std::ceil((Z_max + q_max) / epsilon));
}

struct NoDropCheck {
  bool holds = false;
  double lhs = 0;
  double rhs = 0;
};

inline NoDropCheck no_drop_condition(const FederationConfig& cfg) {
  const int w_max = cfg.w_max();
  const int gamma = cfg.params.gamma;
  if (gamma <= w_max) throw std::domain_error("no_drop_condition: frame must exceed w^max");
  const double J = static_cast<double>(cfg.num_clouds());
  const double g_max = cfg.g_max();
  const double g_min = cfg.g_min();
  const double w = w_max;
  double eps_max = 0;
  for (double e : cfg.epsilon.values()) eps_max = std::max(eps_max, e);
  NoDropCheck out;
  out.lhs = J * g_max * w * (w * w * cfg.params.a_max + eps_max) / g_min;
  out.rhs = (static_cast<double>(gamma - w_max) / gamma) * 2.0 *
            static_cast<double>(cfg.total_capacity()) / (g_max * g_max);
  out.holds = out.lhs < out.rhs;
  return out;
}

/// Most type-k jobs the whole federation can start in one slot.
inline long service_cap(const FederationConfig& cfg, TypeIndex k) {
  const long g = cfg.job_types.at(k).vm_count;
  long cap = 0;
  for (const auto& c : cfg.clouds) cap += capacity(c) / g;
  return cap;
}

inline Grid<long> service_caps(const FederationConfig& cfg) {
  Grid<long> caps(cfg.num_clouds(), cfg.num_types());
  for (std::size_t k = 0; k < cfg.num_types(); ++k) {
    const long cap = service_cap(cfg, k);
    for (std::size_t j = 0; j < cfg.num_clouds(); ++j) caps(j, k) = cap;
  }
  return caps;
}

/// Elementwise queue update. Service and drops are clamped to what the queue
/// holds before either update sees them.
inline QueueState step_queues(const QueueState& state, const Grid<long>& served,
                              const Grid<long>& dropped, const Grid<long>& arrivals,
                              const FederationConfig& cfg) {
  const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
  auto check = [&](const auto& g, const char* what) {
    if (g.rows() != J || g.cols() != K)
      throw std::invalid_argument(std::string("step_queues: bad shape for ") + what);
  };
  check(state.q, "q");
  check(state.Z, "Z");
  check(served, "served");
  check(dropped, "dropped");
  check(arrivals, "arrivals");
  const Grid<long> caps = service_caps(cfg);
  QueueState next = QueueState::zeros(J, K);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) {
      const long q = state.q(j, k);
      if (served(j, k) < 0 || dropped(j, k) < 0 || arrivals(j, k) < 0 || q < 0 ||
          state.Z(j, k) < 0)
        throw std::domain_error("step_queues: negative input");
      const long u = std::min(q, served(j, k));
      const long g = std::min(dropped(j, k), q - u);
      next.q(j, k) = update_job_queue(q, u, g, arrivals(j, k));
      next.Z(j, k) = update_virtual_queue(state.Z(j, k), q, cfg.epsilon(j, k), u, g, caps(j, k));
    }
  return next;
}

}  // namespace fedtrade

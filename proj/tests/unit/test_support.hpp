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

// Small config builders shared by the unit tests.

#include <memory>
#include <vector>

#include "fedtrade/domain.hpp"
#include "fedtrade/objective.hpp"

namespace fedtrade::testing {

inline FederationConfig make_config(std::vector<CloudConfig> clouds, std::vector<JobType> types,
                                    double alpha = 5.0, double epsilon = 1.0, double V = 1.0,
                                    long drop_cap = 1) {
  FederationConfig cfg;
  cfg.clouds = std::move(clouds);
  cfg.job_types = std::move(types);
  const std::size_t J = cfg.clouds.size(), K = cfg.job_types.size();
  cfg.alpha = Grid<double>(J, K, alpha);
  cfg.epsilon = Grid<double>(J, K, epsilon);
  cfg.params.V = V;
  cfg.params.gamma = cfg.w_max() + 1;
  cfg.params.a_max = std::max(1, static_cast<int>(epsilon + 0.999));
  cfg.params.g_max_drop = Grid<long>(J, K, drop_cap);
  return cfg;
}

inline CloudConfig cloud(long servers, long vms, double egress = 0.0) {
  CloudConfig c;
  c.servers = servers;
  c.vms_per_server = vms;
  c.egress_price = egress;
  return c;
}

inline JobType job_type(int g, int w, double phi = 0.0) { return JobType{g, w, phi}; }

inline SlotContext make_context(FederationConfig cfg, std::vector<double> beta, Slot slot = 0) {
  SlotContext ctx;
  const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
  ctx.config = std::make_shared<const FederationConfig>(std::move(cfg));
  ctx.slot = slot;
  ctx.beta = std::move(beta);
  ctx.queues = QueueState::zeros(J, K);
  return ctx;
}

}  // namespace fedtrade::testing

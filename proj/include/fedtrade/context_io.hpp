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

// JSON form of a single slot's state. Cloud and type ids are 1-based, as
// in the trace files.

#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "fedtrade/config_io.hpp"
#include "fedtrade/objective.hpp"

namespace fedtrade {

inline SlotContext context_from_json(const nlohmann::json& root) {
  SlotContext ctx;
  try {
    ctx.config = std::make_shared<const FederationConfig>(
        config_from_json(detail::require(root, "config", "slot context")));
    const auto& cfg = ctx.cfg();
    if (auto v = validate_config(cfg); !v.empty())
      throw ConfigError("slot context config " + v.front().field + ": " + v.front().rule);
    ctx.slot = root.value("slot", Slot{0});
    if (ctx.slot < 0) throw ConfigError("slot context: slot must be nonnegative");
    ctx.beta = detail::require(root, "beta", "slot context").get<std::vector<double>>();
    const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
    ctx.queues = QueueState::zeros(J, K);
    if (root.contains("queues")) {
      const auto& q = root.at("queues");
      if (q.contains("q")) ctx.queues.q = detail::grid_from_json<long>(q.at("q"), "queues.q");
      if (q.contains("Z")) ctx.queues.Z = detail::grid_from_json<double>(q.at("Z"), "queues.Z");
    }
    for (const auto& l : root.value("leftovers", nlohmann::json::array())) {
      LeftoverJob job;
      job.uid = l.at("uid").get<JobUid>();
      job.owner = l.at("owner").get<CloudIndex>() - 1;
      job.type = l.at("type").get<TypeIndex>() - 1;
      job.host = l.at("host").get<CloudIndex>() - 1;
      job.remaining_slots = l.value("remaining_slots", 1);
      ctx.leftovers.push_back(job);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("slot context: ") + e.what());
  }
  try {
    check_context(ctx);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return ctx;
}

inline nlohmann::json context_to_json(const SlotContext& ctx) {
  nlohmann::json root;
  root["config"] = config_to_json(ctx.cfg());
  root["slot"] = ctx.slot;
  root["beta"] = ctx.beta;
  root["queues"] = {{"q", ctx.queues.q.to_nested()}, {"Z", ctx.queues.Z.to_nested()}};
  root["leftovers"] = nlohmann::json::array();
  for (const auto& l : ctx.leftovers)
    root["leftovers"].push_back({{"uid", l.uid},
                                 {"owner", l.owner + 1},
                                 {"type", l.type + 1},
                                 {"host", l.host + 1},
                                 {"remaining_slots", l.remaining_slots}});
  return root;
}

inline SlotContext load_context(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open slot context " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return context_from_json(root);
}

}  // namespace fedtrade

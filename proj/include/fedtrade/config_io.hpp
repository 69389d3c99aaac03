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

// JSON (de)serialization of FederationConfig. Cloud and job-type ids in the
// file are 1-based and must be listed in order.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fedtrade/domain.hpp"

namespace fedtrade {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
Grid<T> grid_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected a nested array");
  try {
    return Grid<T>::from_nested(j.get<std::vector<std::vector<T>>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(field + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

inline void check_id(const nlohmann::json& entry, std::size_t expected, const std::string& where) {
  if (!entry.contains("id")) return;
  if (entry.at("id").get<long>() != static_cast<long>(expected))
    throw ConfigError(where + ": ids must be 1..n in order, expected " + std::to_string(expected));
}

}  // namespace detail

inline FederationConfig config_from_json(const nlohmann::json& root) {
  FederationConfig cfg;
  try {
    const auto& clouds = detail::require(root, "clouds", "config");
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      const auto& c = clouds[i];
      const std::string where = "clouds[" + std::to_string(i + 1) + "]";
      detail::check_id(c, i + 1, where);
      CloudConfig cc;
      cc.servers = detail::require(c, "servers", where).get<long>();
      cc.vms_per_server = detail::require(c, "vms_per_server", where).get<long>();
      cc.egress_price = detail::require(c, "egress_price", where).get<double>();
      if (c.contains("vm_cost_series"))
        cc.price_series = c.at("vm_cost_series").get<std::vector<double>>();
      cfg.clouds.push_back(std::move(cc));
    }
    const auto& types = detail::require(root, "job_types", "config");
    for (std::size_t k = 0; k < types.size(); ++k) {
      const auto& t = types[k];
      const std::string where = "job_types[" + std::to_string(k + 1) + "]";
      detail::check_id(t, k + 1, where);
      JobType jt;
      jt.vm_count = detail::require(t, "vm_count", where).get<int>();
      jt.duration = detail::require(t, "duration", where).get<int>();
      jt.migration_data = detail::require(t, "migration_data", where).get<double>();
      cfg.job_types.push_back(jt);
    }
    const auto& pen = detail::require(root, "penalties", "config");
    cfg.alpha = detail::grid_from_json<double>(detail::require(pen, "alpha", "penalties"),
                                               "penalties.alpha");
    cfg.epsilon = detail::grid_from_json<double>(detail::require(pen, "epsilon", "penalties"),
                                                 "penalties.epsilon");
    const auto& p = detail::require(root, "params", "config");
    cfg.params.V = detail::require(p, "V", "params").get<double>();
    cfg.params.gamma = detail::require(p, "gamma", "params").get<int>();
    cfg.params.a_max = detail::require(p, "a_max", "params").get<int>();
    cfg.params.g_max_drop =
        detail::grid_from_json<long>(detail::require(p, "g_max_drop", "params"), "params.g_max_drop");
    cfg.params.seed = p.value("seed", std::uint64_t{0});
    cfg.params.w_min = p.value("w_min", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json config_to_json(const FederationConfig& cfg) {
  nlohmann::json root;
  root["clouds"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.clouds.size(); ++i) {
    const auto& c = cfg.clouds[i];
    nlohmann::json e = {{"id", i + 1},
                        {"servers", c.servers},
                        {"vms_per_server", c.vms_per_server},
                        {"egress_price", c.egress_price}};
    if (!c.price_series.empty()) e["vm_cost_series"] = c.price_series;
    root["clouds"].push_back(std::move(e));
  }
  root["job_types"] = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.job_types.size(); ++k) {
    const auto& t = cfg.job_types[k];
    root["job_types"].push_back({{"id", k + 1},
                                 {"vm_count", t.vm_count},
                                 {"duration", t.duration},
                                 {"migration_data", t.migration_data}});
  }
  root["penalties"] = {{"alpha", cfg.alpha.to_nested()}, {"epsilon", cfg.epsilon.to_nested()}};
  root["params"] = {{"V", cfg.params.V},
                    {"gamma", cfg.params.gamma},
                    {"a_max", cfg.params.a_max},
                    {"g_max_drop", cfg.params.g_max_drop.to_nested()},
                    {"seed", cfg.params.seed},
                    {"w_min", cfg.params.w_min}};
  return root;
}

inline FederationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(root);
}

inline void save_config(const FederationConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace fedtrade

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
/// VM price and job arrival traces: CSV reading and writing, and a seeded
/// synthetic generator.
///
/// prices.csv:   slot,cloud,beta             (slot from 0, cloud from 1)
/// arrivals.csv: slot,cloud,job_type,count   (job_type from 1)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedtrade/config_io.hpp"
#include "fedtrade/domain.hpp"
#include "fedtrade/objective.hpp"
#include "fedtrade/random.hpp"

namespace fedtrade {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceSet {
  std::vector<std::vector<double>> prices;  ///< [slot][cloud]
  std::vector<Grid<long>> arrivals;         ///< [slot](cloud, type); may be shorter than prices

  Slot horizon() const { return static_cast<Slot>(prices.size()); }
  Grid<long> arrivals_at(Slot t, std::size_t clouds, std::size_t types) const {
    if (t >= 0 && static_cast<std::size_t>(t) < arrivals.size()) return arrivals[t];
    return Grid<long>(clouds, types, 0);
  }
  PriceRange price_range(Slot horizon) const {
    PriceRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (Slot t = 0; t < horizon && t < this->horizon(); ++t)
      for (double b : prices[t]) {
        r.min = std::min(r.min, b);
        r.max = std::max(r.max, b);
      }
    if (!(r.min <= r.max)) throw TraceError("no VM prices in the simulated horizon");
    return r;
  }
  bool operator==(const TraceSet&) const = default;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_cell(const std::string& s, const std::string& where) {
  std::istringstream ss(s);
  T v{};
  ss >> v;
  if (s.empty() || ss.fail() || !ss.eof()) throw TraceError(where + ": cannot parse '" + s + "'");
  return v;
}

/// Calls row(cells, where) for every data row after checking the header.
template <typename F>
void read_csv(std::istream& in, const std::string& name, const std::vector<std::string>& header, F&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (!saw_header) {
      if (cells != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw TraceError(name + " row " + std::to_string(line_no) + ": expected header " + want);
      }
      saw_header = true;
      continue;
    }
    const std::string where = name + " row " + std::to_string(line_no);
    if (cells.size() != header.size())
      throw TraceError(where + ": expected " + std::to_string(header.size()) + " fields");
    row(cells, where);
  }
}

}  // namespace detail

inline std::vector<std::vector<double>> parse_prices(std::istream& in, std::size_t clouds,
                                                     const std::string& name = "prices") {
  std::vector<std::vector<double>> prices;
  std::vector<std::vector<bool>> seen;
  detail::read_csv(in, name, {"slot", "cloud", "beta"}, [&](const auto& c, const std::string& where) {
    const long slot = detail::parse_cell<long>(c[0], where);
    const long cloud = detail::parse_cell<long>(c[1], where);
    const double beta = detail::parse_cell<double>(c[2], where);
    if (slot < 0) throw TraceError(where + ": slot must be nonnegative");
    if (cloud < 1 || static_cast<std::size_t>(cloud) > clouds)
      throw TraceError(where + ": cloud must lie in 1.." + std::to_string(clouds));
    if (!(beta >= 0) || !std::isfinite(beta)) throw TraceError(where + ": VM cost must be nonnegative");
    if (static_cast<std::size_t>(slot) >= prices.size()) {
      prices.resize(slot + 1, std::vector<double>(clouds, 0.0));
      seen.resize(slot + 1, std::vector<bool>(clouds, false));
    }
    if (seen[slot][cloud - 1]) throw TraceError(where + ": duplicate price for this slot and cloud");
    seen[slot][cloud - 1] = true;
    prices[slot][cloud - 1] = beta;
  });
  for (std::size_t t = 0; t < seen.size(); ++t)
    for (std::size_t i = 0; i < clouds; ++i)
      if (!seen[t][i])
        throw TraceError(name + ": no price for slot " + std::to_string(t) + ", cloud " + std::to_string(i + 1));
  return prices;
}

inline std::vector<Grid<long>> parse_arrivals(std::istream& in, std::size_t clouds, std::size_t types,
                                              long a_max, const std::string& name = "arrivals") {
  std::vector<Grid<long>> arrivals;
  detail::read_csv(in, name, {"slot", "cloud", "job_type", "count"}, [&](const auto& c, const std::string& where) {
    const long slot = detail::parse_cell<long>(c[0], where);
    const long cloud = detail::parse_cell<long>(c[1], where);
    const long type = detail::parse_cell<long>(c[2], where);
    const long count = detail::parse_cell<long>(c[3], where);
    if (slot < 0) throw TraceError(where + ": slot must be nonnegative");
    if (cloud < 1 || static_cast<std::size_t>(cloud) > clouds)
      throw TraceError(where + ": cloud must lie in 1.." + std::to_string(clouds));
    if (type < 1 || static_cast<std::size_t>(type) > types)
      throw TraceError(where + ": job_type must lie in 1.." + std::to_string(types));
    if (count < 0) throw TraceError(where + ": count must be nonnegative");
    if (static_cast<std::size_t>(slot) >= arrivals.size()) arrivals.resize(slot + 1, Grid<long>(clouds, types, 0));
    long& cell = arrivals[slot](cloud - 1, type - 1);
    cell += count;
    if (cell > a_max)
      throw TraceError(where + ": " + std::to_string(cell) + " arrivals exceed the per-slot bound " +
                       std::to_string(a_max));
  });
  return arrivals;
}

inline std::ifstream open_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open " + path);
  return in;
}

/// Reads both traces. An empty arrivals path means no arrivals.
inline TraceSet load_traces(const FederationConfig& cfg, const std::string& prices_path,
                            const std::string& arrivals_path) {
  TraceSet t;
  auto p = open_trace(prices_path);
  t.prices = parse_prices(p, cfg.num_clouds(), prices_path);
  if (!arrivals_path.empty()) {
    auto a = open_trace(arrivals_path);
    t.arrivals = parse_arrivals(a, cfg.num_clouds(), cfg.num_types(), cfg.params.a_max, arrivals_path);
  }
  return t;
}

/// Shortest text that reads back as the same double.
inline std::string format_number(double v) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_prices(std::ostream& out, const TraceSet& t) {
  out << "slot,cloud,beta\n";
  for (std::size_t s = 0; s < t.prices.size(); ++s)
    for (std::size_t i = 0; i < t.prices[s].size(); ++i)
      out << s << ',' << i + 1 << ',' << format_number(t.prices[s][i]) << '\n';
}

/// Zero counts are left out.
inline void write_arrivals(std::ostream& out, const TraceSet& t) {
  out << "slot,cloud,job_type,count\n";
  for (std::size_t s = 0; s < t.arrivals.size(); ++s)
    for (std::size_t i = 0; i < t.arrivals[s].rows(); ++i)
      for (std::size_t k = 0; k < t.arrivals[s].cols(); ++k)
        if (t.arrivals[s](i, k) > 0) out << s << ',' << i + 1 << ',' << k + 1 << ',' << t.arrivals[s](i, k) << '\n';
}

/// Description of a synthetic federation and its workload.
struct TraceSpec {
  struct Cloud {
    long servers = 1;
    long vms_per_server = 1;
    double egress_price = 0;
    double beta_min = 0.1;
    double beta_max = 0.5;
    double beta_step = 0.02;   ///< largest per-slot price move
    double load_scale = 1.0;   ///< multiplies every type's arrival rate

    bool operator==(const Cloud&) const = default;
  };
  struct Type {
    int vm_count = 1;
    int duration = 1;
    double migration_data = 0;
    double rate = 0;  ///< mean arrivals per slot per cloud

    bool operator==(const Type&) const = default;
  };
  std::vector<Cloud> clouds;
  std::vector<Type> job_types;
  Slot horizon = 240;
  double diurnal_amplitude = 0;  ///< relative swing of the arrival rate
  int diurnal_period = 24;
  double V = 1;
  int gamma = 0;  ///< 0 selects 16 w^max
  int a_max = 1;
  double alpha = 1;
  double epsilon = 1;
  long g_max_drop = 1;

  bool operator==(const TraceSpec&) const = default;
};

inline TraceSpec trace_spec_from_json(const nlohmann::json& j) {
  TraceSpec s;
  try {
    for (const auto& c : j.at("clouds")) {
      TraceSpec::Cloud cc;
      cc.servers = c.at("servers").get<long>();
      cc.vms_per_server = c.at("vms_per_server").get<long>();
      cc.egress_price = c.value("egress_price", 0.0);
      cc.beta_min = c.at("beta_min").get<double>();
      cc.beta_max = c.at("beta_max").get<double>();
      cc.beta_step = c.value("beta_step", 0.02);
      cc.load_scale = c.value("load_scale", 1.0);
      s.clouds.push_back(cc);
    }
    for (const auto& t : j.at("job_types")) {
      TraceSpec::Type tt;
      tt.vm_count = t.at("vm_count").get<int>();
      tt.duration = t.at("duration").get<int>();
      tt.migration_data = t.value("migration_data", 0.0);
      tt.rate = t.at("rate").get<double>();
      s.job_types.push_back(tt);
    }
    s.horizon = j.value("horizon", Slot{240});
    s.diurnal_amplitude = j.value("diurnal_amplitude", 0.0);
    s.diurnal_period = j.value("diurnal_period", 24);
    s.V = j.at("V").get<double>();
    s.gamma = j.value("gamma", 0);
    s.a_max = j.at("a_max").get<int>();
    s.alpha = j.at("alpha").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.g_max_drop = j.value("g_max_drop", 1L);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trace spec: ") + e.what());
  }
  for (const auto& c : s.clouds)
    if (!(c.beta_min >= 0) || !(c.beta_max >= c.beta_min) || !(c.beta_step >= 0))
      throw ConfigError("trace spec: need 0 <= beta_min <= beta_max and beta_step >= 0");
  for (const auto& t : s.job_types)
    if (!(t.rate >= 0)) throw ConfigError("trace spec: arrival rate must be nonnegative");
  if (s.horizon < 0 || s.diurnal_period < 1 || s.diurnal_amplitude < 0 || s.diurnal_amplitude > 1)
    throw ConfigError("trace spec: bad horizon or diurnal profile");
  return s;
}

inline nlohmann::json trace_spec_to_json(const TraceSpec& s) {
  nlohmann::json j;
  j["clouds"] = nlohmann::json::array();
  for (const auto& c : s.clouds)
    j["clouds"].push_back({{"servers", c.servers},
                           {"vms_per_server", c.vms_per_server},
                           {"egress_price", c.egress_price},
                           {"beta_min", c.beta_min},
                           {"beta_max", c.beta_max},
                           {"beta_step", c.beta_step},
                           {"load_scale", c.load_scale}});
  j["job_types"] = nlohmann::json::array();
  for (const auto& t : s.job_types)
    j["job_types"].push_back({{"vm_count", t.vm_count},
                              {"duration", t.duration},
                              {"migration_data", t.migration_data},
                              {"rate", t.rate}});
  j["horizon"] = s.horizon;
  j["diurnal_amplitude"] = s.diurnal_amplitude;
  j["diurnal_period"] = s.diurnal_period;
  j["V"] = s.V;
  j["gamma"] = s.gamma;
  j["a_max"] = s.a_max;
  j["alpha"] = s.alpha;
  j["epsilon"] = s.epsilon;
  j["g_max_drop"] = s.g_max_drop;
  return j;
}

inline FederationConfig config_from_spec(const TraceSpec& s) {
  FederationConfig cfg;
  for (const auto& c : s.clouds) {
    CloudConfig cc;
    cc.servers = c.servers;
    cc.vms_per_server = c.vms_per_server;
    cc.egress_price = c.egress_price;
    cfg.clouds.push_back(cc);
  }
  for (const auto& t : s.job_types) cfg.job_types.push_back({t.vm_count, t.duration, t.migration_data});
  const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
  cfg.alpha = Grid<double>(J, K, s.alpha);
  cfg.epsilon = Grid<double>(J, K, s.epsilon);
  cfg.params.V = s.V;
  cfg.params.gamma = s.gamma > 0 ? s.gamma : 16 * std::max(cfg.w_max(), 1);
  cfg.params.a_max = s.a_max;
  cfg.params.g_max_drop = Grid<long>(J, K, s.g_max_drop);
  return cfg;
}

struct SyntheticTraces {
  FederationConfig config;  ///< carries the generated prices as its VM cost series
  TraceSet traces;
};

/// Reflected random-walk prices and Poisson arrivals with a sinusoidal
/// daily profile, capped at A^max.
inline SyntheticTraces gen_synthetic_traces(const TraceSpec& spec, std::uint64_t seed) {
  SyntheticTraces out;
  out.config = config_from_spec(spec);
  const std::size_t J = spec.clouds.size(), K = spec.job_types.size();
  CounterRng price_rng(seed, Stream::kPrices);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> beta(J);
  for (std::size_t i = 0; i < J; ++i)
    beta[i] = spec.clouds[i].beta_min + (spec.clouds[i].beta_max - spec.clouds[i].beta_min) * unit(price_rng);
  CounterRng arrival_rng(seed, Stream::kArrivals);
  for (Slot t = 0; t < spec.horizon; ++t) {
    if (t > 0)
      for (std::size_t i = 0; i < J; ++i) {
        const auto& c = spec.clouds[i];
        double b = beta[i] + c.beta_step * (2 * unit(price_rng) - 1);
        if (b > c.beta_max) b = 2 * c.beta_max - b;
        if (b < c.beta_min) b = 2 * c.beta_min - b;
        beta[i] = std::clamp(b, c.beta_min, c.beta_max);
      }
    out.traces.prices.push_back(beta);
    const double profile =
        1 + spec.diurnal_amplitude * std::sin(2 * std::numbers::pi * static_cast<double>(t) / spec.diurnal_period);
    Grid<long> a(J, K, 0);
    for (std::size_t i = 0; i < J; ++i)
      for (std::size_t k = 0; k < K; ++k) {
        const double mean = spec.job_types[k].rate * spec.clouds[i].load_scale * profile;
        if (mean <= 0) continue;
        std::poisson_distribution<long> pois(mean);
        a(i, k) = std::min<long>(pois(arrival_rng), spec.a_max);
      }
    out.traces.arrivals.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < J; ++i)
    for (const auto& row : out.traces.prices) out.config.clouds[i].price_series.push_back(row[i]);
  return out;
}

}  // namespace fedtrade

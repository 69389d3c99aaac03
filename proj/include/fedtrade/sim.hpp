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
/// Slot-by-slot federation simulator.
///
/// Each slot builds a SlotContext from the queues and the jobs still
/// running, asks the selected mode for an allocation, and applies it:
/// migrations, job starts (oldest queued job first), drops (oldest
/// remaining first), VM costs, completions, then arrivals and the queue
/// update. A job arriving in slot t can start in slot t + 1 at the
/// earliest; its response delay is start slot minus arrival slot.
///
/// Modes:
///   cooperative  one scheduler over the whole federation
///   no_trade     one scheduler per cloud, jobs never leave home
///   trade        the randomized double auction; a slot whose auction
///                declines to trade or fails is scheduled as no_trade

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedtrade/auction.hpp"
#include "fedtrade/bids.hpp"
#include "fedtrade/domain.hpp"
#include "fedtrade/objective.hpp"
#include "fedtrade/queueing.hpp"
#include "fedtrade/scheduler.hpp"
#include "fedtrade/traces.hpp"

namespace fedtrade {

enum class Mode { kCooperative, kNoTrade, kTrade };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kCooperative: return "cooperative";
    case Mode::kNoTrade: return "no-trade";
    case Mode::kTrade: return "trade";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "cooperative") return Mode::kCooperative;
  if (s == "no-trade" || s == "no_trade") return Mode::kNoTrade;
  if (s == "trade") return Mode::kTrade;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

struct SimOptions {
  Mode mode = Mode::kCooperative;
  std::optional<Slot> horizon;  ///< defaults to the price trace length
  std::uint64_t seed = 0;
  /// Auction settings; the gap constant is filled in from the traces when unset.
  std::optional<AuctionOptions> auction;
};

struct SlotRecord {
  Slot slot = 0;
  CloudIndex cloud = 0;
  double cost_gross = 0;
  double cost_net = 0;
  double active_ratio = 0;
  long drops = 0;
  double avg_delay = 0;  ///< jobs of this cloud started this slot; 0 when none
  long started = 0;
  double delta_effective = 0;
  double auctioneer_net = 0;

  bool operator==(const SlotRecord&) const = default;
};

struct CloudSummary {
  CloudIndex cloud = 0;
  double cost_gross = 0;  ///< mean over slots
  double cost_net = 0;
  double active_ratio = 0;
  long drops = 0;         ///< total
  double avg_delay = 0;   ///< over all jobs started
  long started = 0;
  double delta_effective = 0;
  double auctioneer_net = 0;

  bool operator==(const CloudSummary&) const = default;
};

struct JobRecord {
  JobUid uid = 0;
  CloudIndex owner = 0;
  TypeIndex type = 0;
  Slot arrival = 0;
  std::optional<Slot> start;
  std::optional<Slot> dropped;
  std::optional<CloudIndex> first_host;
  int migrations = 0;
};

struct Metrics {
  Mode mode = Mode::kCooperative;
  Slot horizon = 0;
  std::size_t clouds = 0;
  std::vector<SlotRecord> slots;       ///< slot-major, then cloud
  std::vector<CloudSummary> summary;   ///< one per cloud
  std::vector<JobRecord> jobs;
  Grid<double> max_Z;
  Grid<long> max_q;
  long trade_slots = 0;     ///< slots whose auction produced a lottery
  long fallback_slots = 0;  ///< trade-mode slots scheduled locally
  std::vector<std::string> warnings;

  long total_drops() const {
    long n = 0;
    for (const auto& s : summary) n += s.drops;
    return n;
  }
  double total_cost_net() const {
    double c = 0;
    for (const auto& s : summary) c += s.cost_net;
    return c;
  }
  double total_cost_gross() const {
    double c = 0;
    for (const auto& s : summary) c += s.cost_gross;
    return c;
  }
  double mean_delay() const {
    double d = 0;
    long n = 0;
    for (const auto& s : summary) {
      d += s.avg_delay * static_cast<double>(s.started);
      n += s.started;
    }
    return n > 0 ? d / static_cast<double>(n) : 0.0;
  }
  double mean_active_ratio() const {
    double r = 0;
    for (const auto& s : summary) r += s.active_ratio;
    return summary.empty() ? 0.0 : r / static_cast<double>(summary.size());
  }
};

/// Single-cloud view of cloud j, used by the no-trade mode.
inline FederationConfig local_config(const FederationConfig& cfg, CloudIndex j) {
  FederationConfig out;
  out.clouds = {cfg.clouds.at(j)};
  out.job_types = cfg.job_types;
  const std::size_t K = cfg.num_types();
  out.alpha = Grid<double>(1, K, 0.0);
  out.epsilon = Grid<double>(1, K, 0.0);
  out.params = cfg.params;
  out.params.g_max_drop = Grid<long>(1, K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    out.alpha(0, k) = cfg.alpha(j, k);
    out.epsilon(0, k) = cfg.epsilon(j, k);
    out.params.g_max_drop(0, k) = cfg.params.g_max_drop(j, k);
  }
  return out;
}

class Simulator {
 public:
  Simulator(FederationConfig cfg, TraceSet traces, SimOptions opt)
      : cfg_(std::make_shared<const FederationConfig>(std::move(cfg))),
        traces_(std::move(traces)),
        opt_(std::move(opt)) {
    if (auto v = validate_config(*cfg_); !v.empty())
      throw ConfigError("config " + v.front().field + ": " + v.front().rule);
    horizon_ = opt_.horizon.value_or(traces_.horizon());
    if (horizon_ < 0) throw std::invalid_argument("horizon must be nonnegative");
    if (horizon_ > traces_.horizon())
      throw TraceError("price trace ends at slot " + std::to_string(traces_.horizon()) +
                       " before the horizon " + std::to_string(horizon_));
    for (const auto& row : traces_.prices)
      if (row.size() != cfg_->num_clouds()) throw TraceError("price trace does not match the cloud count");
    for (const auto& a : traces_.arrivals)
      if (a.rows() != cfg_->num_clouds() || a.cols() != cfg_->num_types())
        throw TraceError("arrival trace does not match the config");
    for (CloudIndex j = 0; j < cfg_->num_clouds(); ++j)
      locals_.push_back(std::make_shared<const FederationConfig>(local_config(*cfg_, j)));
    if (opt_.mode == Mode::kTrade) {
      if (opt_.auction)
        auction_ = *opt_.auction;
      else if (horizon_ > 0)
        auction_ = auction_options(*cfg_, traces_.price_range(horizon_));
    }
  }

  Metrics run() {
    const auto& cfg = *cfg_;
    const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
    metrics_ = Metrics{};
    metrics_.mode = opt_.mode;
    metrics_.horizon = horizon_;
    metrics_.clouds = J;
    metrics_.max_Z = Grid<double>(J, K, 0.0);
    metrics_.max_q = Grid<long>(J, K, 0);
    state_ = QueueState::zeros(J, K);
    fifo_.assign(J * K, {});
    running_.clear();
    jobs_.clear();

    std::vector<double> delay_sum(J, 0.0);
    for (Slot t = 0; t < horizon_; ++t) step(t, delay_sum);

    metrics_.summary.resize(J);
    const double n = horizon_ > 0 ? static_cast<double>(horizon_) : 1.0;
    for (CloudIndex i = 0; i < J; ++i) {
      CloudSummary& s = metrics_.summary[i];
      s.cloud = i;
      for (Slot t = 0; t < horizon_; ++t) {
        const SlotRecord& r = metrics_.slots[static_cast<std::size_t>(t) * J + i];
        s.cost_gross += r.cost_gross;
        s.cost_net += r.cost_net;
        s.active_ratio += r.active_ratio;
        s.drops += r.drops;
        s.started += r.started;
        s.delta_effective += r.delta_effective;
        s.auctioneer_net += r.auctioneer_net;
      }
      s.cost_gross /= n;
      s.cost_net /= n;
      s.active_ratio /= n;
      s.delta_effective /= n;
      s.auctioneer_net /= n;
      s.avg_delay = s.started > 0 ? delay_sum[i] / static_cast<double>(s.started) : 0.0;
    }
    metrics_.jobs = jobs_;
    return metrics_;
  }

 private:
  struct Running {
    JobUid uid;
    CloudIndex host;
    int remaining;
  };

  std::deque<JobUid>& queue(CloudIndex j, TypeIndex k) { return fifo_[j * cfg_->num_types() + k]; }

  SlotContext context(Slot t) const {
    SlotContext ctx;
    ctx.config = cfg_;
    ctx.slot = t;
    ctx.beta = traces_.prices[t];
    ctx.queues = state_;
    for (const auto& r : running_) {
      const JobRecord& job = jobs_[r.uid - 1];
      ctx.leftovers.push_back({r.uid, job.owner, job.type, r.host, r.remaining});
    }
    return ctx;
  }

  Allocation local_allocation(const SlotContext& ctx) const {
    const std::size_t J = cfg_->num_clouds(), K = cfg_->num_types();
    Allocation a = Allocation::stay_all(ctx);
    for (CloudIndex j = 0; j < J; ++j) {
      SlotContext sub;
      sub.config = locals_[j];
      sub.slot = ctx.slot;
      sub.beta = {ctx.beta[j]};
      sub.queues = QueueState::zeros(1, K);
      for (std::size_t k = 0; k < K; ++k) {
        sub.queues.q(0, k) = ctx.queues.q(j, k);
        sub.queues.Z(0, k) = ctx.queues.Z(j, k);
      }
      for (auto l : ctx.leftovers)
        if (l.host == j) {
          l.owner = 0;
          l.host = 0;
          sub.leftovers.push_back(l);
        }
      const Allocation local = run_slot_cooperative(sub);
      for (const auto& nj : local.new_jobs) a.new_jobs.push_back({j, nj.type, j, nj.count});
      for (std::size_t k = 0; k < K; ++k) a.drops(j, k) = local.drops(0, k);
    }
    return a;
  }

  Grid<long> drops_for(const SlotContext& ctx) const {
    Grid<long> d(cfg_->num_clouds(), cfg_->num_types(), 0);
    for (std::size_t j = 0; j < d.rows(); ++j)
      for (std::size_t k = 0; k < d.cols(); ++k)
        d(j, k) = drop_decision(ctx.queues.q(j, k), ctx.queues.Z(j, k), cfg_->job_types[k].duration,
                                cfg_->params.V, cfg_->alpha(j, k), cfg_->params.g_max_drop(j, k));
    return d;
  }

  void step(Slot t, std::vector<double>& delay_sum) {
    const auto& cfg = *cfg_;
    const std::size_t J = cfg.num_clouds(), K = cfg.num_types();
    if (t % cfg.params.gamma == 0 && !running_.empty())
      throw InfeasibleState("a job runs across the frame boundary at slot " + std::to_string(t));
    const SlotContext ctx = context(t);

    std::vector<double> charges(J, 0.0), receipts(J, 0.0);
    double delta = 0, auctioneer = 0;
    Allocation alloc;
    switch (opt_.mode) {
      case Mode::kCooperative: alloc = run_slot_cooperative(ctx); break;
      case Mode::kNoTrade: alloc = local_allocation(ctx); break;
      case Mode::kTrade: {
        std::optional<AuctionResult> res;
        try {
          res = run_auction_slot(ctx, auction_, opt_.seed);
        } catch (const std::exception& e) {
          metrics_.warnings.push_back("slot " + std::to_string(t) + ": auction failed (" + e.what() +
                                      "), scheduled locally");
        }
        if (res && res->mechanism.trades()) {
          ++metrics_.trade_slots;
          alloc = to_allocation(ctx, res->bids, res->allocation);
          alloc.drops = drops_for(ctx);
          for (std::size_t b = 0; b < res->bids.buys.size(); ++b) charges[res->bids.buys[b].owner] += res->charges[b];
          receipts = res->payments;
          delta = res->delta_effective();
          auctioneer = res->auctioneer_net;
        } else {
          ++metrics_.fallback_slots;
          alloc = local_allocation(ctx);
          delta = 1.0;
        }
        break;
      }
    }
    if (auto v = allocation_violations(alloc, ctx); !v.empty())
      throw InfeasibleState("slot " + std::to_string(t) + ": " + v.front());

    std::vector<double> gross(J, 0.0);
    // Leftovers: migrate, charging the owner the egress of the source cloud.
    for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
      const auto& l = ctx.leftovers[n];
      const CloudIndex dest = alloc.leftover_dest[n];
      if (dest == l.host) continue;
      gross[l.owner] += ctx.migration_price(l.host, l.type) * cfg.job_types[l.type].vm_count;
      running_[n].host = dest;
      ++jobs_[l.uid - 1].migrations;
    }
    // New jobs start from the head of their queue.
    Grid<long> served(J, K, 0), dropped(J, K, 0);
    std::vector<double> delay(J, 0.0);
    std::vector<long> started(J, 0);
    for (const auto& a : alloc.new_jobs) {
      auto& q = queue(a.owner, a.type);
      for (long c = 0; c < a.count; ++c) {
        const JobUid uid = q.front();
        q.pop_front();
        JobRecord& job = jobs_[uid - 1];
        job.start = t;
        job.first_host = a.dest;
        running_.push_back({uid, a.dest, cfg.job_types[a.type].duration});
        delay[a.owner] += static_cast<double>(t - job.arrival);
        ++started[a.owner];
      }
      served(a.owner, a.type) += a.count;
    }
    // Drops take the oldest jobs still waiting.
    std::vector<long> drops(J, 0);
    for (CloudIndex j = 0; j < J; ++j)
      for (TypeIndex k = 0; k < K; ++k) {
        auto& q = queue(j, k);
        const long g = std::min<long>(alloc.drops(j, k), static_cast<long>(q.size()));
        for (long c = 0; c < g; ++c) {
          jobs_[q.front() - 1].dropped = t;
          q.pop_front();
        }
        dropped(j, k) = g;
        drops[j] += g;
        gross[j] += cfg.alpha(j, k) * static_cast<double>(g);
      }
    // VM cost, occupancy, completions.
    std::vector<long> occupied(J, 0);
    for (const auto& r : running_) occupied[r.host] += cfg.job_types[jobs_[r.uid - 1].type].vm_count;
    for (CloudIndex i = 0; i < J; ++i) gross[i] += ctx.beta[i] * static_cast<double>(occupied[i]);
    for (auto& r : running_) --r.remaining;
    running_.erase(std::remove_if(running_.begin(), running_.end(), [](const Running& r) { return r.remaining <= 0; }),
                   running_.end());

    // Arrivals join the queues after this slot's decisions.
    const Grid<long> arrivals = traces_.arrivals_at(t, J, K);
    for (CloudIndex j = 0; j < J; ++j)
      for (TypeIndex k = 0; k < K; ++k)
        for (long c = 0; c < arrivals(j, k); ++c) {
          const JobUid uid = static_cast<JobUid>(jobs_.size() + 1);
          jobs_.push_back({uid, j, k, t, std::nullopt, std::nullopt, std::nullopt, 0});
          queue(j, k).push_back(uid);
        }
    state_ = step_queues(state_, served, dropped, arrivals, cfg);
    for (CloudIndex j = 0; j < J; ++j)
      for (TypeIndex k = 0; k < K; ++k) {
        if (state_.q(j, k) != static_cast<long>(queue(j, k).size()))
          throw std::logic_error("queue length out of step with the waiting jobs");
        metrics_.max_Z(j, k) = std::max(metrics_.max_Z(j, k), state_.Z(j, k));
        metrics_.max_q(j, k) = std::max(metrics_.max_q(j, k), state_.q(j, k));
      }

    for (CloudIndex i = 0; i < J; ++i) {
      SlotRecord r;
      r.slot = t;
      r.cloud = i;
      r.cost_gross = gross[i];
      r.cost_net = gross[i] + charges[i] - receipts[i];
      const long H = cfg.clouds[i].vms_per_server;
      const long active = (occupied[i] + H - 1) / H;
      r.active_ratio = static_cast<double>(active) / static_cast<double>(cfg.clouds[i].servers);
      r.drops = drops[i];
      r.started = started[i];
      r.avg_delay = started[i] > 0 ? delay[i] / static_cast<double>(started[i]) : 0.0;
      r.delta_effective = delta;
      r.auctioneer_net = auctioneer;
      delay_sum[i] += delay[i];
      metrics_.slots.push_back(r);
    }
  }

  std::shared_ptr<const FederationConfig> cfg_;
  std::vector<std::shared_ptr<const FederationConfig>> locals_;
  TraceSet traces_;
  SimOptions opt_;
  AuctionOptions auction_;
  Slot horizon_ = 0;

  Metrics metrics_;
  QueueState state_;
  std::vector<std::deque<JobUid>> fifo_;
  std::vector<Running> running_;  ///< parallel to the context's leftovers
  std::vector<JobRecord> jobs_;   ///< uid - 1
};

inline Metrics simulate(FederationConfig cfg, TraceSet traces, SimOptions opt) {
  return Simulator(std::move(cfg), std::move(traces), std::move(opt)).run();
}

inline constexpr const char* kMetricsHeader =
    "slot,cloud,cost_gross,cost_net,active_ratio,drops,avg_delay,delta_effective,auctioneer_net";

/// One row per (slot, cloud), then one "summary" row per cloud holding
/// slot means (drops: total; delay: mean over started jobs).
inline void write_metrics_csv(std::ostream& out, const Metrics& m) {
  out << kMetricsHeader << '\n';
  auto row = [&](const std::string& slot, CloudIndex cloud, double g, double n, double a, long d, double delay,
                 double delta, double net) {
    out << slot << ',' << cloud + 1 << ',' << format_number(g) << ',' << format_number(n) << ','
        << format_number(a) << ',' << d << ',' << format_number(delay) << ',' << format_number(delta) << ','
        << format_number(net) << '\n';
  };
  for (const auto& r : m.slots)
    row(std::to_string(r.slot), r.cloud, r.cost_gross, r.cost_net, r.active_ratio, r.drops, r.avg_delay,
        r.delta_effective, r.auctioneer_net);
  for (const auto& s : m.summary)
    row("summary", s.cloud, s.cost_gross, s.cost_net, s.active_ratio, s.drops, s.avg_delay, s.delta_effective,
        s.auctioneer_net);
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["mode"] = to_string(m.mode);
  j["horizon"] = m.horizon;
  j["clouds"] = m.clouds;
  j["slots"] = nlohmann::json::array();
  for (const auto& r : m.slots)
    j["slots"].push_back({{"slot", r.slot},
                          {"cloud", r.cloud + 1},
                          {"cost_gross", r.cost_gross},
                          {"cost_net", r.cost_net},
                          {"active_ratio", r.active_ratio},
                          {"drops", r.drops},
                          {"avg_delay", r.avg_delay},
                          {"started", r.started},
                          {"delta_effective", r.delta_effective},
                          {"auctioneer_net", r.auctioneer_net}});
  j["summary"] = nlohmann::json::array();
  for (const auto& s : m.summary)
    j["summary"].push_back({{"cloud", s.cloud + 1},
                            {"cost_gross", s.cost_gross},
                            {"cost_net", s.cost_net},
                            {"active_ratio", s.active_ratio},
                            {"drops", s.drops},
                            {"avg_delay", s.avg_delay},
                            {"started", s.started},
                            {"delta_effective", s.delta_effective},
                            {"auctioneer_net", s.auctioneer_net}});
  j["trade_slots"] = m.trade_slots;
  j["fallback_slots"] = m.fallback_slots;
  j["warnings"] = m.warnings;
  return j;
}

/// Reads back the slot and summary tables written by metrics_to_json.
inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.mode = parse_mode(j.at("mode").get<std::string>());
  m.horizon = j.at("horizon").get<Slot>();
  m.clouds = j.at("clouds").get<std::size_t>();
  for (const auto& r : j.at("slots"))
    m.slots.push_back({r.at("slot").get<Slot>(), r.at("cloud").get<CloudIndex>() - 1, r.at("cost_gross").get<double>(),
                       r.at("cost_net").get<double>(), r.at("active_ratio").get<double>(), r.at("drops").get<long>(),
                       r.at("avg_delay").get<double>(), r.at("started").get<long>(),
                       r.at("delta_effective").get<double>(), r.at("auctioneer_net").get<double>()});
  for (const auto& s : j.at("summary"))
    m.summary.push_back({s.at("cloud").get<CloudIndex>() - 1, s.at("cost_gross").get<double>(),
                         s.at("cost_net").get<double>(), s.at("active_ratio").get<double>(), s.at("drops").get<long>(),
                         s.at("avg_delay").get<double>(), s.at("started").get<long>(),
                         s.at("delta_effective").get<double>(), s.at("auctioneer_net").get<double>()});
  m.trade_slots = j.value("trade_slots", 0L);
  m.fallback_slots = j.value("fallback_slots", 0L);
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

}  // namespace fedtrade

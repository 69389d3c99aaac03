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
/// Bids of one trading slot and the winner-determination program built
/// from them.
///
/// Identical bundle bids are carried as one BuyBid with a multiplicity, so
/// a WDP variable counts how many copies of a bundle go to a cloud. A
/// leftover bundle may only go to a cloud other than its current host;
/// losing it means staying put.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fedtrade/lp.hpp"
#include "fedtrade/objective.hpp"

namespace fedtrade {

struct BuyBid {
  CloudIndex owner = 0;
  JobKind kind = JobKind::kNew;  ///< kNew or kLeftover
  TypeIndex type = 0;
  int vm_count = 1;
  double price = 0;  ///< per bundle
  long count = 1;    ///< identical bundles in this bid
  std::optional<CloudIndex> host;  ///< leftovers only
  std::vector<JobUid> jobs;        ///< leftover jobs behind the bundles, in order

  bool operator==(const BuyBid&) const = default;
};

struct SellBid {
  double ask = 0;   ///< per VM
  long supply = 0;  ///< VMs offered

  bool operator==(const SellBid&) const = default;
};

struct BidSet {
  std::vector<BuyBid> buys;
  std::vector<SellBid> sells;  ///< one per cloud

  bool operator==(const BidSet&) const = default;
};

struct BidOptions {
  /// Leave out leftover bids that cannot beat any VM price (value <= 0).
  bool omit_unprofitable_leftovers = true;
};

/// Type each cloud bids for: the largest (w^2 q + Z)/g among nonempty
/// types that finish inside the frame.
inline std::optional<TypeIndex> bid_type(const SlotContext& ctx, CloudIndex j) {
  const auto& cfg = ctx.cfg();
  std::optional<TypeIndex> best;
  for (TypeIndex k = 0; k < cfg.num_types(); ++k) {
    if (ctx.queues.q(j, k) <= 0 || cfg.job_types[k].duration > ctx.frame_remaining()) continue;
    if (!best || ctx.queue_weight(j, k) * cfg.job_types[*best].vm_count >
                     ctx.queue_weight(j, *best) * cfg.job_types[k].vm_count)
      best = k;
  }
  return best;
}

/// Bids that report true valuations and true VM costs.
inline BidSet generate_truthful_bids(const SlotContext& ctx, const BidOptions& opt = {}) {
  check_context(ctx);
  const auto& cfg = ctx.cfg();
  BidSet bids;
  std::map<std::tuple<CloudIndex, TypeIndex, CloudIndex>, std::size_t> group;
  for (const auto& l : ctx.leftovers) {
    const int g = cfg.job_types[l.type].vm_count;
    const double price = g * (ctx.beta[l.host] - ctx.migration_price(l.host, l.type));
    if (opt.omit_unprofitable_leftovers && price <= 0) continue;
    const auto key = std::make_tuple(l.owner, l.type, l.host);
    auto it = group.find(key);
    if (it == group.end()) {
      group.emplace(key, bids.buys.size());
      bids.buys.push_back({l.owner, JobKind::kLeftover, l.type, g, price, 1, l.host, {l.uid}});
    } else {
      auto& b = bids.buys[it->second];
      ++b.count;
      b.jobs.push_back(l.uid);
    }
  }
  for (CloudIndex j = 0; j < cfg.num_clouds(); ++j) {
    const auto k = bid_type(ctx, j);
    if (!k) continue;
    bids.buys.push_back({j, JobKind::kNew, *k, cfg.job_types[*k].vm_count,
                         ctx.queue_weight(j, *k) / cfg.params.V, ctx.queues.q(j, *k), std::nullopt,
                         {}});
  }
  const std::vector<long> load = ctx.leftover_load();
  for (CloudIndex i = 0; i < cfg.num_clouds(); ++i)
    bids.sells.push_back({ctx.beta[i], capacity(cfg.clouds[i]) - load[i]});
  return bids;
}

/// Winner determination program over (bid, cloud) copy counts.
struct Wdp {
  struct Column {
    std::size_t bid;
    CloudIndex cloud;
  };
  lp::Model model;
  std::vector<Column> columns;  ///< parallel to model variables
  std::vector<std::optional<std::size_t>> bid_row;    ///< XOR row per bid
  std::vector<std::optional<std::size_t>> cloud_row;  ///< capacity row per cloud
};

inline double column_profit(const BidSet& bids, std::size_t b, CloudIndex i) {
  return bids.buys[b].price - bids.sells[i].ask * bids.buys[b].vm_count;
}

/// Builds the WDP. Columns that can never carry positive welfare (a bundle
/// larger than the supply, a nonpositive margin, a leftover's own host) are
/// left out; they are zero in every optimum.
inline Wdp build_wdp(const BidSet& bids) {
  for (const auto& s : bids.sells)
    if (s.supply < 0) throw std::domain_error("build_wdp: negative supply");
  for (const auto& b : bids.buys)
    if (b.count < 0 || b.vm_count < 1) throw std::domain_error("build_wdp: malformed buy bid");
  Wdp w;
  const std::size_t J = bids.sells.size();
  w.bid_row.assign(bids.buys.size(), std::nullopt);
  w.cloud_row.assign(J, std::nullopt);
  std::vector<std::vector<std::pair<std::size_t, double>>> per_bid(bids.buys.size()), per_cloud(J);
  for (std::size_t b = 0; b < bids.buys.size(); ++b) {
    const auto& bid = bids.buys[b];
    if (bid.count == 0) continue;
    for (CloudIndex i = 0; i < J; ++i) {
      if (bid.kind == JobKind::kLeftover && bid.host == i) continue;
      if (bid.vm_count > bids.sells[i].supply) continue;
      const double profit = column_profit(bids, b, i);
      if (!(profit > 0)) continue;
      const auto v = w.model.add_variable(profit, static_cast<double>(bid.count), true,
                                          "x_" + std::to_string(b + 1) + "_" + std::to_string(i + 1));
      w.columns.push_back({b, i});
      per_bid[b].push_back({v, 1.0});
      per_cloud[i].push_back({v, static_cast<double>(bid.vm_count)});
    }
  }
  for (std::size_t b = 0; b < bids.buys.size(); ++b)
    if (!per_bid[b].empty())
      w.bid_row[b] = w.model.add_row(std::move(per_bid[b]), lp::Relation::kLe,
                                     static_cast<double>(bids.buys[b].count),
                                     "xor_" + std::to_string(b + 1));
  for (CloudIndex i = 0; i < J; ++i)
    if (!per_cloud[i].empty())
      w.cloud_row[i] = w.model.add_row(std::move(per_cloud[i]), lp::Relation::kLe,
                                       static_cast<double>(bids.sells[i].supply),
                                       "supply_" + std::to_string(i + 1));
  return w;
}

/// Copy counts per (bid, cloud) for an arbitrary assignment.
using BidAssignment = Grid<long>;

/// WDP objective of any (bid, cloud) assignment, including columns the
/// builder leaves out.
inline double wdp_objective(const BidSet& bids, const BidAssignment& x) {
  double v = 0;
  for (std::size_t b = 0; b < bids.buys.size(); ++b)
    for (CloudIndex i = 0; i < bids.sells.size(); ++i)
      if (x(b, i) != 0) v += column_profit(bids, b, i) * static_cast<double>(x(b, i));
  return v;
}

inline bool wdp_feasible(const BidSet& bids, const BidAssignment& x) {
  std::vector<long> used(bids.sells.size(), 0);
  for (std::size_t b = 0; b < bids.buys.size(); ++b) {
    long n = 0;
    for (CloudIndex i = 0; i < bids.sells.size(); ++i) {
      if (x(b, i) < 0) return false;
      if (x(b, i) > 0 && bids.buys[b].kind == JobKind::kLeftover && bids.buys[b].host == i)
        return false;
      n += x(b, i);
      used[i] += x(b, i) * bids.buys[b].vm_count;
    }
    if (n > bids.buys[b].count) return false;
  }
  for (CloudIndex i = 0; i < bids.sells.size(); ++i)
    if (used[i] > bids.sells[i].supply) return false;
  return true;
}

/// Allocation carried out by a bid-space assignment. Copies of a leftover
/// bid take the bid's jobs in order; leftovers that win nothing stay.
inline Allocation to_allocation(const SlotContext& ctx, const BidSet& bids, const BidAssignment& x) {
  Allocation a = Allocation::stay_all(ctx);
  std::map<JobUid, std::size_t> index;
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) index.emplace(ctx.leftovers[n].uid, n);
  for (std::size_t b = 0; b < bids.buys.size(); ++b) {
    const auto& bid = bids.buys[b];
    std::size_t next = 0;
    for (CloudIndex i = 0; i < bids.sells.size(); ++i) {
      if (x(b, i) <= 0) continue;
      if (bid.kind == JobKind::kNew) {
        a.new_jobs.push_back({bid.owner, bid.type, i, x(b, i)});
        continue;
      }
      for (long c = 0; c < x(b, i); ++c) {
        if (next >= bid.jobs.size()) throw std::domain_error("to_allocation: more copies than jobs");
        a.leftover_dest.at(index.at(bid.jobs[next++])) = i;
      }
    }
  }
  return a;
}

/// Expands a WDP column vector into a (bid, cloud) table.
template <typename T>
Grid<T> to_bid_table(const BidSet& bids, const Wdp& w, const std::vector<T>& column_values) {
  Grid<T> out(bids.buys.size(), bids.sells.size(), T{});
  for (std::size_t c = 0; c < w.columns.size(); ++c)
    out(w.columns[c].bid, w.columns[c].cloud) += column_values[c];
  return out;
}

}  // namespace fedtrade

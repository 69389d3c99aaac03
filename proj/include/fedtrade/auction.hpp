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
/// Randomized double auction over one slot.
///
/// The LP relaxation of the WDP is priced with fractional VCG, its optimum
/// is scaled by (1 - delta) and written as a lottery over integral WDP
/// solutions (column generation against a greedy packing oracle), and one
/// lottery ticket is drawn. Charges are scaled so that every agent pays or
/// receives (1 - delta) times its fractional VCG transfer in expectation.
///
/// A grouped bid with n copies is n identical buyers. VCG transfers are
/// reported per copy; a copy's share of the fractional allocation is the
/// group's total allocation divided by n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedtrade/bids.hpp"
#include "fedtrade/lp.hpp"
#include "fedtrade/objective.hpp"
#include "fedtrade/random.hpp"

namespace fedtrade {

inline constexpr double kWinTolerance = 1e-9;

struct VcgOutcome {
  Wdp wdp;
  std::vector<double> x;  ///< fractional optimum, per WDP column
  double welfare = 0;
  std::vector<double> share;         ///< per bid, fractional allocation of one copy
  std::vector<double> buyer_charge;  ///< per bid, fractional VCG charge of one copy
  std::vector<double> sold;          ///< per cloud, bundles sold in x
  std::vector<double> sold_vms;      ///< per cloud, VMs sold in x
  std::vector<double> seller_payment;

  bool wins(std::size_t b) const { return share[b] > kWinTolerance; }
  bool sells(CloudIndex i) const { return sold_vms[i] > kWinTolerance; }
};

inline double lp_welfare(const BidSet& bids) {
  const auto sol = lp::solve(build_wdp(bids).model);
  if (!sol.optimal()) throw std::runtime_error(std::string("WDP relaxation is ") + lp::to_string(sol.status));
  return sol.objective;
}

inline VcgOutcome fractional_vcg(const BidSet& bids) {
  VcgOutcome out;
  out.wdp = build_wdp(bids);
  const auto sol = lp::solve(out.wdp.model);
  if (!sol.optimal()) throw std::runtime_error(std::string("WDP relaxation is ") + lp::to_string(sol.status));
  out.x = sol.x;
  out.welfare = sol.objective;
  const std::size_t B = bids.buys.size(), J = bids.sells.size();
  out.share.assign(B, 0.0);
  out.buyer_charge.assign(B, 0.0);
  out.sold.assign(J, 0.0);
  out.sold_vms.assign(J, 0.0);
  out.seller_payment.assign(J, 0.0);
  for (std::size_t c = 0; c < out.wdp.columns.size(); ++c) {
    const auto [b, i] = out.wdp.columns[c];
    out.share[b] += out.x[c];
    out.sold[i] += out.x[c];
    out.sold_vms[i] += out.x[c] * bids.buys[b].vm_count;
  }
  for (std::size_t b = 0; b < B; ++b) {
    out.share[b] /= static_cast<double>(std::max<long>(bids.buys[b].count, 1));
    if (!out.wins(b)) continue;
    BidSet without = bids;
    --without.buys[b].count;
    // Welfare of everyone else now, versus their best welfare without this copy.
    const double others = out.welfare - bids.buys[b].price * out.share[b];
    out.buyer_charge[b] = lp_welfare(without) - others;
  }
  for (CloudIndex i = 0; i < J; ++i) {
    if (!out.sells(i)) continue;
    BidSet without = bids;
    without.sells[i].supply = 0;
    const double others = out.welfare + bids.sells[i].ask * out.sold_vms[i];
    out.seller_payment[i] = others - lp_welfare(without);
  }
  return out;
}

/// Scale of the lottery, or nullopt when the slot should not trade.
inline std::optional<double> compute_delta(double lpr_star, double C, double V) {
  if (!(lpr_star > 0) || !(V > 0)) return std::nullopt;
  const double delta = C / (V * lpr_star);
  if (!(delta < 1)) return std::nullopt;
  return std::max(delta, 0.0);
}

/// One lottery ticket: an integral WDP solution, as copy counts per column.
struct DecompositionEntry {
  double weight = 0;
  std::vector<long> x;
};

struct Decomposition {
  std::vector<DecompositionEntry> entries;
  double delta = 0;            ///< scale actually achieved
  double requested_delta = 0;  ///< scale first attempted
  double master_objective = 1;
  int columns_generated = 0;
  int master_solves = 0;
  bool exact_pricing_used = false;

  double weight_sum() const {
    double s = 0;
    for (const auto& e : entries) s += e.weight;
    return s;
  }
  /// Expected copy count per WDP column.
  std::vector<double> mean(std::size_t n) const {
    std::vector<double> m(n, 0.0);
    for (const auto& e : entries)
      for (std::size_t c = 0; c < n; ++c) m[c] += e.weight * static_cast<double>(e.x[c]);
    return m;
  }
  /// Largest |sum rho x(z) - (1 - delta) x*| over columns.
  double identity_residual(const std::vector<double>& x_star) const {
    const auto m = mean(x_star.size());
    double worst = 0;
    for (std::size_t c = 0; c < x_star.size(); ++c)
      worst = std::max(worst, std::abs(m[c] - (1 - delta) * x_star[c]));
    return worst;
  }
};

struct DecomposeOptions {
  double growth = 1.05;
  double tolerance = 1e-9;
  int max_master_solves = 2000;
  long exact_node_limit = 200000;
};

namespace detail {

/// Packs as many copies as capacity and bid counts allow, best column first.
inline std::vector<long> greedy_pack(const BidSet& bids, const Wdp& w, const std::vector<double>& weight,
                                     const std::vector<bool>& allowed, bool by_ratio) {
  const std::size_t n = w.columns.size();
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < n; ++c)
    if (allowed[c] && weight[c] > 0) order.push_back(c);
  auto key = [&](std::size_t c) {
    return by_ratio ? weight[c] / bids.buys[w.columns[c].bid].vm_count : weight[c];
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  std::vector<long> left(bids.buys.size()), free(bids.sells.size());
  for (std::size_t b = 0; b < bids.buys.size(); ++b) left[b] = bids.buys[b].count;
  for (std::size_t i = 0; i < bids.sells.size(); ++i) free[i] = bids.sells[i].supply;
  std::vector<long> x(n, 0);
  for (std::size_t c : order) {
    const auto [b, i] = w.columns[c];
    const long g = bids.buys[b].vm_count;
    const long take = std::min(left[b], free[i] / g);
    if (take <= 0) continue;
    x[c] = take;
    left[b] -= take;
    free[i] -= take * g;
  }
  return x;
}

struct ExactPack {
  std::vector<long> x;
  double value = 0;
  bool complete = true;
};

/// Depth-first branch and bound for the best packing under `weight`.
inline ExactPack exact_pack(const BidSet& bids, const Wdp& w, const std::vector<double>& weight,
                            const std::vector<bool>& allowed, long node_limit) {
  const std::size_t n = w.columns.size();
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < n; ++c)
    if (allowed[c] && weight[c] > 0) cols.push_back(c);
  auto ratio = [&](std::size_t c) { return weight[c] / bids.buys[w.columns[c].bid].vm_count; };
  std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });

  ExactPack best;
  best.x = greedy_pack(bids, w, weight, allowed, true);
  for (std::size_t c = 0; c < n; ++c) best.value += weight[c] * static_cast<double>(best.x[c]);

  std::vector<long> left(bids.buys.size()), free(bids.sells.size()), x(n, 0);
  for (std::size_t b = 0; b < bids.buys.size(); ++b) left[b] = bids.buys[b].count;
  for (std::size_t i = 0; i < bids.sells.size(); ++i) free[i] = bids.sells[i].supply;
  long nodes = 0;

  // Bound: each cloud's free VMs filled at the best remaining ratio there,
  // never more than the remaining columns could carry on their own.
  auto bound = [&](std::size_t from) {
    std::vector<double> top(bids.sells.size(), 0.0), carry(bids.sells.size(), 0.0);
    for (std::size_t p = from; p < cols.size(); ++p) {
      const auto [b, i] = w.columns[cols[p]];
      top[i] = std::max(top[i], ratio(cols[p]));
      carry[i] += weight[cols[p]] * static_cast<double>(left[b]);
    }
    double v = 0;
    for (std::size_t i = 0; i < top.size(); ++i) v += std::min(carry[i], top[i] * static_cast<double>(free[i]));
    return v;
  };
  auto dfs = [&](auto&& self, std::size_t p, double value) -> void {
    if (++nodes > node_limit) {
      best.complete = false;
      return;
    }
    if (value > best.value + 1e-12) {
      best.value = value;
      best.x = x;
    }
    if (p == cols.size() || value + bound(p) <= best.value + 1e-12) return;
    const std::size_t c = cols[p];
    const auto [b, i] = w.columns[c];
    const long g = bids.buys[b].vm_count;
    for (long take = std::min(left[b], free[i] / g); take >= 0; --take) {
      x[c] = take;
      left[b] -= take;
      free[i] -= take * g;
      self(self, p + 1, value + weight[c] * static_cast<double>(take));
      left[b] += take;
      free[i] += take * g;
      x[c] = 0;
      if (!best.complete) return;
    }
  };
  dfs(dfs, 0, 0.0);
  return best;
}

}  // namespace detail

/// Writes (1 - delta) x_star as a lottery over integral WDP solutions.
/// Returns nullopt when delta had to grow to 1 or more.
inline std::optional<Decomposition> decompose(const BidSet& bids, const Wdp& w,
                                              const std::vector<double>& x_star, double delta,
                                              const DecomposeOptions& opt = {}) {
  if (!(delta >= 0) || !(delta < 1)) throw std::invalid_argument("decompose: delta must lie in [0, 1)");
  const std::size_t n = w.columns.size();
  if (x_star.size() != n) throw std::invalid_argument("decompose: x* does not match the WDP");
  Decomposition d;
  d.delta = d.requested_delta = delta;

  std::vector<std::size_t> support;
  std::vector<bool> allowed(n, false);
  bool integral = true;
  for (std::size_t c = 0; c < n; ++c)
    if (x_star[c] > opt.tolerance) {
      support.push_back(c);
      allowed[c] = true;
      integral = integral && std::abs(x_star[c] - std::round(x_star[c])) <= opt.tolerance;
    }
  const std::vector<long> zero(n, 0);
  if (support.empty()) {
    d.entries.push_back({1.0, zero});
    return d;
  }
  if (integral) {
    std::vector<long> x(n, 0);
    for (std::size_t c : support) x[c] = std::lround(x_star[c]);
    d.entries.push_back({1 - delta, x});
    d.entries.push_back({delta, zero});
    return d;
  }

  std::vector<std::vector<long>> pool;
  auto add_column = [&](const std::vector<long>& x) {
    if (std::find(pool.begin(), pool.end(), x) != pool.end()) return false;
    pool.push_back(x);
    return true;
  };
  add_column(zero);
  std::vector<double> profit(n);
  for (std::size_t c = 0; c < n; ++c) profit[c] = w.model.objective()[c];
  add_column(detail::greedy_pack(bids, w, profit, allowed, false));
  for (std::size_t c : support) {
    std::vector<long> unit(n, 0);
    unit[c] = 1;
    add_column(unit);
  }
  std::vector<long> floors(n, 0);
  for (std::size_t c : support) floors[c] = static_cast<long>(std::floor(x_star[c] + opt.tolerance));
  add_column(floors);
  const std::size_t seeded = pool.size();

  while (true) {
    lp::Model master;
    std::vector<std::vector<std::pair<std::size_t, double>>> eq(support.size());
    std::vector<std::pair<std::size_t, double>> total;
    for (std::size_t z = 0; z < pool.size(); ++z) {
      master.add_variable(-1.0);
      total.push_back({z, 1.0});
      for (std::size_t s = 0; s < support.size(); ++s)
        if (pool[z][support[s]] != 0) eq[s].push_back({z, static_cast<double>(pool[z][support[s]])});
    }
    for (std::size_t s = 0; s < support.size(); ++s)
      master.add_row(std::move(eq[s]), lp::Relation::kEq, (1 - d.delta) * x_star[support[s]]);
    master.add_row(std::move(total), lp::Relation::kGe, 1.0);
    const auto sol = lp::solve(master);
    ++d.master_solves;
    if (!sol.optimal())
      throw std::runtime_error(std::string("decomposition master is ") + lp::to_string(sol.status));
    d.master_objective = -sol.objective;

    if (d.master_objective <= 1 + opt.tolerance) {
      for (std::size_t z = 0; z < pool.size(); ++z)
        if (sol.x[z] > 1e-12) d.entries.push_back({sol.x[z], pool[z]});
      d.columns_generated = static_cast<int>(pool.size() - seeded);
      return d;
    }
    if (d.master_solves >= opt.max_master_solves)
      throw std::runtime_error("decomposition did not converge");

    std::vector<double> nu(n, 0.0);
    for (std::size_t s = 0; s < support.size(); ++s) nu[support[s]] = std::max(0.0, -sol.duals[s]);
    const double theta = -sol.duals[support.size()];
    auto value_of = [&](const std::vector<long>& x) {
      double v = 0;
      for (std::size_t c : support) v += nu[c] * static_cast<double>(x[c]);
      return v;
    };
    bool added = false;
    for (bool by_ratio : {true, false}) {
      auto x = detail::greedy_pack(bids, w, nu, allowed, by_ratio);
      if (value_of(x) + theta > 1 + opt.tolerance && add_column(x)) {
        added = true;
        break;
      }
    }
    if (!added) {
      d.exact_pricing_used = true;
      auto best = detail::exact_pack(bids, w, nu, allowed, opt.exact_node_limit);
      if (best.value + theta > 1 + opt.tolerance && add_column(best.x)) added = true;
    }
    if (!added) {
      d.delta *= opt.growth;
      if (!(d.delta < 1)) return std::nullopt;
    }
  }
}

enum class DeltaRule {
  kLprRatio,  ///< delta = C / (V LPR*)
  kFixed,     ///< delta fixed by the caller
};

struct AuctionOptions {
  DeltaRule rule = DeltaRule::kLprRatio;
  double gap_constant = 0;  ///< C
  double V = 1;
  double fixed_delta = 0.2;
  DecomposeOptions decompose;
  BidOptions bids;
};

/// Options with the gap constant for VM prices in `beta`.
inline AuctionOptions auction_options(const FederationConfig& cfg, PriceRange beta) {
  AuctionOptions o;
  o.V = cfg.params.V;
  o.gap_constant = constant_C(cfg, cfg.params.V, beta);
  return o;
}

inline AuctionOptions auction_options(const FederationConfig& cfg) {
  return auction_options(cfg, price_range(cfg));
}

/// VCG prices and lottery for one bid set; no draw yet.
struct Mechanism {
  VcgOutcome vcg;
  std::optional<double> delta;
  std::optional<Decomposition> lottery;
  std::string no_trade_reason;

  bool trades() const { return lottery.has_value(); }
};

inline Mechanism run_mechanism(const BidSet& bids, const AuctionOptions& opt) {
  Mechanism m;
  m.vcg = fractional_vcg(bids);
  if (opt.rule == DeltaRule::kFixed)
    m.delta = opt.fixed_delta;
  else
    m.delta = compute_delta(m.vcg.welfare, opt.gap_constant, opt.V);
  if (!m.delta || !(*m.delta < 1)) {
    m.delta.reset();
    m.no_trade_reason = m.vcg.welfare > 0 ? "approximation scale reaches 1" : "no profitable trade";
    return m;
  }
  m.lottery = decompose(bids, m.vcg.wdp, m.vcg.x, *m.delta, opt.decompose);
  if (!m.lottery) m.no_trade_reason = "decomposition scale reaches 1";
  return m;
}

/// Copies of bid b that win in lottery entry x.
inline long copies_won(const Wdp& w, const std::vector<long>& x, std::size_t b) {
  long n = 0;
  for (std::size_t c = 0; c < w.columns.size(); ++c)
    if (w.columns[c].bid == b) n += x[c];
  return n;
}

inline long bundles_sold(const Wdp& w, const std::vector<long>& x, CloudIndex i) {
  long n = 0;
  for (std::size_t c = 0; c < w.columns.size(); ++c)
    if (w.columns[c].cloud == i) n += x[c];
  return n;
}

inline long vms_sold(const BidSet& bids, const Wdp& w, const std::vector<long>& x, CloudIndex i) {
  long n = 0;
  for (std::size_t c = 0; c < w.columns.size(); ++c)
    if (w.columns[c].cloud == i) n += x[c] * bids.buys[w.columns[c].bid].vm_count;
  return n;
}

/// Realized per-copy charge of a winning copy of bid b.
inline double realized_charge(const VcgOutcome& v, std::size_t b) {
  return v.wins(b) ? v.buyer_charge[b] / v.share[b] : 0.0;
}

/// Realized payment to cloud i when lottery entry x is drawn.
inline double realized_payment(const VcgOutcome& v, const std::vector<long>& x, CloudIndex i) {
  if (!v.sells(i)) return 0.0;
  return v.seller_payment[i] * static_cast<double>(bundles_sold(v.wdp, x, i)) / v.sold[i];
}

struct AuctionResult {
  BidSet bids;
  Mechanism mechanism;
  bool traded = false;
  double draw = 0;
  std::size_t chosen = 0;          ///< lottery entry
  BidAssignment allocation;        ///< copies per (bid, cloud)
  std::vector<double> charges;     ///< per bid, total over its winning copies
  std::vector<double> payments;    ///< per cloud
  double auctioneer_net = 0;       ///< charges minus payments

  double delta_effective() const {
    return mechanism.lottery ? mechanism.lottery->delta : 1.0;
  }
};

/// Index of the lottery entry selected by a uniform draw in [0, 1).
inline std::size_t pick_entry(const Decomposition& d, double u) {
  const double target = u * d.weight_sum();
  double acc = 0;
  for (std::size_t z = 0; z < d.entries.size(); ++z) {
    acc += d.entries[z].weight;
    if (target < acc) return z;
  }
  return d.entries.size() - 1;
}

inline AuctionResult settle(BidSet bids, Mechanism m, double u) {
  AuctionResult r;
  r.bids = std::move(bids);
  r.mechanism = std::move(m);
  r.draw = u;
  const std::size_t B = r.bids.buys.size(), J = r.bids.sells.size();
  r.allocation = BidAssignment(B, J, 0);
  r.charges.assign(B, 0.0);
  r.payments.assign(J, 0.0);
  if (!r.mechanism.trades()) return r;
  const auto& v = r.mechanism.vcg;
  const auto& d = *r.mechanism.lottery;
  r.chosen = pick_entry(d, u);
  const auto& x = d.entries[r.chosen].x;
  r.allocation = to_bid_table(r.bids, v.wdp, x);
  for (std::size_t b = 0; b < B; ++b) {
    const long won = copies_won(v.wdp, x, b);
    if (won > 0) r.charges[b] = realized_charge(v, b) * static_cast<double>(won);
    r.auctioneer_net += r.charges[b];
  }
  for (CloudIndex i = 0; i < J; ++i) {
    r.payments[i] = realized_payment(v, x, i);
    r.auctioneer_net -= r.payments[i];
  }
  r.traded = std::any_of(x.begin(), x.end(), [](long c) { return c != 0; });
  return r;
}

/// Full auction for one slot. The seed and slot select the single draw.
inline AuctionResult run_auction_slot(const SlotContext& ctx, const AuctionOptions& opt,
                                      std::uint64_t seed) {
  BidSet bids = generate_truthful_bids(ctx, opt.bids);
  Mechanism m = run_mechanism(bids, opt);
  const double u = draw_uniform(seed, Stream::kAuction, static_cast<std::uint64_t>(ctx.slot));
  return settle(std::move(bids), std::move(m), u);
}

/// Expected charge per copy of bid b and expected payment to cloud i.
inline double expected_charge(const Mechanism& m, std::size_t b, const BidSet& bids) {
  if (!m.trades()) return 0.0;
  double e = 0;
  for (const auto& entry : m.lottery->entries)
    e += entry.weight * realized_charge(m.vcg, b) * static_cast<double>(copies_won(m.vcg.wdp, entry.x, b));
  return e / static_cast<double>(std::max<long>(bids.buys[b].count, 1));
}

inline double expected_payment(const Mechanism& m, CloudIndex i) {
  if (!m.trades()) return 0.0;
  double e = 0;
  for (const auto& entry : m.lottery->entries) e += entry.weight * realized_payment(m.vcg, entry.x, i);
  return e;
}

struct Agent {
  enum class Role { kBuyer, kSeller };
  Role role = Role::kBuyer;
  std::size_t index = 0;  ///< bid index for buyers, cloud index for sellers
};

/// Bid set in which one copy of buy bid b is its own bid (the last one).
inline BidSet split_copy(const BidSet& bids, std::size_t b) {
  BidSet out = bids;
  BuyBid one = out.buys.at(b);
  one.count = 1;
  if (!one.jobs.empty()) {
    one.jobs = {bids.buys[b].jobs.back()};
    out.buys[b].jobs.pop_back();
  }
  --out.buys[b].count;
  out.buys.push_back(one);
  return out;
}

/// Exact expected utility of an agent that reports `multiplier` times its
/// true price (buyers, one copy) or ask (sellers) while everyone else stays
/// truthful. `truthful` holds the true values.
inline double expected_utility(const BidSet& truthful, const Agent& agent, double multiplier,
                               const AuctionOptions& opt) {
  if (agent.role == Agent::Role::kBuyer) {
    const BidSet base = split_copy(truthful, agent.index);
    const std::size_t me = base.buys.size() - 1;
    const double value = base.buys[me].price;
    BidSet reported = base;
    reported.buys[me].price *= multiplier;
    const Mechanism m = run_mechanism(reported, opt);
    if (!m.trades()) return 0.0;
    double u = 0;
    for (const auto& e : m.lottery->entries) {
      const double won = static_cast<double>(copies_won(m.vcg.wdp, e.x, me));
      u += e.weight * won * (value - realized_charge(m.vcg, me));
    }
    return u;
  }
  const CloudIndex i = agent.index;
  const double cost = truthful.sells.at(i).ask;
  BidSet reported = truthful;
  reported.sells[i].ask *= multiplier;
  const Mechanism m = run_mechanism(reported, opt);
  if (!m.trades()) return 0.0;
  double u = 0;
  for (const auto& e : m.lottery->entries)
    u += e.weight * (realized_payment(m.vcg, e.x, i) -
                     cost * static_cast<double>(vms_sold(reported, m.vcg.wdp, e.x, i)));
  return u;
}

}  // namespace fedtrade

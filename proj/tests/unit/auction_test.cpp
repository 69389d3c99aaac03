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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fedtrade/auction.hpp"
#include "test_support.hpp"

namespace fedtrade {
namespace {

using testing::cloud;
using testing::job_type;
using testing::make_config;
using testing::make_context;

BuyBid buy(CloudIndex owner, double price, int g = 1, long count = 1) {
  BuyBid b;
  b.owner = owner;
  b.price = price;
  b.vm_count = g;
  b.count = count;
  return b;
}

BidSet micro_instance() {
  BidSet bids;
  bids.buys = {buy(0, 5), buy(1, 3)};
  bids.sells = {{1.0, 2}};
  return bids;
}

// Oracle: VCG transfers on integral allocations, each welfare found by
// enumeration.
struct IntegralVcg {
  double welfare;
  std::vector<double> charge;
  std::vector<double> payment;
};

double ip_welfare(const BidSet& bids) {
  const auto w = build_wdp(bids);
  const auto r = lp::brute_force_ip(w.model);
  return r.objective;
}

IntegralVcg integral_vcg(const BidSet& bids) {
  const auto w = build_wdp(bids);
  const auto r = lp::brute_force_ip(w.model);
  IntegralVcg out{r.objective, std::vector<double>(bids.buys.size(), 0.0),
                  std::vector<double>(bids.sells.size(), 0.0)};
  std::vector<double> won(bids.buys.size(), 0.0), vms(bids.sells.size(), 0.0);
  for (std::size_t c = 0; c < w.columns.size(); ++c) {
    won[w.columns[c].bid] += static_cast<double>(r.x[c]);
    vms[w.columns[c].cloud] += static_cast<double>(r.x[c]) * bids.buys[w.columns[c].bid].vm_count;
  }
  for (std::size_t b = 0; b < bids.buys.size(); ++b) {
    if (won[b] == 0) continue;
    BidSet without = bids;
    without.buys[b].count -= 1;
    out.charge[b] = ip_welfare(without) - (r.objective - bids.buys[b].price * won[b] / bids.buys[b].count);
  }
  for (std::size_t i = 0; i < bids.sells.size(); ++i) {
    if (vms[i] == 0) continue;
    BidSet without = bids;
    without.sells[i].supply = 0;
    out.payment[i] = r.objective + bids.sells[i].ask * vms[i] - ip_welfare(without);
  }
  return out;
}

TEST(TruthfulBids, LeftoverAndNewJobPrices) {
  auto cfg = make_config({cloud(1, 4, 0.0), cloud(1, 4, 0.05)}, {job_type(1, 1, 1.0), job_type(2, 2, 1.0)},
                         5.0, 1.0, 2.0);
  auto ctx = make_context(cfg, {0.1, 0.5});
  ctx.leftovers = {{1, 1, 0, 1, 1}, {2, 0, 0, 1, 1}, {3, 1, 0, 1, 1}};
  auto only_left = generate_truthful_bids(ctx);
  ASSERT_EQ(only_left.buys.size(), 2u);
  EXPECT_NEAR(only_left.buys[0].price, 0.45, 1e-15);
  EXPECT_EQ(only_left.buys[0].count, 2);
  EXPECT_EQ(only_left.buys[0].jobs, (std::vector<JobUid>{1, 3}));
  EXPECT_EQ(only_left.sells[1].supply, 1);
  EXPECT_EQ(only_left.sells[0].supply, 4);
  EXPECT_DOUBLE_EQ(only_left.sells[0].ask, 0.1);

  ctx.queues.q(0, 0) = 3;
  ctx.queues.q(0, 1) = 1;
  ctx.queues.Z(0, 1) = 1;
  auto with_new = generate_truthful_bids(ctx);
  ASSERT_EQ(with_new.buys.size(), 3u);
  const auto& nb = with_new.buys[2];
  // Type 1 at 3 per VM beats type 2 at (4 + 1)/2.
  EXPECT_EQ(nb.type, 0u);
  EXPECT_EQ(nb.count, 3);
  EXPECT_DOUBLE_EQ(nb.price, 3.0 / 2.0);
}

TEST(TruthfulBids, UnprofitableLeftoverOmitted) {
  auto cfg = make_config({cloud(1, 2, 0.5), cloud(1, 2)}, {job_type(1, 1, 1.0)});
  auto ctx = make_context(cfg, {0.3, 0.1});
  ctx.leftovers = {{1, 0, 0, 0, 1}};
  EXPECT_TRUE(generate_truthful_bids(ctx).buys.empty());
  EXPECT_EQ(generate_truthful_bids(ctx, {false}).buys.size(), 1u);
}

TEST(Wdp, OmittedLeftoverNeverChangesOptimum) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto cfg = make_config({cloud(1, 3, std::uniform_real_distribution<double>(0, 0.6)(rng)),
                            cloud(1, 3, std::uniform_real_distribution<double>(0, 0.6)(rng))},
                           {job_type(1, 1, 1.0), job_type(2, 1, 1.0)});
    auto ctx = make_context(cfg, {std::uniform_real_distribution<double>(0, 0.5)(rng),
                                  std::uniform_real_distribution<double>(0, 0.5)(rng)});
    ctx.leftovers = {{1, 0, 0, 0, 1}, {2, 1, 1, 1, 1}};
    ctx.queues.q(0, 0) = std::uniform_int_distribution<long>(0, 2)(rng);
    const auto a = lp::brute_force_ip(build_wdp(generate_truthful_bids(ctx, {true})).model);
    const auto b = lp::brute_force_ip(build_wdp(generate_truthful_bids(ctx, {false})).model);
    EXPECT_NEAR(a.objective, b.objective, 1e-12);
  }
}

TEST(Wdp, ColumnsRowsAndFeasibility) {
  BidSet bids = micro_instance();
  bids.buys.push_back(buy(0, 0.5));  // below the ask: no column
  const auto w = build_wdp(bids);
  EXPECT_EQ(w.columns.size(), 2u);
  EXPECT_FALSE(w.bid_row[2].has_value());
  EXPECT_EQ(w.model.names()[0], "x_1_1");
  Grid<long> x(3, 1, 0);
  x(0, 0) = 1;
  x(2, 0) = 1;
  EXPECT_TRUE(wdp_feasible(bids, x));
  EXPECT_NEAR(wdp_objective(bids, x), 4.0 - 0.5, 1e-12);
  x(1, 0) = 1;
  EXPECT_FALSE(wdp_feasible(bids, x));
  bids.sells[0].supply = -1;
  EXPECT_THROW(build_wdp(bids), std::domain_error);
}

TEST(FractionalVcg, MicroInstance) {
  const auto v = fractional_vcg(micro_instance());
  EXPECT_NEAR(v.welfare, 6.0, 1e-9);
  EXPECT_NEAR(v.buyer_charge[0], 1.0, 1e-9);
  EXPECT_NEAR(v.buyer_charge[1], 1.0, 1e-9);
  EXPECT_NEAR(v.seller_payment[0], 8.0, 1e-9);
  const double deficit = v.seller_payment[0] - v.buyer_charge[0] - v.buyer_charge[1];
  EXPECT_NEAR(deficit, 6.0, 1e-9);
  const auto oracle = integral_vcg(micro_instance());
  EXPECT_NEAR(oracle.charge[0], 1.0, 1e-12);
  EXPECT_NEAR(oracle.payment[0], 8.0, 1e-12);
}

TEST(FractionalVcg, NoProfitableTrade) {
  BidSet bids;
  bids.buys = {buy(0, 0.5), buy(1, 1.5, 2)};
  bids.sells = {{1.0, 4}, {0.8, 4}};
  const auto v = fractional_vcg(bids);
  EXPECT_EQ(v.welfare, 0.0);
  for (double c : v.buyer_charge) EXPECT_EQ(c, 0.0);
  for (double p : v.seller_payment) EXPECT_EQ(p, 0.0);
}

TEST(FractionalVcg, SingleBuyerSingleSeller) {
  BidSet bids;
  bids.buys = {buy(0, 5, 2)};
  bids.sells = {{1.0, 2}};
  const auto v = fractional_vcg(bids);
  EXPECT_NEAR(v.buyer_charge[0], 2.0, 1e-9);
  EXPECT_NEAR(v.seller_payment[0], 5.0, 1e-9);
}

TEST(FractionalVcg, MatchesIntegralVcgOnUnitBundles) {
  // With one-VM bundles the relaxation is integral, so fractional VCG is VCG.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    BidSet bids;
    const int B = std::uniform_int_distribution<int>(1, 3)(rng);
    const int J = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int b = 0; b < B; ++b)
      bids.buys.push_back(buy(0, std::uniform_real_distribution<double>(1, 9)(rng), 1,
                              std::uniform_int_distribution<long>(1, 2)(rng)));
    for (int i = 0; i < J; ++i)
      bids.sells.push_back({std::uniform_real_distribution<double>(0, 4)(rng),
                            std::uniform_int_distribution<long>(0, 3)(rng)});
    const auto v = fractional_vcg(bids);
    const auto oracle = integral_vcg(bids);
    ASSERT_NEAR(v.welfare, oracle.welfare, 1e-9);
    for (int b = 0; b < B; ++b) {
      if (!v.wins(b)) continue;
      // Each winning copy of a group shares the group's charge.
      EXPECT_NEAR(v.buyer_charge[b], oracle.charge[b], 1e-7) << "trial " << trial;
    }
    for (int i = 0; i < J; ++i)
      if (v.sells(i)) {
        EXPECT_NEAR(v.seller_payment[i], oracle.payment[i], 1e-7) << "trial " << trial;
      }
  }
}

TEST(ComputeDelta, Examples) {
  EXPECT_NEAR(*compute_delta(100, 196, 10), 0.196, 1e-15);
  EXPECT_FALSE(compute_delta(19.6, 196, 10));
  EXPECT_FALSE(compute_delta(0, 196, 10));
  EXPECT_FALSE(compute_delta(-1, 196, 10));
}

TEST(Decompose, IntegralAndZero) {
  const BidSet bids = micro_instance();
  const auto v = fractional_vcg(bids);
  const auto d = decompose(bids, v.wdp, v.x, 0.2);
  ASSERT_TRUE(d);
  ASSERT_EQ(d->entries.size(), 2u);
  EXPECT_DOUBLE_EQ(d->entries[0].weight, 0.8);
  EXPECT_EQ(d->entries[0].x, (std::vector<long>{1, 1}));
  EXPECT_DOUBLE_EQ(d->entries[1].weight, 0.2);
  EXPECT_EQ(d->entries[1].x, (std::vector<long>{0, 0}));

  BidSet none = bids;
  none.sells[0].ask = 10;
  const auto vz = fractional_vcg(none);
  const auto dz = decompose(none, vz.wdp, vz.x, 0.3);
  ASSERT_TRUE(dz);
  ASSERT_EQ(dz->entries.size(), 1u);
  EXPECT_EQ(dz->entries[0].weight, 1.0);
  EXPECT_THROW(decompose(bids, v.wdp, v.x, 1.0), std::invalid_argument);
}

TEST(Decompose, FractionalOptimum) {
  BidSet bids;
  bids.buys = {buy(0, 10, 2), buy(1, 9, 2)};
  bids.sells = {{1.0, 3}};
  const auto v = fractional_vcg(bids);
  EXPECT_NEAR(v.x[0] + v.x[1], 1.5, 1e-9);
  const auto d = decompose(bids, v.wdp, v.x, 0.4);
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->weight_sum(), 1.0, 1e-9);
  EXPECT_LE(d->identity_residual(v.x), 1e-9);
  EXPECT_NEAR(d->master_objective, 1.0, 1e-9);
}

BidSet random_bids(std::mt19937_64& rng) {
  BidSet bids;
  const int J = std::uniform_int_distribution<int>(1, 3)(rng);
  const int B = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int b = 0; b < B; ++b)
    bids.buys.push_back(buy(static_cast<CloudIndex>(b % J), std::uniform_real_distribution<double>(1, 10)(rng),
                            std::uniform_int_distribution<int>(1, 3)(rng),
                            std::uniform_int_distribution<long>(1, 3)(rng)));
  for (int i = 0; i < J; ++i)
    bids.sells.push_back({std::uniform_real_distribution<double>(0.1, 1.5)(rng),
                          std::uniform_int_distribution<long>(0, 7)(rng)});
  return bids;
}

TEST(Decompose, RandomInstancesSatisfyIdentity) {
  std::mt19937_64 rng(9);
  int fractional = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const BidSet bids = random_bids(rng);
    const auto v = fractional_vcg(bids);
    const double delta = std::uniform_real_distribution<double>(0.3, 0.7)(rng);
    const auto d = decompose(bids, v.wdp, v.x, delta);
    if (!d) continue;
    for (double x : v.x) fractional += std::abs(x - std::round(x)) > 1e-6;
    double sum = 0;
    for (const auto& e : d->entries) {
      EXPECT_GE(e.weight, 0.0);
      sum += e.weight;
      EXPECT_TRUE(wdp_feasible(bids, to_bid_table(bids, v.wdp, e.x)));
    }
    EXPECT_NEAR(sum, 1.0, 1e-6) << "trial " << trial;
    EXPECT_LE(d->identity_residual(v.x), 1e-6) << "trial " << trial;
    EXPECT_NEAR(d->master_objective, 1.0, 1e-6);
  }
  EXPECT_GT(fractional, 20);
}

TEST(Auction, PaymentsMatchInExpectation) {
  std::mt19937_64 rng(10);
  AuctionOptions opt;
  opt.rule = DeltaRule::kFixed;
  for (int trial = 0; trial < 200; ++trial) {
    const BidSet bids = random_bids(rng);
    opt.fixed_delta = std::uniform_real_distribution<double>(0.2, 0.6)(rng);
    const auto m = run_mechanism(bids, opt);
    if (!m.trades()) continue;
    const double scale = 1 - m.lottery->delta;
    for (std::size_t b = 0; b < bids.buys.size(); ++b) {
      const double pf = m.vcg.buyer_charge[b];
      EXPECT_NEAR(expected_charge(m, b, bids), scale * pf, 1e-6 * std::max(1.0, std::abs(pf)));
    }
    for (CloudIndex i = 0; i < bids.sells.size(); ++i) {
      const double pf = m.vcg.seller_payment[i];
      EXPECT_NEAR(expected_payment(m, i), scale * pf, 1e-6 * std::max(1.0, std::abs(pf)));
    }
  }
}

TEST(Auction, IntegralOptimumBranches) {
  // Two branches: 0.8 on the optimum, 0.2 on nothing.
  AuctionOptions opt;
  opt.rule = DeltaRule::kFixed;
  opt.fixed_delta = 0.2;
  const BidSet bids = micro_instance();
  const auto m = run_mechanism(bids, opt);
  const auto win = settle(bids, m, 0.5);
  const auto lose = settle(bids, m, 0.9);
  EXPECT_TRUE(win.traded);
  EXPECT_FALSE(lose.traded);
  EXPECT_NEAR(win.charges[0], 1.0, 1e-9);
  EXPECT_NEAR(win.payments[0], 8.0, 1e-9);
  EXPECT_NEAR(win.auctioneer_net, -6.0, 1e-9);
  EXPECT_EQ(lose.auctioneer_net, 0.0);
  EXPECT_NEAR(expected_charge(m, 0, bids), 0.8 * 1.0, 1e-12);
}

TEST(Auction, SlotIsDeterministicAndConservesMoney) {
  auto cfg = make_config({cloud(1, 3, 0.05), cloud(1, 4, 0.02)}, {job_type(1, 1, 1.0), job_type(2, 2, 0.5)},
                         2.0);
  auto ctx = make_context(cfg, {0.4, 0.1}, 3);
  ctx.leftovers = {{1, 0, 0, 0, 1}};
  ctx.queues.q(0, 0) = 4;
  ctx.queues.q(1, 1) = 2;
  AuctionOptions opt;
  opt.gap_constant = 0.5;
  const auto a = run_auction_slot(ctx, opt, 42);
  const auto b = run_auction_slot(ctx, opt, 42);
  EXPECT_EQ(a.allocation, b.allocation);
  EXPECT_EQ(a.charges, b.charges);
  EXPECT_EQ(a.draw, b.draw);
  double net = 0;
  for (double c : a.charges) net += c;
  for (double p : a.payments) net -= p;
  EXPECT_EQ(net, a.auctioneer_net);
  EXPECT_TRUE(wdp_feasible(a.bids, a.allocation));
  EXPECT_TRUE(allocation_violations(to_allocation(ctx, a.bids, a.allocation), ctx).empty());

  opt.gap_constant = 1e6;
  const auto none = run_auction_slot(ctx, opt, 42);
  EXPECT_FALSE(none.traded);
  EXPECT_EQ(none.auctioneer_net, 0.0);
}

TEST(ExpectedUtility, Deviations) {
  AuctionOptions opt;
  opt.rule = DeltaRule::kFixed;
  opt.fixed_delta = 0.2;
  const BidSet bids = micro_instance();
  const Agent buyer{Agent::Role::kBuyer, 0};
  const double truthful = expected_utility(bids, buyer, 1.0, opt);
  EXPECT_NEAR(truthful, 0.8 * (5 - 1), 1e-9);
  EXPECT_LE(expected_utility(bids, buyer, 0.8, opt), truthful + 1e-12);
  const Agent seller{Agent::Role::kSeller, 0};
  EXPECT_NEAR(expected_utility(bids, seller, 1.0, opt), 0.8 * (8 - 2), 1e-9);
  EXPECT_EQ(expected_utility(bids, seller, 10.0, opt), 0.0);
}

TEST(ClaimFour, WdpObjectiveMatchesPlacementObjective) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    auto cfg = make_config({cloud(1, 4, std::uniform_real_distribution<double>(0, 0.2)(rng)),
                            cloud(1, 5, std::uniform_real_distribution<double>(0, 0.2)(rng))},
                           {job_type(1, 1, 1.0), job_type(2, 2, 0.5)}, 3.0, 1.0, 2.0);
    auto ctx = make_context(cfg, {std::uniform_real_distribution<double>(0.05, 0.6)(rng),
                                  std::uniform_real_distribution<double>(0.05, 0.6)(rng)});
    ctx.leftovers = {{1, 0, 0, 0, 1}, {2, 1, 1, 1, 1}, {3, 1, 0, 1, 1}};
    for (auto& q : ctx.queues.q.values()) q = std::uniform_int_distribution<long>(0, 2)(rng);
    const BidSet bids = generate_truthful_bids(ctx);
    if (bids.buys.empty()) continue;
    BidAssignment x(bids.buys.size(), bids.sells.size(), 0);
    for (int step = 0; step < 8; ++step) {
      const std::size_t b = std::uniform_int_distribution<std::size_t>(0, bids.buys.size() - 1)(rng);
      const CloudIndex i = std::uniform_int_distribution<CloudIndex>(0, 1)(rng);
      ++x(b, i);
      if (!wdp_feasible(bids, x)) --x(b, i);
    }
    double stay = 0;
    for (const auto& l : ctx.leftovers) stay += cfg.job_types[l.type].vm_count * ctx.beta[l.host];
    const auto alloc = to_allocation(ctx, bids, x);
    EXPECT_NEAR(wdp_objective(bids, x), -phi2_tilde(alloc, ctx) / cfg.params.V + stay, 1e-9);
  }
}

}  // namespace
}  // namespace fedtrade

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

// Randomized property suites shared by `fedtrade verify` and the
// acceptance binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedtrade/auction.hpp"
#include "fedtrade/bids.hpp"
#include "fedtrade/objective.hpp"
#include "fedtrade/oracles.hpp"
#include "fedtrade/random.hpp"
#include "fedtrade/relaxation.hpp"
#include "fedtrade/scheduler.hpp"
#include "fedtrade/sim.hpp"
#include "fedtrade/traces.hpp"

namespace fedtrade::verify {

/// Outcome of one property over a batch of instances. `worst` is the
/// largest observed excess of the checked side over its bound; the check
/// fails on any excess above the tolerance.
struct Check {
  explicit Check(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  long instances = 0;
  long failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  double tolerance = 0;
  double seconds = 0;
  std::string note;

  bool passed() const { return instances > 0 && failures == 0; }
  void observe(double excess) {
    ++instances;
    worst = std::max(worst, excess);
    if (!(excess <= tolerance)) ++failures;
  }
  void require(bool ok) { observe(ok ? -std::numeric_limits<double>::infinity() : 1.0); }
};

inline std::string format(const Check& c) {
  std::ostringstream os;
  os << (c.passed() ? "PASS" : "FAIL") << ' ' << c.name << ": " << c.instances << " instances, "
     << c.failures << " failures";
  if (std::isfinite(c.worst)) os << ", worst excess " << c.worst + 0.0 << " (tol " << c.tolerance << ")";
  os << ", " << c.seconds << " s";
  if (!c.note.empty()) os << "; " << c.note;
  return os.str();
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Random slot contexts

struct InstanceShape {
  std::size_t max_clouds = 3;
  std::size_t max_types = 2;
  int max_vm_count = 3;
  int max_duration = 3;
  std::size_t max_jobs = 6;  ///< leftovers plus queued jobs
  long max_servers = 2;
  long max_vms_per_server = 4;
  double beta_min = 0.05;
  double beta_max = 1.0;
  double alpha_min = 1.0;
  double alpha_max = 5.0;
  double egress_max = 0.2;
  double migration_data_max = 5.0;
  double Z_max = 5.0;
  std::vector<double> V_choices = {1.0, 2.0, 5.0};
  double leftover_share = 0.4;
  /// Keep every queue weight w^2 q + Z at or below V alpha of its queue,
  /// the range the drop rule is meant to hold queues in.
  bool weight_within_penalty = false;
};

inline SlotContext random_context(CounterRng& rng, const InstanceShape& s) {
  auto uniform_int = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  FederationConfig cfg;
  const std::size_t J = static_cast<std::size_t>(uniform_int(1, static_cast<long>(s.max_clouds)));
  const std::size_t K = static_cast<std::size_t>(uniform_int(1, static_cast<long>(s.max_types)));
  for (std::size_t i = 0; i < J; ++i) {
    CloudConfig c;
    c.servers = uniform_int(1, s.max_servers);
    c.vms_per_server = uniform_int(1, s.max_vms_per_server);
    c.egress_price = uniform(0.0, s.egress_max);
    cfg.clouds.push_back(c);
  }
  for (std::size_t k = 0; k < K; ++k)
    cfg.job_types.push_back({static_cast<int>(uniform_int(1, s.max_vm_count)),
                             static_cast<int>(uniform_int(1, s.max_duration)),
                             uniform(0.0, s.migration_data_max)});
  cfg.alpha = Grid<double>(J, K);
  cfg.epsilon = Grid<double>(J, K, 1.0);
  for (double& a : cfg.alpha.values()) a = uniform(s.alpha_min, s.alpha_max);
  cfg.params.V = s.V_choices[static_cast<std::size_t>(uniform_int(0, static_cast<long>(s.V_choices.size()) - 1))];
  cfg.params.gamma = cfg.w_max() + static_cast<int>(uniform_int(1, 3));
  cfg.params.a_max = 2;
  cfg.params.g_max_drop = Grid<long>(J, K, 1);

  SlotContext ctx;
  ctx.config = std::make_shared<const FederationConfig>(cfg);
  ctx.slot = uniform_int(0, 2L * cfg.params.gamma - 1);
  for (std::size_t i = 0; i < J; ++i) ctx.beta.push_back(uniform(s.beta_min, s.beta_max));
  ctx.queues = QueueState::zeros(J, K);
  for (double& z : ctx.queues.Z.values()) z = uniform(0.0, s.Z_max);

  std::vector<long> room(J);
  for (std::size_t i = 0; i < J; ++i) room[i] = capacity(cfg.clouds[i]);
  const long jobs = uniform_int(0, static_cast<long>(s.max_jobs));
  for (long n = 0; n < jobs; ++n) {
    const CloudIndex owner = static_cast<CloudIndex>(uniform_int(0, static_cast<long>(J) - 1));
    const TypeIndex type = static_cast<TypeIndex>(uniform_int(0, static_cast<long>(K) - 1));
    const long g = cfg.job_types[type].vm_count;
    std::vector<CloudIndex> hosts;
    for (CloudIndex i = 0; i < J; ++i)
      if (room[i] >= g) hosts.push_back(i);
    if (!hosts.empty() && uniform(0.0, 1.0) < s.leftover_share) {
      const CloudIndex h = hosts[static_cast<std::size_t>(uniform_int(0, static_cast<long>(hosts.size()) - 1))];
      room[h] -= g;
      ctx.leftovers.push_back({static_cast<JobUid>(n + 1), owner, type, h,
                               static_cast<int>(uniform_int(1, cfg.job_types[type].duration))});
    } else {
      ++ctx.queues.q(owner, type);
    }
  }
  if (s.weight_within_penalty)
    for (CloudIndex j = 0; j < J; ++j)
      for (TypeIndex k = 0; k < K; ++k) {
        const double cap = cfg.params.V * cfg.alpha(j, k);
        const double w2 = static_cast<double>(cfg.job_types[k].duration) * cfg.job_types[k].duration;
        ctx.queues.q(j, k) = std::min(ctx.queues.q(j, k), static_cast<long>(std::floor(cap / w2)));
        ctx.queues.Z(j, k) = std::min(ctx.queues.Z(j, k), cap - w2 * static_cast<double>(ctx.queues.q(j, k)));
      }
  return ctx;
}

inline PriceRange slot_price_range(const SlotContext& ctx) {
  const auto [lo, hi] = std::minmax_element(ctx.beta.begin(), ctx.beta.end());
  return {*lo, *hi};
}

inline std::vector<TrafficMatrix> random_traffic(CounterRng& rng, const FederationConfig& cfg, double max_volume) {
  std::uniform_real_distribution<double> vol(0.0, max_volume);
  std::vector<TrafficMatrix> out;
  for (const auto& t : cfg.job_types) {
    auto m = TrafficMatrix::zeros(static_cast<std::size_t>(t.vm_count));
    for (std::size_t r = 0; r < m.dim; ++r)
      for (std::size_t c = 0; c < m.dim; ++c)
        if (r != c) m(r, c) = vol(rng);
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scheduler suites

/// Greedy objective against the relaxation optimum plus the gap constant.
/// With `weight_within_penalty` the queues stay in the range the gap
/// constant accounts for.
inline std::vector<Check> scheduler_gap_suite(std::uint64_t seed, long instances = 2000,
                                              bool weight_within_penalty = true) {
  Timer timer;
  Check gap{"greedy within gap constant of relaxation"}, lower{"relaxation below greedy"};
  gap.tolerance = lower.tolerance = 1e-9;
  InstanceShape shape;
  shape.weight_within_penalty = weight_within_penalty;
  CounterRng rng(seed, Stream::kInstances);
  for (long n = 0; n < instances; ++n) {
    const SlotContext ctx = random_context(rng, shape);
    const double greedy = phi2_tilde(run_slot_cooperative(ctx), ctx);
    const double relaxed = relaxed_phi2_tilde(ctx);
    const double C = constant_C(ctx.cfg(), ctx.cfg().params.V, slot_price_range(ctx));
    gap.observe(greedy - (relaxed + C));
    lower.observe(relaxed - greedy);
  }
  gap.seconds = lower.seconds = timer.seconds();
  return {gap, lower};
}

/// The co-located relaxation never exceeds the split-VM optimum with traffic.
inline std::vector<Check> split_placement_suite(std::uint64_t seed, long instances = 100) {
  Timer timer;
  Check chain{"relaxation below split-VM optimum"}, coloc{"relaxation below co-located optimum"};
  chain.tolerance = coloc.tolerance = 1e-6;
  InstanceShape shape;
  shape.max_clouds = 3;
  shape.max_vm_count = 2;
  shape.max_jobs = 2;
  shape.max_servers = 1;
  shape.max_vms_per_server = 3;
  shape.leftover_share = 0.5;
  CounterRng rng(seed, Stream::kInstances);
  for (long n = 0; n < instances; ++n) {
    const SlotContext ctx = random_context(rng, shape);
    const auto traffic = random_traffic(rng, ctx.cfg(), 2.0);
    const double relaxed = relaxed_phi2_tilde(ctx);
    chain.observe(relaxed - brute_force_split_phi2(ctx, traffic));
    coloc.observe(relaxed - brute_force_phi2_tilde(ctx));
  }
  chain.seconds = coloc.seconds = timer.seconds();
  return {chain, coloc};
}

/// Random feasible co-located allocation that only schedules each owner's
/// bid type, as the bid correspondence requires.
inline Allocation random_bid_type_allocation(CounterRng& rng, const SlotContext& ctx) {
  const auto& cfg = ctx.cfg();
  const std::size_t J = cfg.num_clouds();
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  Allocation a = Allocation::stay_all(ctx);
  std::vector<long> room(J);
  for (CloudIndex i = 0; i < J; ++i) room[i] = capacity(cfg.clouds[i]);
  for (const auto& l : ctx.leftovers) room[l.host] -= cfg.job_types[l.type].vm_count;
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
    const auto& l = ctx.leftovers[n];
    const long g = cfg.job_types[l.type].vm_count;
    const CloudIndex d = static_cast<CloudIndex>(pick(0, static_cast<long>(J) - 1));
    if (d == l.host || room[d] < g) continue;
    room[d] -= g;
    a.leftover_dest[n] = d;
  }
  for (CloudIndex j = 0; j < J; ++j) {
    const auto k = bid_type(ctx, j);
    if (!k) continue;
    const long g = cfg.job_types[*k].vm_count;
    long left = ctx.queues.q(j, *k);
    for (CloudIndex i = 0; i < J && left > 0; ++i) {
      const long n = pick(0, std::min(left, room[i] / g));
      if (n == 0) continue;
      a.new_jobs.push_back({j, *k, i, n});
      room[i] -= n * g;
      left -= n;
    }
  }
  return a;
}

/// Bid-space image of a co-located allocation under truthful bids.
inline BidAssignment to_bid_assignment(const SlotContext& ctx, const BidSet& bids, const Allocation& a) {
  BidAssignment x(bids.buys.size(), bids.sells.size(), 0);
  for (std::size_t n = 0; n < ctx.leftovers.size(); ++n) {
    const auto& l = ctx.leftovers[n];
    if (a.leftover_dest[n] == l.host) continue;
    for (std::size_t b = 0; b < bids.buys.size(); ++b)
      if (std::find(bids.buys[b].jobs.begin(), bids.buys[b].jobs.end(), l.uid) != bids.buys[b].jobs.end())
        ++x(b, a.leftover_dest[n]);
  }
  for (const auto& nj : a.new_jobs)
    for (std::size_t b = 0; b < bids.buys.size(); ++b)
      if (bids.buys[b].kind == JobKind::kNew && bids.buys[b].owner == nj.owner && bids.buys[b].type == nj.type)
        x(b, nj.dest) += nj.count;
  return x;
}

/// WDP objective equals the scaled placement objective plus the leftovers'
/// current hosting bill.
inline std::vector<Check> bid_identity_suite(std::uint64_t seed, long instances = 200) {
  Timer timer;
  Check id{"WDP objective matches placement objective"};
  id.tolerance = 1e-9;
  InstanceShape shape;
  CounterRng rng(seed, Stream::kInstances);
  BidOptions keep_all;
  keep_all.omit_unprofitable_leftovers = false;
  for (long n = 0; n < instances; ++n) {
    const SlotContext ctx = random_context(rng, shape);
    const auto& cfg = ctx.cfg();
    const BidSet bids = generate_truthful_bids(ctx, keep_all);
    const Allocation a = random_bid_type_allocation(rng, ctx);
    double hosting = 0;
    for (const auto& l : ctx.leftovers) hosting += cfg.job_types[l.type].vm_count * ctx.beta[l.host];
    const double lhs = wdp_objective(bids, to_bid_assignment(ctx, bids, a));
    const double rhs = -phi2_tilde(a, ctx) / cfg.params.V + hosting;
    id.observe(std::abs(lhs - rhs));
  }
  id.seconds = timer.seconds();
  return {id};
}

// ---------------------------------------------------------------------------
// Auction suites

/// Small instances whose WDP is cheap to solve exactly.
inline InstanceShape auction_shape() {
  InstanceShape s;
  s.max_jobs = 5;
  s.max_vm_count = 2;
  s.max_vms_per_server = 3;
  return s;
}

/// Instances with a narrow price band and a small penalty so the gap
/// constant leaves room for trade.
inline InstanceShape tradeable_shape() {
  InstanceShape s = auction_shape();
  s.beta_min = 0.4;
  s.beta_max = 0.5;
  s.alpha_min = s.alpha_max = 0.5;
  s.egress_max = 0.02;
  s.migration_data_max = 1.0;
  s.V_choices = {1.0};
  s.max_vm_count = 2;
  s.Z_max = 8.0;
  return s;
}

inline AuctionOptions slot_auction_options(const SlotContext& ctx) {
  return auction_options(ctx.cfg(), slot_price_range(ctx));
}

struct AuctionCase {
  SlotContext ctx;
  BidSet bids;
  AuctionOptions options;
  Mechanism mechanism;
};

/// Auction instances for the mechanism suites: each random context is run
/// with a fixed scale and, when it trades, with the gap-constant scale.
inline std::vector<AuctionCase> auction_cases(std::uint64_t seed, long contexts) {
  std::vector<AuctionCase> out;
  CounterRng rng(seed, Stream::kInstances);
  const std::vector<double> fixed = {0.05, 0.2, 0.5};
  for (long n = 0; n < contexts; ++n) {
    const SlotContext ctx = random_context(rng, n % 2 == 0 ? auction_shape() : tradeable_shape());
    BidSet bids = generate_truthful_bids(ctx);
    AuctionOptions ratio = slot_auction_options(ctx);
    {
      Mechanism m = run_mechanism(bids, ratio);
      if (m.trades()) out.push_back({ctx, bids, ratio, std::move(m)});
    }
    AuctionOptions f = ratio;
    f.rule = DeltaRule::kFixed;
    f.fixed_delta = fixed[static_cast<std::size_t>(n) % fixed.size()];
    Mechanism m = run_mechanism(bids, f);
    if (m.trades()) out.push_back({ctx, bids, f, std::move(m)});
  }
  return out;
}

inline bool is_integral(const std::vector<double>& x, double tol = 1e-9) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v - std::round(v)) <= tol; });
}

inline std::vector<Check> decomposition_checks(const std::vector<AuctionCase>& cases) {
  Check sum{"lottery weights sum to one"}, nonneg{"lottery weights nonnegative"},
      identity{"lottery mean equals scaled fractional optimum"}, master{"restricted master optimum is one"},
      feasible{"lottery entries are WDP-feasible"}, integral{"integral optimum gives two-entry lottery"};
  sum.tolerance = identity.tolerance = master.tolerance = 1e-6;
  nonneg.tolerance = 0;
  long fractional = 0, grown = 0;
  for (const auto& c : cases) {
    const auto& v = c.mechanism.vcg;
    const auto& d = *c.mechanism.lottery;
    sum.observe(std::abs(d.weight_sum() - 1));
    double min_w = std::numeric_limits<double>::infinity();
    for (const auto& e : d.entries) {
      min_w = std::min(min_w, e.weight);
      feasible.require(wdp_feasible(c.bids, to_bid_table(c.bids, v.wdp, e.x)));
    }
    nonneg.observe(-min_w);
    identity.observe(d.identity_residual(v.x));
    master.observe(std::abs(d.master_objective - 1));
    if (d.delta > d.requested_delta) ++grown;
    bool any = std::any_of(v.x.begin(), v.x.end(), [](double x) { return x > 1e-9; });
    if (any && is_integral(v.x)) {
      std::vector<long> xi(v.x.size());
      for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = std::lround(v.x[k]);
      const bool two = d.entries.size() == 2 && d.entries[0].x == xi && d.entries[0].weight == 1 - d.delta &&
                       d.entries[1].weight == d.delta &&
                       std::all_of(d.entries[1].x.begin(), d.entries[1].x.end(), [](long x) { return x == 0; });
      integral.require(two);
    } else if (any) {
      ++fractional;
    }
  }
  std::string note = std::to_string(fractional) + " fractional optima, " + std::to_string(grown) +
                     " with enlarged scale";
  identity.note = note;
  return {sum, nonneg, identity, master, feasible, integral};
}

inline std::vector<Check> payment_checks(const std::vector<AuctionCase>& cases) {
  Check buyers{"expected buyer charge equals scaled VCG charge"},
      sellers{"expected seller payment equals scaled VCG payment"};
  buyers.tolerance = sellers.tolerance = 1e-6;
  for (const auto& c : cases) {
    const auto& m = c.mechanism;
    const double scale = 1 - m.lottery->delta;
    for (std::size_t b = 0; b < c.bids.buys.size(); ++b) {
      const double pf = m.vcg.buyer_charge[b];
      buyers.observe(std::abs(expected_charge(m, b, c.bids) - scale * pf) / std::max(1.0, std::abs(pf)));
    }
    for (CloudIndex i = 0; i < c.bids.sells.size(); ++i) {
      const double pf = m.vcg.seller_payment[i];
      sellers.observe(std::abs(expected_payment(m, i) - scale * pf) / std::max(1.0, std::abs(pf)));
    }
  }
  return {buyers, sellers};
}

inline std::vector<Check> approximation_checks(const std::vector<AuctionCase>& cases) {
  Check dominance{"scaled relaxation dominates scaled integral optimum"},
      ratio{"relaxation over integral optimum within inverse scale"};
  dominance.tolerance = ratio.tolerance = 1e-6;
  for (const auto& c : cases) {
    const double lpr = c.mechanism.vcg.welfare;
    const double ip = brute_force_wdp(c.bids);
    const double delta = c.mechanism.lottery->delta;
    dominance.observe((1 - delta) * ip - (1 - delta) * lpr);
    if (ip > 0)
      ratio.observe(lpr / ip - 1 / (1 - delta));
    else
      ratio.require(lpr <= 1e-9);
  }
  return {dominance, ratio};
}

inline std::vector<Check> decomposition_suite(std::uint64_t seed, long contexts = 300) {
  Timer timer;
  const auto cases = auction_cases(seed, contexts);
  auto out = decomposition_checks(cases);
  for (auto& c : payment_checks(cases)) out.push_back(c);
  for (auto& c : approximation_checks(cases)) out.push_back(c);
  for (auto& c : out) c.seconds = timer.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Truthfulness

/// Reported value as a multiple of the true one; 1 is the identity.
inline const std::vector<double>& deviation_grid() {
  static const std::vector<double> grid = {0.0, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0};
  return grid;
}

struct Battery {
  std::vector<SlotContext> contexts;
  std::vector<BidSet> bids;
};

/// Small instances that trade at truthful bids under the gap-constant scale.
inline Battery truthfulness_battery(std::uint64_t seed, std::size_t size = 24) {
  Battery out;
  CounterRng rng(seed, Stream::kInstances);
  InstanceShape shape = tradeable_shape();
  shape.max_jobs = 4;
  for (int attempt = 0; attempt < 5000 && out.contexts.size() < size; ++attempt) {
    SlotContext ctx = random_context(rng, shape);
    BidSet bids = generate_truthful_bids(ctx);
    if (bids.buys.empty()) continue;
    if (!run_mechanism(bids, slot_auction_options(ctx)).trades()) continue;
    out.contexts.push_back(std::move(ctx));
    out.bids.push_back(std::move(bids));
  }
  return out;
}

struct TruthfulnessReport {
  Check truthful{"no deviation beats truthful bidding"};
  Check rational{"truthful agents have nonnegative utility"};
  long agents = 0;
  long deviations = 0;
};

/// Every agent of every battery instance tries every grid deviation.
/// `fixed_delta`, when set, replaces the gap-constant scale.
inline TruthfulnessReport truthfulness_suite(const Battery& battery, std::optional<double> fixed_delta = {}) {
  Timer timer;
  TruthfulnessReport r;
  r.truthful.tolerance = 1e-7;
  r.rational.tolerance = 1e-9;
  double worst_gain = 0;
  std::string worst_where;
  for (std::size_t n = 0; n < battery.contexts.size(); ++n) {
    AuctionOptions opt = slot_auction_options(battery.contexts[n]);
    if (fixed_delta) {
      opt.rule = DeltaRule::kFixed;
      opt.fixed_delta = *fixed_delta;
    }
    const BidSet& bids = battery.bids[n];
    std::vector<Agent> agents;
    for (std::size_t b = 0; b < bids.buys.size(); ++b) agents.push_back({Agent::Role::kBuyer, b});
    for (CloudIndex i = 0; i < bids.sells.size(); ++i)
      if (bids.sells[i].supply > 0) agents.push_back({Agent::Role::kSeller, i});
    for (const auto& agent : agents) {
      ++r.agents;
      const double truth = expected_utility(bids, agent, 1.0, opt);
      r.rational.observe(-truth);
      for (double mult : deviation_grid()) {
        if (mult == 1.0) continue;
        ++r.deviations;
        const double gain = expected_utility(bids, agent, mult, opt) - truth;
        r.truthful.observe(gain);
        if (gain > worst_gain) {
          worst_gain = gain;
          std::ostringstream os;
          os << "instance " << n << (agent.role == Agent::Role::kBuyer ? " buyer " : " seller ") << agent.index
             << " x" << mult;
          worst_where = os.str();
        }
      }
    }
  }
  std::ostringstream note;
  note << battery.contexts.size() << " instances, " << r.agents << " agents, " << r.deviations << " deviations";
  if (!worst_where.empty()) note << ", largest gain at " << worst_where;
  r.truthful.note = note.str();
  r.truthful.seconds = r.rational.seconds = timer.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Simulation scenarios

/// Federation that keeps up with its arrivals; a huge drop penalty means
/// the drop rule should never fire.
inline TraceSpec no_drop_scenario() {
  TraceSpec s;
  for (int i = 0; i < 3; ++i) {
    TraceSpec::Cloud c;
    c.servers = 20;
    c.vms_per_server = 10;
    c.egress_price = 0.01 * (i + 1);
    c.beta_min = 0.1 + 0.1 * i;
    c.beta_max = 0.3 + 0.1 * i;
    c.beta_step = 0.02;
    s.clouds.push_back(c);
  }
  s.job_types = {{1, 1, 1.0, 1.0}, {2, 2, 2.0, 0.6}};
  s.horizon = 1000;
  s.diurnal_amplitude = 0.5;
  s.V = 1;
  s.gamma = 32;
  s.a_max = 2;
  s.alpha = 1000;
  s.epsilon = 1;
  s.g_max_drop = 1;
  return s;
}

/// One overloaded cloud next to two with idle capacity, one of them cheap.
inline TraceSpec trend_scenario() {
  TraceSpec s;
  const double lo[] = {0.30, 0.10, 0.45}, hi[] = {0.45, 0.20, 0.60}, load[] = {1.0, 0.2, 0.4};
  for (int i = 0; i < 3; ++i) {
    TraceSpec::Cloud c;
    c.servers = 10;
    c.vms_per_server = 10;
    c.egress_price = 0.01;
    c.beta_min = lo[i];
    c.beta_max = hi[i];
    c.beta_step = 0.02;
    c.load_scale = load[i];
    s.clouds.push_back(c);
  }
  s.job_types = {{1, 2, 1.0, 50.0}, {2, 3, 2.0, 12.5}};
  s.horizon = 240;
  s.diurnal_amplitude = 0.3;
  s.V = 1;
  s.gamma = 0;
  s.a_max = 200;
  s.alpha = 10;
  s.epsilon = 1;
  s.g_max_drop = 5;
  return s;
}

/// Per job: started jobs report their wait; jobs still queued at the end
/// report the wait so far.
struct DelayCheck {
  long jobs = 0;
  long violations = 0;
  double worst = -std::numeric_limits<double>::infinity();  ///< delay minus bound
};

inline DelayCheck delay_against_bound(const Metrics& m, const FederationConfig& cfg) {
  DelayCheck d;
  for (const auto& job : m.jobs) {
    if (job.dropped) continue;
    const Slot until = job.start ? *job.start : m.horizon;
    const double delay = static_cast<double>(until - job.arrival);
    const double bound = static_cast<double>(
        delay_bound(m.max_Z(job.owner, job.type), static_cast<double>(m.max_q(job.owner, job.type)),
                    cfg.epsilon(job.owner, job.type)));
    ++d.jobs;
    d.worst = std::max(d.worst, delay - bound);
    if (delay > bound) ++d.violations;
  }
  return d;
}

}  // namespace fedtrade::verify

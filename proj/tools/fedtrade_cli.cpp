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

// fedtrade: simulate, verify, decompose, gen-traces.
// Exit status: 0 ok, 1 bad input or failed verification, 2 runtime fault.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedtrade/auction.hpp"
#include "fedtrade/config_io.hpp"
#include "fedtrade/context_io.hpp"
#include "fedtrade/lp.hpp"
#include "fedtrade/sim.hpp"
#include "fedtrade/traces.hpp"
#include "fedtrade/verify.hpp"

namespace fs = std::filesystem;
using namespace fedtrade;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFault = 2;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config, prices, arrivals, mode = "trade", out = ".", format = "csv";
  std::optional<Slot> horizon;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
  FederationConfig cfg = load_config(a.config);
  TraceSet traces = load_traces(cfg, a.prices, a.arrivals);
  SimOptions opt;
  try {
    opt.mode = parse_mode(a.mode);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  opt.horizon = a.horizon;
  opt.seed = a.seed.value_or(cfg.params.seed);
  const Metrics m = simulate(std::move(cfg), std::move(traces), opt);

  ensure_dir(a.out);
  const fs::path file = fs::path(a.out) / (a.format == "json" ? "metrics.json" : "metrics.csv");
  auto out = open_output(file);
  if (a.format == "json")
    out << metrics_to_json(m).dump(2) << '\n';
  else
    write_metrics_csv(out, m);
  if (!out) throw std::runtime_error("write failed: " + file.string());

  std::cout << "mode " << to_string(m.mode) << ", " << m.horizon << " slots, seed " << opt.seed << '\n';
  for (const auto& s : m.summary)
    std::cout << "cloud " << s.cloud + 1 << ": cost " << s.cost_gross << " gross, " << s.cost_net
              << " net per slot; active " << s.active_ratio << "; drops " << s.drops << "; mean delay "
              << s.avg_delay << '\n';
  if (m.mode == Mode::kTrade)
    std::cout << "auction slots " << m.trade_slots << ", local fallback slots " << m.fallback_slots << '\n';
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << file.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 20260101;
  std::optional<double> fixed_delta;
};

// Contract suite names and their role-named aliases.
std::string canonical_suite(const std::string& s) {
  if (s == "gap") return "theorem1";
  if (s == "no-drop") return "theorem2";
  if (s == "bid-identity") return "claims";
  return s;
}

int run_verify(const VerifyArgs& args) {
  VerifyArgs a = args;
  a.suite = canonical_suite(a.suite);
  std::vector<verify::Check> checks;
  auto add = [&](std::vector<verify::Check> more) {
    for (auto& c : more) {
      std::cout << verify::format(c) << std::endl;
      checks.push_back(std::move(c));
    }
  };
  const bool all = a.suite == "all";
  if (all || a.suite == "theorem1") {
    add(verify::scheduler_gap_suite(a.seed));
    add(verify::split_placement_suite(a.seed));
  }
  if (all || a.suite == "claims") add(verify::bid_identity_suite(a.seed));
  if (all || a.suite == "decomposition") add(verify::decomposition_suite(a.seed));
  if (all || a.suite == "truthfulness") {
    const auto battery = verify::truthfulness_battery(a.seed);
    auto r = verify::truthfulness_suite(battery, a.fixed_delta);
    add({r.truthful, r.rational});
  }
  if (all || a.suite == "theorem2") {
    verify::Timer timer;
    const auto s = gen_synthetic_traces(verify::no_drop_scenario(), a.seed);
    verify::Check cond("no-drop condition holds"), drops("no drops"), delay("delays within bound");
    cond.require(no_drop_condition(s.config).holds);
    for (Mode mode : {Mode::kCooperative, Mode::kNoTrade, Mode::kTrade}) {
      SimOptions opt;
      opt.mode = mode;
      opt.seed = a.seed;
      const Metrics m = simulate(s.config, s.traces, opt);
      if (mode == Mode::kCooperative) drops.observe(static_cast<double>(m.total_drops()));
      if (m.total_drops() == 0) {
        const auto d = verify::delay_against_bound(m, s.config);
        delay.observe(d.worst);
      }
    }
    cond.seconds = drops.seconds = delay.seconds = timer.seconds();
    add({cond, drops, delay});
  }
  if (checks.empty()) throw InputError("unknown suite '" + a.suite + "'");
  long failed = 0;
  for (const auto& c : checks) failed += c.passed() ? 0 : 1;
  std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " checks failed") << '\n';
  return failed == 0 ? kOk : kInvalid;
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string context;
  std::optional<double> fixed_delta;
  std::string lp_dump;
};

json decompose_report(const SlotContext& ctx, const BidSet& bids, const Mechanism& m, const AuctionOptions& opt) {
  json r;
  r["slot"] = ctx.slot;
  r["delta_rule"] = opt.rule == DeltaRule::kFixed ? "fixed" : "gap-constant";
  r["gap_constant"] = opt.gap_constant;
  r["buy_bids"] = json::array();
  for (std::size_t b = 0; b < bids.buys.size(); ++b) {
    const auto& bid = bids.buys[b];
    json e = {{"bid", b + 1},
              {"owner", bid.owner + 1},
              {"kind", bid.kind == JobKind::kLeftover ? "leftover" : "new"},
              {"type", bid.type + 1},
              {"vm_count", bid.vm_count},
              {"price", bid.price},
              {"count", bid.count},
              {"share", m.vcg.share[b]},
              {"vcg_charge", m.vcg.buyer_charge[b]},
              {"realized_charge", realized_charge(m.vcg, b)},
              {"expected_charge", expected_charge(m, b, bids)}};
    if (bid.host) e["host"] = *bid.host + 1;
    r["buy_bids"].push_back(std::move(e));
  }
  r["sell_bids"] = json::array();
  for (CloudIndex i = 0; i < bids.sells.size(); ++i)
    r["sell_bids"].push_back({{"cloud", i + 1},
                              {"ask", bids.sells[i].ask},
                              {"supply", bids.sells[i].supply},
                              {"vms_sold", m.vcg.sold_vms[i]},
                              {"vcg_payment", m.vcg.seller_payment[i]},
                              {"expected_payment", expected_payment(m, i)}});
  r["columns"] = json::array();
  for (std::size_t c = 0; c < m.vcg.wdp.columns.size(); ++c)
    r["columns"].push_back({{"bid", m.vcg.wdp.columns[c].bid + 1},
                            {"cloud", m.vcg.wdp.columns[c].cloud + 1},
                            {"x_star", m.vcg.x[c]}});
  r["welfare"] = m.vcg.welfare;
  r["trades"] = m.trades();
  if (!m.trades()) {
    r["no_trade_reason"] = m.no_trade_reason;
    return r;
  }
  const auto& d = *m.lottery;
  r["delta_requested"] = d.requested_delta;
  r["delta"] = d.delta;
  r["entries"] = json::array();
  for (const auto& e : d.entries) r["entries"].push_back({{"weight", e.weight}, {"x", e.x}});
  double worst_buyer = 0, worst_seller = 0;
  for (std::size_t b = 0; b < bids.buys.size(); ++b)
    worst_buyer = std::max(worst_buyer, std::abs(expected_charge(m, b, bids) - (1 - d.delta) * m.vcg.buyer_charge[b]));
  for (CloudIndex i = 0; i < bids.sells.size(); ++i)
    worst_seller = std::max(worst_seller, std::abs(expected_payment(m, i) - (1 - d.delta) * m.vcg.seller_payment[i]));
  r["residuals"] = {{"weight_sum", d.weight_sum() - 1},
                    {"identity", d.identity_residual(m.vcg.x)},
                    {"master_objective", d.master_objective - 1},
                    {"buyer_expectation", worst_buyer},
                    {"seller_expectation", worst_seller}};
  r["columns_generated"] = d.columns_generated;
  r["master_solves"] = d.master_solves;
  r["exact_pricing_used"] = d.exact_pricing_used;
  return r;
}

int run_decompose(const DecomposeArgs& a) {
  const SlotContext ctx = load_context(a.context);
  const auto& cfg = ctx.cfg();
  bool has_series = false;
  for (const auto& c : cfg.clouds) has_series = has_series || !c.price_series.empty();
  AuctionOptions opt = auction_options(cfg, has_series ? price_range(cfg) : verify::slot_price_range(ctx));
  if (a.fixed_delta) {
    if (!(*a.fixed_delta >= 0 && *a.fixed_delta < 1)) throw InputError("--fixed-delta must lie in [0, 1)");
    opt.rule = DeltaRule::kFixed;
    opt.fixed_delta = *a.fixed_delta;
  }
  const BidSet bids = generate_truthful_bids(ctx, opt.bids);
  const Mechanism m = run_mechanism(bids, opt);
  if (!a.lp_dump.empty()) {
    auto out = open_output(a.lp_dump);
    write_lp_text(out, m.vcg.wdp.model);
  }
  std::cout << decompose_report(ctx, bids, m, opt).dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec, preset, out = ".";
  std::uint64_t seed = 0;
};

int run_gen_traces(const GenArgs& a) {
  TraceSpec spec;
  if (!a.spec.empty()) {
    std::ifstream in(a.spec);
    if (!in) throw ConfigError("cannot open trace spec " + a.spec);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError(a.spec + ": " + e.what());
    }
    spec = trace_spec_from_json(j);
  } else if (a.preset == "no-drop") {
    spec = verify::no_drop_scenario();
  } else if (a.preset == "trend") {
    spec = verify::trend_scenario();
  } else {
    throw InputError("give --spec or --preset no-drop|trend");
  }
  SyntheticTraces s = gen_synthetic_traces(spec, a.seed);
  ensure_dir(a.out);
  FederationConfig cfg = s.config;
  for (auto& c : cfg.clouds) c.price_series.clear();
  cfg.params.seed = a.seed;
  save_config(cfg, (fs::path(a.out) / "config.json").string());
  {
    auto out = open_output(fs::path(a.out) / "prices.csv");
    write_prices(out, s.traces);
  }
  {
    auto out = open_output(fs::path(a.out) / "arrivals.csv");
    write_arrivals(out, s.traces);
  }
  std::cout << "wrote config.json, prices.csv, arrivals.csv (" << s.traces.horizon() << " slots, "
            << cfg.num_clouds() << " clouds) to " << a.out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated IaaS scheduling and VM trading"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a trace-driven simulation");
  simulate_cmd->add_option("--config", sim.config, "Federation config (JSON)")->required();
  simulate_cmd->add_option("--prices", sim.prices, "VM price trace (slot,cloud,beta)")->required();
  simulate_cmd->add_option("--arrivals", sim.arrivals, "Arrival trace (slot,cloud,job_type,count)");
  simulate_cmd->add_option("--mode", sim.mode, "trade, no-trade or cooperative")
      ->check(CLI::IsMember({"trade", "no-trade", "cooperative"}));
  simulate_cmd->add_option("--horizon", sim.horizon, "Slots to simulate (default: trace length)");
  simulate_cmd->add_option("--seed", sim.seed, "Auction seed (default: config params.seed)");
  simulate_cmd->add_option("--out", sim.out, "Output directory");
  simulate_cmd->add_option("--format", sim.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run randomized property suites");
  verify_cmd
      ->add_option("--suite", ver.suite,
                   "decomposition (lottery, payments, approximation), truthfulness, theorem1|gap (scheduler gap, "
                   "split placement), theorem2|no-drop (drops, delay bound), claims|bid-identity, or all")
      ->check(CLI::IsMember({"all", "decomposition", "truthfulness", "theorem1", "gap", "theorem2", "no-drop",
                             "claims", "bid-identity"}));
  verify_cmd->add_option("--seed", ver.seed, "Instance seed");
  verify_cmd->add_option("--fixed-delta", ver.fixed_delta, "Truthfulness suite: fix the lottery scale");

  DecomposeArgs dec;
  auto* decompose_cmd = app.add_subcommand("decompose", "Run the auction on one slot context and print the lottery");
  decompose_cmd->add_option("--slot-context", dec.context, "Slot context (JSON)")->required();
  decompose_cmd->add_option("--fixed-delta", dec.fixed_delta, "Use this lottery scale instead of the gap rule");
  decompose_cmd->add_option("--lp-dump", dec.lp_dump, "Write the WDP relaxation in LP text format");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-traces", "Generate synthetic config and traces");
  gen_cmd->add_option("--spec", gen.spec, "Trace spec (JSON)");
  gen_cmd->add_option("--preset", gen.preset, "Built-in scenario: no-drop or trend")
      ->check(CLI::IsMember({"no-drop", "trend"}));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim);
    if (*verify_cmd) return run_verify(ver);
    if (*decompose_cmd) return run_decompose(dec);
    if (*gen_cmd) return run_gen_traces(gen);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << '\n';
    return kFault;
  }
  return kFault;
}

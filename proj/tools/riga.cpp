// riga: campaign planning, URI generation, simulation runs, experiment
// replays and the gateway probe.
//
// Exit codes: 0 success, 1 I/O error, 2 configuration or usage error,
// 3 invariant violation or unreached anchors when the config requires them.

#include "riga/campaign.hpp"
#include "riga/experiments.hpp"
#include "riga/probe.hpp"
#include "riga/sim_config.hpp"
#include "riga/simulation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace riga;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out.flush()) throw IoError("cannot write " + path);
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Flag, then RIGA_SEED, then whatever the file says.
std::optional<std::uint64_t> seed_override(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("RIGA_SEED")) {
    auto v = parse_u64(env);
    if (!v) throw harness::ConfigError("RIGA_SEED", 0, "not an unsigned 64-bit integer: " + std::string(env));
    return v;
  }
  return std::nullopt;
}

// ---- plan ----------------------------------------------------------------

struct PlanArgs {
  std::optional<std::string> config;
  std::vector<std::string> payloads;
  std::vector<std::uint64_t> counters;
  bool sign = false;
  std::uint64_t start = 0;
  std::uint64_t upper = std::uint64_t{1} << 20;
  std::uint64_t tick_ms = 2000;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_plan(const PlanArgs& a) {
  core::Campaign campaign;
  if (a.config) {
    // The exact campaign a run of this config hands its bots.
    const harness::SimConfig config = harness::load_sim_config(*a.config, seed_override(a.seed));
    if (config.commands.empty()) throw harness::ConfigError(*a.config, 0, "config has no commands to plan");
    campaign = harness::prepare_campaign(config).campaign;
  } else {
    if (a.payloads.empty()) throw harness::ConfigError("plan", 0, "give --payload files or --config");
    const std::uint64_t seed = seed_override(a.seed).value_or(0);
    std::vector<cid::Bytes> payloads;
    for (const auto& path : a.payloads) {
      const std::string text = read_file(path);
      payloads.emplace_back(text.begin(), text.end());
    }
    std::optional<agents::Botmaster> master;
    if (a.sign) {
      master.emplace(store::Identity::from_seed(crypto::derive_seed(seed, "botmaster/node")),
                     crypto::keypair_from_seed(crypto::derive_seed(seed, "botmaster/signing")));
      for (auto& p : payloads) p = master->sign(agents::CommandKind::Direct, p).serialize();
    }
    const core::CounterDomain domain{a.start, a.upper, a.tick_ms};
    domain.validate();
    const auto plan = core::plan_campaign(payloads, a.counters, core::production_field());
    campaign = core::make_campaign(plan, domain, substream_seed(seed, "shuffle"));
    if (master) campaign.trusted_keys.push_back(master->signing_key().public_key);
  }
  write_file(a.out, json_text(core::campaign_to_json(campaign)));
  for (const auto& anchor : campaign.anchors) std::cout << anchor.counter << '\t' << anchor.cid.text() << '\n';
  return kExitOk;
}

// ---- gen -----------------------------------------------------------------

int cmd_gen(const std::string& campaign_path, std::uint64_t from, std::uint64_t to) {
  core::Campaign campaign;
  try {
    campaign = core::campaign_from_json(nlohmann::json::parse(read_file(campaign_path)));
  } catch (const nlohmann::json::exception& e) {
    throw harness::ConfigError(campaign_path, 0, std::string("invalid campaign JSON: ") + e.what());
  }
  if (from > to) throw RangeError("--from " + std::to_string(from) + " is after --to " + std::to_string(to));
  if (!campaign.domain.contains(from) || !campaign.domain.contains(to)) {
    throw RangeError("range outside the campaign domain [" + std::to_string(campaign.domain.start) + ", " +
                     std::to_string(campaign.domain.upper) + "]");
  }
  const core::SkewedPrng prng = campaign.build_prng();
  std::string out;
  for (std::uint64_t c = from;; ++c) {
    out += std::to_string(c) + '\t' + prng.uri_at(c).text() + '\n';
    if (c == to) break;
  }
  std::cout << out;
  return kExitOk;
}

// ---- sim / dump ----------------------------------------------------------

struct SimArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> trace;
  std::optional<std::string> snapshot;
  std::string view = "analyst";
};

int cmd_sim(const SimArgs& a) {
  const harness::SimConfig config = harness::load_sim_config(a.config, seed_override(a.seed));
  const harness::RunResult res = harness::run_simulation(config);
  write_file(a.out, json_text(res.report));
  if (a.trace) write_file(*a.trace, harness::trace_to_jsonl(res.trace));
  if (a.snapshot) write_file(*a.snapshot, json_text(res.snapshot));
  std::cout << "pairs reached\t" << res.pairs_reached << '/' << res.pairs_total << '\n'
            << "polls\t" << res.trace.size() << '\n'
            << "invariant\t" << (res.invariant_ok() ? "ok" : "VIOLATED") << '\n';
  for (const auto& v : res.violations) std::cerr << "violation: " << v << '\n';
  if (!res.invariant_ok()) return kExitInvariant;
  if (config.require_all_reached && !res.all_reached()) {
    std::cerr << "error: " << res.pairs_total - res.pairs_reached << " (bot, anchor) pairs unreached\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_dump(const SimArgs& a) {
  const harness::SimConfig config = harness::load_sim_config(a.config, seed_override(a.seed));
  const harness::RunResult res = harness::run_simulation(config);
  write_file(a.out, json_text(a.view == "omniscient" ? res.omniscient_snapshot : res.snapshot));
  return res.invariant_ok() ? kExitOk : kExitInvariant;
}

// ---- experiment ----------------------------------------------------------

struct ExperimentArgs {
  std::string which;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> samples;
  std::optional<std::string> table;
};

int cmd_experiment(const ExperimentArgs& a) {
  const harness::SimConfig config = harness::load_sim_config(a.config, seed_override(a.seed));
  std::string which = a.which;
  if (which.empty()) {
    if (config.experiment == harness::ExperimentKind::None) {
      throw harness::ConfigError(a.config, 0, "no experiment named on the command line or in the config");
    }
    which = harness::to_string(config.experiment);
  }
  if (which == "availability") {
    const harness::AvailabilityResult res = harness::run_availability(config);
    write_file(a.out, json_text(res.report));
    if (a.samples) write_file(*a.samples, harness::samples_tsv(res.samples_ms));
    std::cout << "n\tmisses\tmean_ms\tstddev_ms\tmedian_ms\n"
              << res.summary.n << '\t' << res.misses << '\t' << res.summary.mean << '\t' << res.summary.stddev
              << '\t' << res.summary.median << '\n';
    return kExitOk;
  }
  const harness::MatrixResult res = harness::run_gateway_matrix(config);
  write_file(a.out, json_text(res.report));
  if (a.table) write_file(*a.table, res.table_tsv);
  std::cout << res.table_tsv;
  return kExitOk;
}

// ---- probe ---------------------------------------------------------------

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct ProbeArgs {
  std::string plan;
  std::string out;
  std::optional<std::uint64_t> timeout_ms;
  std::optional<double> rate_s;
  bool allow_fast_rate = false;
};

int cmd_probe_run(const ProbeArgs& a) {
  probe::ProbePlan plan;
  try {
    plan = probe::plan_from_json(nlohmann::json::parse(read_file(a.plan)));
  } catch (const nlohmann::json::exception& e) {
    throw harness::ConfigError(a.plan, 0, std::string("invalid plan JSON: ") + e.what());
  }
  if (a.timeout_ms) plan.timeout_ms = *a.timeout_ms;
  if (a.rate_s) plan.rate_limit_s = *a.rate_s;
  if (a.allow_fast_rate) plan.allow_fast_rate = true;
  plan.validate();

  std::signal(SIGINT, on_sigint);
  probe::HttpFetcher fetcher;
  probe::SteadyClock clock;
  const probe::ProbeReport report = probe::run_plan(plan, fetcher, clock, [] { return g_interrupted.load(); });
  std::signal(SIGINT, SIG_DFL);

  write_file(a.out, json_text(probe::report_to_json(report)));
  std::cout << probe::report_table_tsv(report);
  if (!report.complete) std::cerr << "interrupted: partial report written to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIGA campaign planner, simulator and gateway probe"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed (overrides RIGA_SEED and the config file)");
  };

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Plan a campaign from payload files or a run config");
  plan->add_option("--config", plan_args.config, "Run config whose commands are planned");
  plan->add_option("--payload", plan_args.payloads, "Payload file, one per anchor")->check(CLI::ExistingFile);
  plan->add_option("--counters", plan_args.counters, "Anchor counters, one per payload")->delimiter(',');
  plan->add_flag("--sign", plan_args.sign, "Wrap payloads in signed command envelopes");
  plan->add_option("--start", plan_args.start, "First counter of the domain");
  plan->add_option("--upper", plan_args.upper, "Last counter of the domain");
  plan->add_option("--tick-ms", plan_args.tick_ms, "Milliseconds per counter");
  plan->add_option("--out", plan_args.out, "Campaign file to write")->required();
  add_seed(plan);

  std::string gen_campaign;
  std::uint64_t gen_from = 0, gen_to = 0;
  auto* gen = app.add_subcommand("gen", "Print counter<TAB>cid for a counter range");
  gen->add_option("--campaign", gen_campaign, "Campaign file")->required()->check(CLI::ExistingFile);
  gen->add_option("--from", gen_from, "First counter")->required();
  gen->add_option("--to", gen_to, "Last counter (inclusive)")->required();

  SimArgs sim_args;
  auto* sim = app.add_subcommand("sim", "Run a full campaign simulation");
  sim->add_option("--config", sim_args.config, "Run config")->required();
  sim->add_option("--out", sim_args.out, "Run report to write")->required();
  sim->add_option("--trace", sim_args.trace, "Poll trace to write (JSON lines)");
  sim->add_option("--snapshot", sim_args.snapshot, "Final store snapshot to write");
  add_seed(sim);

  SimArgs dump_args;
  auto* dump = app.add_subcommand("dump", "Run a simulation and write the final store snapshot");
  dump->add_option("--config", dump_args.config, "Run config")->required();
  dump->add_option("--out", dump_args.out, "Snapshot to write")->required();
  dump->add_option("--view", dump_args.view, "analyst or omniscient")
      ->check(CLI::IsMember({"analyst", "omniscient"}));
  add_seed(dump);

  ExperimentArgs exp_args;
  auto* exp = app.add_subcommand("experiment", "Replay a gateway experiment against simulated profiles");
  exp->add_option("name", exp_args.which, "availability or gateway_matrix (default: from the config)")
      ->check(CLI::IsMember({"availability", "gateway_matrix"}));
  exp->add_option("--config", exp_args.config, "Run config")->required();
  exp->add_option("--out", exp_args.out, "Experiment report to write")->required();
  exp->add_option("--samples", exp_args.samples, "availability: raw samples TSV to write");
  exp->add_option("--table", exp_args.table, "gateway_matrix: table TSV to write");
  add_seed(exp);

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "Measure live gateways");
  probe_cmd->require_subcommand(1);
  auto* probe_run = probe_cmd->add_subcommand("run", "Run a probe plan");
  probe_run->add_option("--plan", probe_args.plan, "Probe plan")->required()->check(CLI::ExistingFile);
  probe_run->add_option("--out", probe_args.out, "Probe report to write")->required();
  probe_run->add_option("--timeout-ms", probe_args.timeout_ms, "Per-request timeout");
  probe_run->add_option("--rate-s", probe_args.rate_s, "Seconds between request starts");
  probe_run->add_flag("--allow-fast-rate", probe_args.allow_fast_rate, "Permit rates below 1 s (local shims only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*plan) {
      plan_args.seed = seed;
      return cmd_plan(plan_args);
    }
    if (*gen) return cmd_gen(gen_campaign, gen_from, gen_to);
    if (*sim) {
      sim_args.seed = seed;
      return cmd_sim(sim_args);
    }
    if (*dump) {
      dump_args.seed = seed;
      return cmd_dump(dump_args);
    }
    if (*exp) {
      exp_args.seed = seed;
      return cmd_experiment(exp_args);
    }
    if (*probe_run) return cmd_probe_run(probe_args);
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const core::RigaError& e) {
    std::cerr << "error: " << core::to_string(e.code()) << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const probe::ProbeError& e) {
    std::cerr << "probe error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RangeError& e) {
    std::cerr << "RangeError: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}

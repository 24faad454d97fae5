#include "doctest.h"

#include "riga/experiments.hpp"
#include "riga/sim_config.hpp"
#include "riga/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace riga;
using namespace riga::harness;

namespace {

const std::string kSource = RIGA_SOURCE_DIR;

std::string fixed_gateways() { return kSource + "/config/gateways_fixed.json"; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("riga_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::size_t error_line(const std::string& text) {
  try {
    parse_sim_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

const char* kCampaign = R"({
  "master_seed": 42,
  "bots": {"count": 20},
  "domain": {"start": 0, "upper": 300, "tick_seconds": 2},
  "timeout_ms": 3000,
  "commands": [
    {"counter": 100, "text": "first", "publish_at_ms": 150000},
    {"counter": 250, "text": "second", "publish_at_ms": 400000}
  ]
})";

// Three fixed-latency gateways under a 600 ms timeout keep a failing poll
// (3 x 600 ms) inside one 2 s tick, so bots stay on the nominal schedule.
std::string on_schedule(std::uint64_t publish_100, std::uint64_t lookback, bool require) {
  return R"({
  "master_seed": 5,
  "bots": {"count": 4, "lookback": )" +
         std::to_string(lookback) + R"(},
  "gateways": ")" + fixed_gateways() +
         R"(",
  "domain": {"start": 0, "upper": 300, "tick_seconds": 2},
  "timeout_ms": 600,
  "require_all_reached": )" +
         (require ? std::string("true") : std::string("false")) + R"(,
  "commands": [
    {"counter": 100, "text": "late", "publish_at_ms": )" +
         std::to_string(publish_100) + R"(},
    {"counter": 250, "text": "on time", "publish_at_ms": 300000}
  ]
})";
}

}  // namespace

TEST_CASE("config errors carry the line of the offending key") {
  CHECK(error_line("{\n  \"master_seed\": 1,\n  \"bogus\": 2\n}") == 3);
  CHECK(error_line("{\n  \"bots\": {\n    \"count\": 0\n  }\n}") == 3);
  CHECK(error_line("{\n  \"commands\": [\n    {\"counter\": 5, \"text\": \"a\"},\n    {\"counter\": 5, \"text\": "
                   "\"b\"}\n  ]\n}") == 4);
  CHECK(error_line("{\n  \"commands\": [\n    {\"counter\": 5, \"kind\": 3, \"text\": \"a\"}\n  ]\n}") == 3);
  CHECK(error_line("{\n  \"master_seed\": 1,\n  \"bots\": {\"count\": 2,}\n}") == 3);
  CHECK(error_line("{\n  \"domain\": {\"start\": 0, \"upper\": 50},\n  \"commands\": [{\"counter\": 51, \"text\": "
                   "\"x\"}]\n}") == 3);
  // A duration too short for the largest anchor is rejected up front.
  CHECK(error_line("{\n  \"commands\": [{\"counter\": 100, \"text\": \"x\"}],\n  \"duration_ms\": 1000\n}") == 3);

  try {
    parse_sim_config("{\"bogus\": 1}", "cfg.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("cfg.json:1: ", 0) == 0);
  }
}

TEST_CASE("seed precedence: an override replaces the file seed") {
  CHECK(parse_sim_config(kCampaign, "c").master_seed == 42);
  CHECK(parse_sim_config(kCampaign, "c", 9).master_seed == 9);
}

TEST_CASE("full campaign: every bot executes both commands, deterministically") {
  const SimConfig config = parse_sim_config(kCampaign, "c");
  CHECK(config.gateways.size() == 13);
  const RunResult a = run_simulation(config);
  const RunResult b = run_simulation(config);
  CHECK(a.pairs_total == 40);
  CHECK(a.pairs_reached == 40);
  CHECK(a.invariant_ok());
  CHECK(a.report.dump() == b.report.dump());
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));

  // Totals reconcile with the trace.
  std::size_t traced = 0;
  for (const auto& t : a.trace) traced += t.command.has_value();
  CHECK(a.report["summary"]["executions"].get<std::size_t>() == traced);
  CHECK(a.report["summary"]["polls"].get<std::size_t>() == a.trace.size());
  for (const auto& anchor : a.report["anchors"]) CHECK(anchor["reached_by"].get<std::size_t>() == 20);

  const RunResult other = run_simulation(parse_sim_config(kCampaign, "c", 43));
  CHECK(other.report.dump() != a.report.dump());
}

TEST_CASE("publication after the anchor tick is missed without look-back") {
  const RunResult r = run_simulation(parse_sim_config(on_schedule(201000, 0, false), "c"));
  CHECK(r.invariant_ok());
  for (const auto& bot : r.report["bots"]) {
    CHECK_FALSE(bot["anchors"][0]["reached"].get<bool>());
    CHECK(bot["anchors"][1]["reached"].get<bool>());
  }
  CHECK(r.pairs_reached == 4);

  // Published one tick earlier, every bot gets it.
  CHECK(run_simulation(parse_sim_config(on_schedule(199000, 0, true), "c")).all_reached());
  // Look-back picks the late publication up.
  const RunResult lb = run_simulation(parse_sim_config(on_schedule(201000, 5, true), "c"));
  CHECK(lb.all_reached());
  CHECK(lb.invariant_ok());
}

TEST_CASE("a single anchor makes the stream constant, so a late command is still found") {
  const std::string text = R"({
  "master_seed": 5,
  "bots": {"count": 2},
  "gateways": ")" + fixed_gateways() + R"(",
  "domain": {"start": 0, "upper": 120, "tick_seconds": 2},
  "timeout_ms": 600,
  "commands": [{"counter": 100, "text": "late", "publish_at_ms": 201000}]
})";
  const RunResult r = run_simulation(parse_sim_config(text, "c"));
  CHECK(r.invariant_ok());
  CHECK(r.all_reached());
  for (const auto& bot : r.report["bots"]) CHECK(bot["anchors"][0]["executed_counter"].get<std::uint64_t>() == 101);
}

TEST_CASE("redirect commands and feedback traces") {
  const std::string text = R"({
  "master_seed": 11,
  "bots": {"count": 3, "seeders": 1},
  "gateways": ")" + fixed_gateways() + R"(",
  "domain": {"start": 0, "upper": 60, "tick_seconds": 2},
  "timeout_ms": 600,
  "feedback": {"enabled": true, "unpin_after": true},
  "commands": [
    {"counter": 20, "kind": "redirect", "text": "via placeholder", "publish_at_ms": 0, "fill_at_ms": 1000},
    {"counter": 50, "text": "direct", "publish_at_ms": 0}
  ]
})";
  const RunResult r = run_simulation(parse_sim_config(text, "c"));
  CHECK(r.all_reached());
  CHECK(r.invariant_ok());
  for (const auto& bot : r.report["bots"]) CHECK(bot["anchors"][0]["via_redirect"].get<bool>());
  const auto& fb = r.report["feedback"];
  CHECK(fb["posted"].get<std::size_t>() == 6);
  CHECK(fb["collected"].get<std::size_t>() == 6);
  CHECK(fb["available_after_collection"].get<std::size_t>() == 0);
}

TEST_CASE("a campaign file that disagrees with the commands is rejected") {
  SimConfig config = parse_sim_config(kCampaign, "c");
  const CampaignSetup setup = prepare_campaign(config);
  const std::string good = write_temp("campaign_good.json", core::campaign_to_json(setup.campaign).dump());
  config.campaign_path = good;
  CHECK_NOTHROW(prepare_campaign(config));
  config.commands[0].text = "changed";
  CHECK_THROWS_AS(prepare_campaign(config), ConfigError);
}

TEST_CASE("calibrated lognormal pipeline mean") {
  for (double target : {800.0, 3647.0, 9000.0}) {
    for (double sigma : {0.4, 0.8, 1.2}) {
      const double m = calibrate_median_ms(target, sigma, 5000);
      CHECK(stats::relative_error(pipeline_mean_ms(gateway::LatencyModel::lognormal(m, sigma), 5000), target) <
            1e-9);
    }
  }
  // Cross-check the closed form by sampling attempts directly.
  const auto model = gateway::LatencyModel::lognormal(2500, 0.8);
  gateway::GatewayProfile g("g", model, 1.0);
  g.reseed(3);
  store::Store store;
  const auto host = store::Identity::from_seed(crypto::derive_seed(1, "host"));
  store.register_node(host.node);
  const cid::Bytes content{1, 2, 3};
  const auto cid = store.put_object(host.node, content);
  double total = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    for (;;) {
      auto r = g.request(store, cid, 5000, 0);
      if (auto* f = std::get_if<gateway::Fetched>(&r)) {
        total += static_cast<double>(f->latency_ms);
        break;
      }
      total += static_cast<double>(std::get<gateway::Dropped>(r).elapsed_ms);
    }
  }
  CHECK(stats::relative_error(total / trials, pipeline_mean_ms(model, 5000)) < 0.01);
}

TEST_CASE("availability experiment: calibrated mean and sample reconciliation") {
  const SimConfig config = load_sim_config(kSource + "/config/availability.json");
  const AvailabilityResult r = run_availability(config);
  REQUIRE(r.samples_ms.size() == 1000);
  CHECK(r.misses == 0);
  CHECK(r.gateways.size() == 4);
  REQUIRE(r.calibration);
  CHECK(std::abs(r.summary.mean - 3647.0) / 3647.0 < 0.10);

  const auto& samples = r.report["samples_ms"];
  REQUIRE(samples.size() == 1000);
  double sum = 0;
  for (const auto& s : samples) sum += s.get<double>();
  const double mean = sum / 1000.0;
  double ss = 0;
  for (const auto& s : samples) ss += (s.get<double>() - mean) * (s.get<double>() - mean);
  CHECK(stats::relative_error(mean, r.report["summary"]["mean"].get<double>()) <= 1e-9);
  CHECK(stats::relative_error(std::sqrt(ss / 999.0), r.report["summary"]["stddev"].get<double>()) <= 1e-9);

  CHECK(run_availability(config).report.dump() == r.report.dump());
}

TEST_CASE("availability picks the fastest gateways by median") {
  const auto fastest = fastest_gateways(gateway::default_gateways(), 4);
  REQUIRE(fastest.size() == 4);
  CHECK(fastest[0].name() == "siderus.io");
  CHECK(fastest[1].name() == "cloudflare-ipfs.com");
  CHECK(fastest[2].name() == "ipfs.io");
  CHECK(fastest[3].name() == "xmine128.tk");
}

TEST_CASE("availability with no objects gives empty statistics") {
  SimConfig config = load_sim_config(kSource + "/config/availability.json");
  config.availability.n = 0;
  const AvailabilityResult r = run_availability(config);
  CHECK(r.samples_ms.empty());
  CHECK(r.summary.n == 0);
  CHECK(r.report["summary"]["mean"].is_null());
  CHECK(samples_tsv(r.samples_ms) == "sample_ms\n");
}

TEST_CASE("gateway matrix: a 6 s gateway under a 3 s timeout drops everything") {
  const std::string gws = write_temp("matrix_gws.json", R"([
    {"name": "slow", "model": {"type": "fixed", "ms": 6000}},
    {"name": "fast", "model": {"type": "fixed", "ms": 100}}
  ])");
  const std::string text = R"({"master_seed": 1, "gateways": ")" + gws +
                           R"(", "gateway_matrix": {"cids": 20, "repeats": 50, "timeouts_ms": [3000]}})";
  const MatrixResult r = run_gateway_matrix(parse_sim_config(text, "c"));
  REQUIRE(r.runs.size() == 1);
  const auto& slow = r.runs[0].gateways[0];
  const auto& fast = r.runs[0].gateways[1];
  CHECK(slow.requests == 1000);
  CHECK(slow.dropped == 1000);
  CHECK(slow.total_time_ms == 3000000);
  CHECK(fast.dropped == 0);
  CHECK(fast.total_time_ms == 100000);
  CHECK(*probe::min_request_gap_ms(fast) >= 2000);
  CHECK(r.table_tsv == "gateway\ttime_s@3000ms\tdropped@3000ms\nslow\t3000.000\t1000\nfast\t100.000\t0\n");
  // Each run uses the probe's own report schema.
  CHECK(probe::report_to_json(probe::report_from_json(r.report["runs"][0])).dump() == r.report["runs"][0].dump());
}

TEST_CASE("summary statistics") {
  const std::vector<double> xs{4, 1, 3, 2};
  const auto s = stats::summarize(xs);
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.p25 == doctest::Approx(1.75));
  CHECK(s.p75 == doctest::Approx(3.25));
  CHECK(stats::normal_cdf(0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975));
}

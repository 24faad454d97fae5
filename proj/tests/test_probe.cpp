#include "riga/probe.hpp"

#include "doctest.h"

using namespace riga;
using namespace riga::probe;

namespace {

struct CountingFetcher final : Fetcher {
  int calls = 0;
  bool get(const std::string&, const cid::CidV0&, std::uint64_t) override {
    ++calls;
    return true;
  }
};

struct SimWorld {
  store::Store store;
  store::Identity owner = store::Identity::from_seed(crypto::derive_seed(9, "owner"));
  std::vector<std::string> cids;
  std::vector<gateway::GatewayProfile> profiles;

  explicit SimWorld(std::size_t n_cids) {
    store.register_node(owner.node);
    for (std::size_t i = 0; i < n_cids; ++i) {
      const std::string body = "article " + std::to_string(i);
      cids.push_back(store.put_object(owner.node, cid::Bytes(body.begin(), body.end())).text());
    }
  }
};

ProbePlan sim_plan(std::vector<std::string> gateways, std::vector<std::string> cids, std::uint32_t repeats) {
  ProbePlan p;
  p.gateways = std::move(gateways);
  p.cids = std::move(cids);
  p.repeats = repeats;
  return p;
}

Errc probe_code(auto&& fn) {
  try {
    fn();
  } catch (const ProbeError& e) {
    return e.code();
  }
  FAIL("no ProbeError raised");
  return Errc::InvalidPlan;
}

}  // namespace

TEST_CASE("plan guardrails") {
  ProbePlan p = sim_plan({"https://ipfs.io"}, {"QmRN6wdp1S2A5EtjW9A3M1vKSBuQQGcgvuhoMUoEz4iiT5"}, 1);
  CHECK(p.rate_limit_s == 2.0);
  CHECK_NOTHROW(p.validate());

  p.rate_limit_s = 0.5;
  CHECK(probe_code([&] { p.validate(); }) == Errc::RateTooLow);
  p.allow_fast_rate = true;
  CHECK_NOTHROW(p.validate());

  p.repeats = 2001;
  CHECK(probe_code([&] { p.validate(); }) == Errc::TooManyRequests);
  p.repeats = 1;
  p.cids.push_back("Qm0abc");
  CHECK(probe_code([&] { p.validate(); }) == Errc::InvalidCid);
  p.cids.pop_back();
  p.gateways.push_back("ftp://x");
  CHECK(probe_code([&] { p.validate(); }) == Errc::InvalidPlan);
}

TEST_CASE("malformed CIDs never reach the network") {
  CountingFetcher fetcher;
  VirtualClock clock;
  CHECK(probe_code([&] { probe_once(fetcher, clock, "https://ipfs.io", "not-a-cid", 3000); }) == Errc::InvalidCid);
  ProbePlan p = sim_plan({"https://ipfs.io"}, {"QmRN6wdp1S2A5EtjW9A3M1vKSBuQQGcgvuhoMUoEz4iiT5", "Qm0abc"}, 1);
  CHECK_THROWS_AS(run_plan(p, fetcher, clock), ProbeError);
  CHECK(fetcher.calls == 0);
}

TEST_CASE("a plan without CIDs gives an empty report") {
  CountingFetcher fetcher;
  VirtualClock clock;
  const ProbeReport r = run_plan(sim_plan({"a", "b"}, {}, 5), fetcher, clock);
  CHECK(r.complete);
  CHECK(r.gateways.empty());
  CHECK(fetcher.calls == 0);
}

TEST_CASE("simulated gateway matrix accounting") {
  SimWorld w(4);
  w.profiles.emplace_back("fast", gateway::LatencyModel::fixed(100));
  w.profiles.emplace_back("slow", gateway::LatencyModel::fixed(6000));
  VirtualClock clock;
  SimFetcher fetcher(w.store, clock);
  fetcher.add("fast", w.profiles[0]);
  fetcher.add("slow", w.profiles[1]);

  const ProbeReport r = run_plan(sim_plan({"fast", "slow"}, w.cids, 5), fetcher, clock);
  REQUIRE(r.gateways.size() == 2);
  CHECK(r.gateways[0].requests == 20);
  CHECK(r.gateways[0].dropped == 0);
  CHECK(r.gateways[0].total_time_ms == 2000);
  CHECK(r.gateways[1].dropped == 20);
  CHECK(r.gateways[1].total_time_ms == 20 * 3000);
  for (const auto& g : r.gateways) {
    CHECK(g.dropped <= g.requests);
    for (std::size_t i = 0; i < g.latencies_ms.size(); ++i) {
      if (g.dropped_flags[i]) CHECK(g.latencies_ms[i] == g.timeout_ms);
    }
    CHECK(*min_request_gap_ms(g) >= 2000);
  }
  // The rate limit also holds across the switch between gateways.
  CHECK(r.gateways[1].timestamps_ms[0] - r.gateways[0].timestamps_ms.back() >= 2000);

  const std::string tsv = report_table_tsv(r);
  CHECK(tsv.find("fast\t3000\t20\t2.000\t0\n") != std::string::npos);
  CHECK(tsv.find("slow\t3000\t20\t60.000\t20\n") != std::string::npos);
}

TEST_CASE("unresolvable content drops at the timeout") {
  SimWorld w(0);
  w.profiles.emplace_back("g", gateway::LatencyModel::fixed(100));
  VirtualClock clock;
  SimFetcher fetcher(w.store, clock);
  fetcher.add("g", w.profiles[0]);
  const auto t0 = clock.now_ms();
  const auto res = probe_once(fetcher, clock, "g", cid::cid_from_value(77).text(), 3000);
  CHECK(std::holds_alternative<Dropped>(res));
  CHECK(clock.now_ms() - t0 == 3000);
}

TEST_CASE("simulated runs are deterministic and round-trip through JSON") {
  auto run = [] {
    SimWorld w(3);
    w.profiles.emplace_back("g", gateway::LatencyModel::lognormal(2500, 0.6));
    w.profiles[0].reseed(4);
    VirtualClock clock;
    SimFetcher fetcher(w.store, clock);
    fetcher.add("g", w.profiles[0]);
    return report_to_json(run_plan(sim_plan({"g"}, w.cids, 10), fetcher, clock)).dump();
  };
  const std::string a = run();
  CHECK(a == run());
  const ProbeReport back = report_from_json(nlohmann::json::parse(a));
  CHECK(report_to_json(back).dump() == a);
}

TEST_CASE("interrupt yields a partial report") {
  SimWorld w(2);
  w.profiles.emplace_back("g", gateway::LatencyModel::fixed(100));
  VirtualClock clock;
  SimFetcher fetcher(w.store, clock);
  fetcher.add("g", w.profiles[0]);
  int polls = 0;
  const ProbeReport r = run_plan(sim_plan({"g"}, w.cids, 5), fetcher, clock, [&] { return ++polls > 3; });
  CHECK_FALSE(r.complete);
  REQUIRE(r.gateways.size() == 1);
  CHECK(r.gateways[0].requests == 3);
}

TEST_CASE("HTTP shim: 20 requests at 100 ms") {
  SimWorld w(4);
  ShimServer shim(w.store, gateway::GatewayProfile("shim", gateway::LatencyModel::fixed(100)));
  shim.start();
  ProbePlan p = sim_plan({shim.base_url()}, w.cids, 5);
  p.rate_limit_s = 0.1;
  p.allow_fast_rate = true;
  HttpFetcher fetcher;
  SteadyClock clock;
  const ProbeReport r = run_plan(p, fetcher, clock);
  shim.stop();
  REQUIRE(r.gateways.size() == 1);
  const auto& g = r.gateways[0];
  CHECK(g.requests == 20);
  CHECK(g.dropped == 0);
  CHECK(g.total_time_ms >= 2000);
  CHECK(g.total_time_ms < 2600);
  CHECK(*min_request_gap_ms(g) >= 100);

  // Unknown content is held by the shim and dropped by the client.
  SimWorld empty(0);
  ShimServer hang(empty.store, gateway::GatewayProfile("hang", gateway::LatencyModel::fixed(100)));
  hang.start();
  const auto t0 = clock.now_ms();
  const auto res = probe_once(fetcher, clock, hang.base_url(), cid::cid_from_value(5).text(), 300);
  CHECK(std::holds_alternative<Dropped>(res));
  CHECK(clock.now_ms() - t0 >= 300);
  hang.stop();
}

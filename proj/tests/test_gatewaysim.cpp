#include "riga/gatewaysim.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

using namespace riga;
using namespace riga::gateway;

namespace {

struct World {
  store::Store store;
  store::Identity owner = store::Identity::from_seed(crypto::derive_seed(3, "owner"));
  CidV0 cid = put();

  CidV0 put() {
    store.register_node(owner.node);
    const Bytes data{1, 2, 3};
    return store.put_object(owner.node, data);
  }
};

}  // namespace

TEST_CASE("a slow gateway drops at exactly the timeout") {
  World w;
  for (double fixed_ms : {5000.0, 6000.0}) {
    GatewayProfile slow("slow", LatencyModel::fixed(fixed_ms));
    for (int i = 0; i < 50; ++i) {
      const auto r = slow.request(w.store, w.cid, 3000, 0);
      REQUIRE(std::holds_alternative<Dropped>(r));
      CHECK(std::get<Dropped>(r).elapsed_ms == 3000);
      CHECK(std::get<Dropped>(r).reason == DropReason::Timeout);
    }
    CHECK(slow.dropped_total() == 50);
  }
  GatewayProfile fast("fast", LatencyModel::fixed(100));
  const auto r = fast.request(w.store, w.cid, 3000, 0);
  REQUIRE(std::holds_alternative<Fetched>(r));
  CHECK(std::get<Fetched>(r).latency_ms == 100);
  CHECK(std::get<Fetched>(r).content == Bytes{1, 2, 3});
}

TEST_CASE("failure modes") {
  World w;
  GatewayProfile down("down", LatencyModel::fixed(100), 0.0);
  auto r = down.request(w.store, w.cid, 3000, 0);
  CHECK(std::get<Dropped>(r).reason == DropReason::Unavailable);
  CHECK(std::get<Dropped>(r).elapsed_ms == 3000);

  GatewayProfile up("up", LatencyModel::fixed(100));
  r = up.request(w.store, cid::cid_from_value(12345), 3000, 0);
  CHECK(std::get<Dropped>(r).reason == DropReason::NotFound);
  CHECK(std::get<Dropped>(r).elapsed_ms == 3000);

  GatewayProfile limited("limited", LatencyModel::fixed(100), 1.0, RateLimiter{2, 1000});
  CHECK(std::holds_alternative<Fetched>(limited.request(w.store, w.cid, 3000, 0)));
  CHECK(std::holds_alternative<Fetched>(limited.request(w.store, w.cid, 3000, 10)));
  r = limited.request(w.store, w.cid, 3000, 20);
  CHECK(std::get<Dropped>(r).reason == DropReason::RateLimited);
  CHECK(std::get<Dropped>(r).elapsed_ms == 100);
  CHECK(std::holds_alternative<Fetched>(limited.request(w.store, w.cid, 3000, 1000)));
}

TEST_CASE("request counters are conserved") {
  World w;
  GatewayProfile g("g", LatencyModel::lognormal(2500, 0.8), 0.9);
  g.reseed(11);
  for (int i = 0; i < 2000; ++i) g.request(w.store, w.cid, 3000, static_cast<std::uint64_t>(i) * 2000);
  CHECK(g.requests_total() == 2000);
  CHECK(g.fetched_total() + g.dropped_total() == g.requests_total());
  CHECK(g.dropped_total() > 0);
  CHECK(g.fetched_total() > 0);
}

TEST_CASE("round-robin fairness over 13 gateways") {
  auto gws = default_gateways();
  REQUIRE(gws.size() == 13);
  for (std::size_t start = 0; start < 13; ++start) {
    RoundRobin rr(gws, start);
    std::map<std::string, int> counts;
    for (int i = 0; i < 1000; ++i) ++counts[next_gateway(rr).name()];
    CHECK(counts.size() == 13);
    for (const auto& [name, n] : counts) CHECK((n == 76 || n == 77));
  }
  std::vector<GatewayProfile> none;
  CHECK_THROWS_AS(RoundRobin{none}, GatewayError);
}

TEST_CASE("lognormal sampling matches its parameters") {
  const LatencyModel m = LatencyModel::lognormal(400, 0.6);
  SplitMix64 gen(99);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = m.sample(gen);
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  CHECK(std::abs(xs[xs.size() / 2] / 400.0 - 1.0) < 0.02);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  CHECK(std::abs(mean / m.mean_ms() - 1.0) < 0.02);
  CHECK(m.mean_ms() == doctest::Approx(400 * std::exp(0.18)));
}

TEST_CASE("reseeding is deterministic and per-gateway") {
  GatewayProfile a("a", LatencyModel::lognormal(400, 0.6));
  GatewayProfile b("b", LatencyModel::lognormal(400, 0.6));
  a.reseed(5);
  b.reseed(5);
  std::vector<std::uint64_t> sa, sb, sa2;
  for (int i = 0; i < 20; ++i) sa.push_back(a.sample_latency_ms());
  for (int i = 0; i < 20; ++i) sb.push_back(b.sample_latency_ms());
  a.reseed(5);
  for (int i = 0; i < 20; ++i) sa2.push_back(a.sample_latency_ms());
  CHECK(sa == sa2);
  CHECK(sa != sb);
}

TEST_CASE("sim clock ordering") {
  SimClock clock;
  std::vector<std::string> order;
  clock.schedule_at(50, "b", [&] { order.push_back("b"); });
  clock.schedule_at(10, "a", [&] { order.push_back("a"); });
  clock.schedule_at(50, "c", [&] {
    order.push_back("c");
    clock.schedule_after(0, "d", [&] { order.push_back("d"); });
  });
  clock.schedule_at(51, "e");
  const auto fired = clock.run_until(50);
  CHECK(order == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(fired.size() == 4);
  CHECK(clock.now() == 50);
  CHECK(clock.pending() == 1);
  CHECK(clock.next_time() == 51);
  CHECK_THROWS_AS(clock.schedule_at(49, "late"), std::logic_error);
  CHECK_THROWS_AS(clock.run_until(10), std::logic_error);
  clock.run_until(100);
  CHECK(clock.pending() == 0);
  CHECK(clock.now() == 100);
}

TEST_CASE("gateway JSON round-trips and rejects bad input") {
  auto gws = default_gateways();
  gws.emplace_back("fixed", LatencyModel::fixed(6000), 0.5, RateLimiter{3, 1000});
  const auto j = gateways_to_json(gws);
  const auto back = gateways_from_json(nlohmann::json::parse(j.dump()));
  CHECK(gateways_to_json(back).dump() == j.dump());

  auto bad = [](const char* text) {
    try {
      gateways_from_json(nlohmann::json::parse(text));
    } catch (const GatewayError& e) {
      return e.code() == Errc::BadConfig;
    }
    return false;
  };
  CHECK(bad("{}"));
  CHECK(bad(R"([{"model": {"type": "fixed", "ms": 1}}])"));
  CHECK(bad(R"([{"name": "x", "model": {"type": "pareto"}}])"));
  CHECK(bad(R"([{"name": "x", "model": {"type": "fixed", "ms": -1}}])"));
  CHECK(bad(R"([{"name": "x", "model": {"type": "lognormal", "median_ms": 5}}])"));
  CHECK(bad(R"([{"name": "x", "model": {"type": "fixed", "ms": 1}, "availability": 2}])"));
}

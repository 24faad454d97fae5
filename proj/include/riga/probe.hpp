#pragma once

// Gateway measurement client. Fetches public content strictly one request
// at a time at a throttled rate and records per-gateway timing and drops.
// The same plan runs against live HTTP gateways, a local HTTP shim in front
// of the simulator, or the simulator directly on a virtual clock; all three
// produce the same report schema.

#include "riga/cidcodec.hpp"
#include "riga/gatewaysim.hpp"
#include "riga/storesim.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace riga::probe {

enum class Errc {
  InvalidPlan,
  InvalidCid,
  RateTooLow,
  TooManyRequests,
};

class ProbeError : public std::runtime_error {
 public:
  ProbeError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct ProbePlan {
  static constexpr double kDefaultRateLimitS = 2.0;
  static constexpr double kMinRateLimitS = 1.0;
  static constexpr std::uint64_t kDefaultMaxRequests = 2000;

  /// Base URLs ("https://ipfs.io"); a missing scheme means https.
  std::vector<std::string> gateways;
  std::vector<std::string> cids;
  std::uint32_t repeats = 1;
  /// Minimum seconds between the starts of consecutive requests.
  double rate_limit_s = kDefaultRateLimitS;
  std::uint64_t timeout_ms = 3000;
  std::uint64_t max_requests = kDefaultMaxRequests;
  /// Required to go below kMinRateLimitS. Only meant for local shims.
  bool allow_fast_rate = false;

  std::uint64_t request_count() const noexcept;
  /// Throws InvalidPlan, InvalidCid, RateTooLow or TooManyRequests.
  void validate() const;
};

nlohmann::ordered_json plan_to_json(const ProbePlan& plan);
/// Throws ProbeError(InvalidPlan) for schema problems; does not validate.
ProbePlan plan_from_json(const nlohmann::json& j);

struct GatewayReport {
  std::string gateway;
  std::uint64_t timeout_ms = 0;
  std::uint64_t requests = 0;
  /// Sum of per-request latencies, dropped ones counted at timeout_ms.
  std::uint64_t total_time_ms = 0;
  std::uint64_t dropped = 0;
  std::vector<std::uint64_t> latencies_ms;
  std::vector<bool> dropped_flags;
  /// Request start times relative to the report start.
  std::vector<std::uint64_t> timestamps_ms;
};

struct ProbeReport {
  bool complete = true;
  ProbePlan plan;
  /// Wall clock (Unix ms) for live runs; virtual time otherwise.
  std::uint64_t started_ms = 0;
  std::uint64_t ended_ms = 0;
  std::vector<GatewayReport> gateways;
};

nlohmann::ordered_json report_to_json(const ProbeReport& report);
ProbeReport report_from_json(const nlohmann::json& j);

/// One row per (gateway, timeout): name, timeout, total seconds, dropped.
std::string report_table_tsv(const ProbeReport& report);

/// Smallest gap between consecutive request starts to one gateway, or
/// nullopt with fewer than two requests.
std::optional<std::uint64_t> min_request_gap_ms(const GatewayReport& g);

struct Clock {
  virtual ~Clock() = default;
  /// Monotonic milliseconds.
  virtual std::uint64_t now_ms() = 0;
  virtual std::uint64_t wall_ms() = 0;
  virtual void sleep_until(std::uint64_t t_ms) = 0;
};

struct SteadyClock final : Clock {
  std::uint64_t now_ms() override;
  std::uint64_t wall_ms() override;
  void sleep_until(std::uint64_t t_ms) override;
};

struct VirtualClock final : Clock {
  std::uint64_t t = 0;
  std::uint64_t now_ms() override { return t; }
  std::uint64_t wall_ms() override { return t; }
  void sleep_until(std::uint64_t t_ms) override {
    if (t_ms > t) t = t_ms;
  }
};

struct Fetcher {
  virtual ~Fetcher() = default;
  /// Blocking GET of {gateway}/ipfs/{cid}. True on HTTP success with a
  /// nonempty body. Time spent is observed through the clock.
  virtual bool get(const std::string& gateway, const cid::CidV0& cid, std::uint64_t timeout_ms) = 0;
};

/// Live HTTP(S) client. Follows redirects; sends no custom headers.
class HttpFetcher final : public Fetcher {
 public:
  bool get(const std::string& gateway, const cid::CidV0& cid, std::uint64_t timeout_ms) override;
};

/// Serves plan requests from simulated gateway profiles, advancing a
/// virtual clock by each request's simulated duration.
class SimFetcher final : public Fetcher {
 public:
  SimFetcher(const store::Store& store, VirtualClock& clock) : store_(store), clock_(clock) {}
  /// The profile answers for plan gateway `url`; not owned.
  void add(const std::string& url, gateway::GatewayProfile& profile) { profiles_[url] = &profile; }
  bool get(const std::string& gateway, const cid::CidV0& cid, std::uint64_t timeout_ms) override;

 private:
  const store::Store& store_;
  VirtualClock& clock_;
  std::map<std::string, gateway::GatewayProfile*> profiles_;
};

struct Dropped {};
using ProbeResult = std::variant<std::uint64_t, Dropped>;

/// Rejects malformed CID text (ProbeError InvalidCid) before any request.
/// Every other failure, and anything slower than the timeout, is Dropped.
ProbeResult probe_once(Fetcher& fetcher, Clock& clock, const std::string& gateway, const std::string& cid_text,
                       std::uint64_t timeout_ms);

using StopFlag = std::function<bool()>;

/// Runs the plan sequentially: gateways in order, each CID `repeats` times
/// in a row. Validates first. When `stop` turns true the report so far is
/// returned with complete = false.
ProbeReport run_plan(const ProbePlan& plan, Fetcher& fetcher, Clock& clock, const StopFlag& stop = {});

/// Local HTTP front end to the simulator for end-to-end probe tests. Each
/// GET /ipfs/{cid} is answered through a gateway profile after sleeping its
/// sampled latency. Listens on 127.0.0.1 only.
class ShimServer {
 public:
  ShimServer(const store::Store& store, gateway::GatewayProfile profile);
  ~ShimServer();
  ShimServer(const ShimServer&) = delete;
  ShimServer& operator=(const ShimServer&) = delete;

  /// Binds an ephemeral port and starts serving in the background.
  void start();
  void stop();
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace riga::probe

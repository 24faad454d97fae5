#pragma once

// Simulated HTTP gateways in front of the store, plus the discrete-event
// clock that drives every simulated actor.

#include "riga/cidcodec.hpp"
#include "riga/rng.hpp"
#include "riga/storesim.hpp"

#include "json.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace riga::gateway {

using cid::Bytes;
using cid::CidV0;

enum class Errc {
  EmptyGatewayList,
  BadConfig,
};

class GatewayError : public std::runtime_error {
 public:
  GatewayError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct LatencyModel {
  enum class Kind { Lognormal, Fixed };

  Kind kind = Kind::Fixed;
  /// Median for lognormal; the constant for fixed.
  double median_ms = 100.0;
  double sigma = 0.0;

  static LatencyModel lognormal(double median_ms, double sigma);
  static LatencyModel fixed(double ms);

  /// Untruncated mean: median * exp(sigma^2 / 2) for lognormal.
  double mean_ms() const;
  double sample(SplitMix64& gen) const;
};

/// Optional countermeasure: at most `max_requests` per sliding window.
struct RateLimiter {
  std::uint32_t max_requests;
  std::uint64_t window_ms;
};

enum class DropReason { Timeout, Unavailable, NotFound, RateLimited };

const char* to_string(DropReason reason) noexcept;

struct Fetched {
  Bytes content;
  std::uint64_t latency_ms;
};

struct Dropped {
  std::uint64_t elapsed_ms;
  DropReason reason;
};

using RequestResult = std::variant<Fetched, Dropped>;

class SimClock;

class GatewayProfile {
 public:
  GatewayProfile(std::string name, LatencyModel model, double availability = 1.0,
                 std::optional<RateLimiter> limiter = std::nullopt);

  /// Seeds this gateway's private substream from the master seed and its
  /// name, so adding a gateway never perturbs the others.
  void reseed(std::uint64_t master_seed);

  const std::string& name() const noexcept { return name_; }
  const LatencyModel& model() const noexcept { return model_; }
  double availability() const noexcept { return availability_; }
  const std::optional<RateLimiter>& limiter() const noexcept { return limiter_; }

  std::uint64_t requests_total() const noexcept { return requests_total_; }
  std::uint64_t dropped_total() const noexcept { return dropped_total_; }
  std::uint64_t fetched_total() const noexcept { return fetched_total_; }

  /// Draws one latency (whole milliseconds, at least 1).
  std::uint64_t sample_latency_ms();

  /// Blocking GET semantics: a dropped request costs the full timeout
  /// (rate-limited ones are refused after the sampled latency instead).
  RequestResult request(const store::Store& store, const CidV0& cid, std::uint64_t timeout_ms,
                        std::uint64_t now_ms);

 private:
  std::string name_;
  LatencyModel model_;
  double availability_;
  std::optional<RateLimiter> limiter_;
  SplitMix64 gen_{0};
  std::deque<std::uint64_t> recent_;
  std::uint64_t requests_total_ = 0;
  std::uint64_t dropped_total_ = 0;
  std::uint64_t fetched_total_ = 0;
};

RequestResult request(GatewayProfile& gw, const store::Store& store, const CidV0& cid,
                      std::uint64_t timeout_ms, const SimClock& clock);

class RoundRobin {
 public:
  /// Throws EmptyGatewayList.
  explicit RoundRobin(std::span<GatewayProfile> gateways, std::size_t start_cursor = 0);

  GatewayProfile& next();
  std::size_t cursor() const noexcept { return cursor_; }
  std::size_t size() const noexcept { return gateways_.size(); }

 private:
  std::span<GatewayProfile> gateways_;
  std::size_t cursor_;
};

inline GatewayProfile& next_gateway(RoundRobin& rr) { return rr.next(); }

struct FiredEvent {
  std::uint64_t time_ms;
  std::uint64_t seq;
  std::string label;

  friend bool operator==(const FiredEvent&, const FiredEvent&) = default;
};

/// Discrete-event clock in integer milliseconds. Events at equal times
/// fire in insertion order.
class SimClock {
 public:
  using Action = std::function<void()>;

  std::uint64_t now() const noexcept { return now_; }

  /// Throws std::logic_error for times in the past.
  std::uint64_t schedule_at(std::uint64_t time_ms, std::string label, Action action = {});
  std::uint64_t schedule_after(std::uint64_t delay_ms, std::string label, Action action = {}) {
    return schedule_at(now_ + delay_ms, std::move(label), std::move(action));
  }

  /// Fires every event with time <= t_ms (including ones scheduled while
  /// running), then sets now to t_ms. Throws std::logic_error if t_ms < now.
  std::vector<FiredEvent> run_until(std::uint64_t t_ms);

  std::size_t pending() const noexcept { return queue_.size(); }
  std::optional<std::uint64_t> next_time() const;

 private:
  struct Event {
    std::uint64_t time_ms;
    std::uint64_t seq;
    std::string label;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.time_ms != b.time_ms ? a.time_ms > b.time_ms : a.seq > b.seq;
    }
  };

  std::uint64_t now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

/// Profiles for 13 public gateways. Medians are measured per-request means
/// under a 5 s timeout, used as lognormal medians with sigma 0.6.
std::vector<GatewayProfile> default_gateways();

/// Parses [{ "name", "model": {"type": "lognormal", "median_ms", "sigma"} |
/// {"type": "fixed", "ms"}, "availability", "rate_limit"?: {"max_requests",
/// "window_ms"} }]. Throws GatewayError(BadConfig).
std::vector<GatewayProfile> gateways_from_json(const nlohmann::json& j);
nlohmann::ordered_json gateways_to_json(std::span<const GatewayProfile> gateways);

}  // namespace riga::gateway

#include "riga/gatewaysim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace riga::gateway {

namespace {

[[noreturn]] void bad(const std::string& what) { throw GatewayError(Errc::BadConfig, "gateway config: " + what); }

double number_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) bad(where + ": \"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

}  // namespace

LatencyModel LatencyModel::lognormal(double median_ms, double sigma) {
  if (!(median_ms > 0)) throw GatewayError(Errc::BadConfig, "median_ms must be positive");
  if (!(sigma >= 0)) throw GatewayError(Errc::BadConfig, "sigma must be non-negative");
  return LatencyModel{Kind::Lognormal, median_ms, sigma};
}

LatencyModel LatencyModel::fixed(double ms) {
  if (!(ms > 0)) throw GatewayError(Errc::BadConfig, "fixed latency must be positive");
  return LatencyModel{Kind::Fixed, ms, 0.0};
}

double LatencyModel::mean_ms() const {
  return kind == Kind::Fixed ? median_ms : median_ms * std::exp(sigma * sigma / 2.0);
}

double LatencyModel::sample(SplitMix64& gen) const {
  if (kind == Kind::Fixed) return median_ms;
  // Box-Muller; one normal per pair of uniforms keeps the stream simple.
  const double u1 = 1.0 - uniform_unit(gen);
  const double u2 = uniform_unit(gen);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return median_ms * std::exp(sigma * z);
}

const char* to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::Timeout: return "timeout";
    case DropReason::Unavailable: return "unavailable";
    case DropReason::NotFound: return "not_found";
    case DropReason::RateLimited: return "rate_limited";
  }
  return "unknown";
}

GatewayProfile::GatewayProfile(std::string name, LatencyModel model, double availability,
                               std::optional<RateLimiter> limiter)
    : name_(std::move(name)), model_(model), availability_(availability), limiter_(limiter) {
  if (!(model_.median_ms > 0)) throw GatewayError(Errc::BadConfig, name_ + ": median_ms must be positive");
  if (!(availability_ >= 0.0 && availability_ <= 1.0)) {
    throw GatewayError(Errc::BadConfig, name_ + ": availability must be in [0, 1]");
  }
  if (limiter_ && (limiter_->max_requests == 0 || limiter_->window_ms == 0)) {
    throw GatewayError(Errc::BadConfig, name_ + ": rate limit needs positive max_requests and window_ms");
  }
  reseed(0);
}

void GatewayProfile::reseed(std::uint64_t master_seed) {
  gen_ = SplitMix64(substream_seed(master_seed, "gateway/" + name_));
  recent_.clear();
}

std::uint64_t GatewayProfile::sample_latency_ms() {
  const double ms = model_.sample(gen_);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(ms)));
}

RequestResult GatewayProfile::request(const store::Store& store, const CidV0& cid, std::uint64_t timeout_ms,
                                      std::uint64_t now_ms) {
  if (timeout_ms == 0) throw std::invalid_argument("timeout must be positive");
  // Both draws happen on every request so the stream stays aligned.
  const std::uint64_t latency = sample_latency_ms();
  const bool up = uniform_unit(gen_) < availability_;
  ++requests_total_;

  auto drop = [&](DropReason reason, std::uint64_t elapsed) -> RequestResult {
    ++dropped_total_;
    return Dropped{elapsed, reason};
  };

  if (limiter_) {
    while (!recent_.empty() && recent_.front() + limiter_->window_ms <= now_ms) recent_.pop_front();
    if (recent_.size() >= limiter_->max_requests) {
      return drop(DropReason::RateLimited, std::min(latency, timeout_ms));
    }
    recent_.push_back(now_ms);
  }
  if (!up) return drop(DropReason::Unavailable, timeout_ms);
  if (latency > timeout_ms) return drop(DropReason::Timeout, timeout_ms);
  // Looked up at issue time; unresolvable content hangs until the timeout.
  auto content = store.try_get(cid);
  if (!content) return drop(DropReason::NotFound, timeout_ms);
  ++fetched_total_;
  return Fetched{std::move(*content), latency};
}

RequestResult request(GatewayProfile& gw, const store::Store& store, const CidV0& cid, std::uint64_t timeout_ms,
                      const SimClock& clock) {
  return gw.request(store, cid, timeout_ms, clock.now());
}

RoundRobin::RoundRobin(std::span<GatewayProfile> gateways, std::size_t start_cursor) : gateways_(gateways) {
  if (gateways_.empty()) throw GatewayError(Errc::EmptyGatewayList, "round-robin needs at least one gateway");
  cursor_ = start_cursor % gateways_.size();
}

GatewayProfile& RoundRobin::next() {
  GatewayProfile& gw = gateways_[cursor_];
  cursor_ = (cursor_ + 1) % gateways_.size();
  return gw;
}

std::uint64_t SimClock::schedule_at(std::uint64_t time_ms, std::string label, Action action) {
  if (time_ms < now_) {
    throw std::logic_error("cannot schedule \"" + label + "\" at " + std::to_string(time_ms) +
                           " ms, clock is at " + std::to_string(now_) + " ms");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(Event{time_ms, seq, std::move(label), std::move(action)});
  return seq;
}

std::vector<FiredEvent> SimClock::run_until(std::uint64_t t_ms) {
  if (t_ms < now_) throw std::logic_error("run_until target is in the past");
  std::vector<FiredEvent> fired;
  while (!queue_.empty() && queue_.top().time_ms <= t_ms) {
    // priority_queue::top is const; the event is copied out before popping.
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time_ms;
    fired.push_back(FiredEvent{ev.time_ms, ev.seq, ev.label});
    if (ev.action) ev.action();
  }
  now_ = t_ms;
  return fired;
}

std::optional<std::uint64_t> SimClock::next_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().time_ms;
}

std::vector<GatewayProfile> default_gateways() {
  struct Row {
    const char* name;
    double mean_ms;
  };
  static constexpr Row kRows[] = {
      {"ipfs.io", 373.492},
      {"gateway.ipfs.io", 391.009},
      {"ipfs.infura.io", 854.953},
      {"xmine128.tk", 381.595},
      {"ipfs.jes.xxx", 438.049},
      {"siderus.io", 280.261},
      {"www.eternum.io", 594.157},
      {"hardbin.com", 457.364},
      {"ipfs.wa.hle.rs", 1234.263},
      {"ipfs.renehsz.com", 1482.931},
      {"cloudflare-ipfs.com", 285.893},
      {"ipns.co", 1848.695},
      {"gateway.swedneck.xyz", 5952.236},
  };
  std::vector<GatewayProfile> out;
  out.reserve(std::size(kRows));
  for (const auto& r : kRows) out.emplace_back(r.name, LatencyModel::lognormal(r.mean_ms, 0.6), 1.0);
  return out;
}

std::vector<GatewayProfile> gateways_from_json(const nlohmann::json& j) {
  if (!j.is_array()) bad("expected an array of gateways");
  std::vector<GatewayProfile> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& g = j[i];
    const std::string where = "gateway #" + std::to_string(i);
    if (!g.is_object() || !g.contains("name") || !g["name"].is_string()) bad(where + ": missing \"name\"");
    if (!g.contains("model") || !g["model"].is_object()) bad(where + ": missing \"model\"");
    const auto& m = g["model"];
    const std::string type = m.value("type", "");
    if (type != "lognormal" && type != "fixed") bad(where + ": model type must be \"lognormal\" or \"fixed\"");
    const double median = number_field(m, type == "fixed" ? "ms" : "median_ms", where);
    const double sigma = type == "fixed" ? 0.0 : number_field(m, "sigma", where);
    LatencyModel model;
    try {
      model = type == "fixed" ? LatencyModel::fixed(median) : LatencyModel::lognormal(median, sigma);
    } catch (const GatewayError& e) {
      bad(where + ": " + e.what());
    }
    const double availability = g.contains("availability") ? number_field(g, "availability", where) : 1.0;
    std::optional<RateLimiter> limiter;
    if (g.contains("rate_limit") && !g["rate_limit"].is_null()) {
      const auto& rl = g["rate_limit"];
      limiter = RateLimiter{static_cast<std::uint32_t>(number_field(rl, "max_requests", where)),
                            static_cast<std::uint64_t>(number_field(rl, "window_ms", where))};
    }
    try {
      out.emplace_back(g["name"].get<std::string>(), model, availability, limiter);
    } catch (const GatewayError& e) {
      bad(where + ": " + e.what());
    }
  }
  return out;
}

nlohmann::ordered_json gateways_to_json(std::span<const GatewayProfile> gateways) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : gateways) {
    nlohmann::ordered_json o;
    o["name"] = g.name();
    if (g.model().kind == LatencyModel::Kind::Lognormal) {
      o["model"] = {{"type", "lognormal"}, {"median_ms", g.model().median_ms}, {"sigma", g.model().sigma}};
    } else {
      o["model"] = {{"type", "fixed"}, {"ms", g.model().median_ms}};
    }
    o["availability"] = g.availability();
    if (g.limiter()) {
      o["rate_limit"] = {{"max_requests", g.limiter()->max_requests}, {"window_ms", g.limiter()->window_ms}};
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace riga::gateway

#include "riga/probe.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace riga::probe {

namespace {

[[noreturn]] void bad_plan(const std::string& what) { throw ProbeError(Errc::InvalidPlan, "probe plan: " + what); }

std::uint64_t rate_ms(const ProbePlan& plan) {
  return static_cast<std::uint64_t>(std::ceil(plan.rate_limit_s * 1000.0));
}

bool well_formed_url(const std::string& url) {
  if (url.empty() || url.find_first_of(" \t\r\n") != std::string::npos) return false;
  const auto scheme_end = url.find("://");
  if (scheme_end != std::string::npos) {
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") return false;
    if (scheme_end + 3 >= url.size()) return false;
  }
  return true;
}

template <class T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_plan(std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

std::uint64_t ProbePlan::request_count() const noexcept {
  return static_cast<std::uint64_t>(gateways.size()) * cids.size() * repeats;
}

void ProbePlan::validate() const {
  if (repeats == 0) bad_plan("repeats must be at least 1");
  if (timeout_ms == 0) bad_plan("timeout_ms must be positive");
  if (!(rate_limit_s >= 0.0) || !std::isfinite(rate_limit_s)) bad_plan("rate_limit must be a non-negative number");
  if (rate_limit_s < kMinRateLimitS && !allow_fast_rate) {
    throw ProbeError(Errc::RateTooLow, "probe plan: rate limit below 1 s needs the explicit override");
  }
  if (request_count() > max_requests) {
    throw ProbeError(Errc::TooManyRequests, "probe plan: " + std::to_string(request_count()) +
                                                " requests exceed the cap of " + std::to_string(max_requests));
  }
  for (const auto& g : gateways) {
    if (!well_formed_url(g)) bad_plan("malformed gateway URL \"" + g + "\"");
  }
  for (const auto& c : cids) {
    try {
      cid::CidV0::parse(c);
    } catch (const cid::CodecError& e) {
      throw ProbeError(Errc::InvalidCid, "probe plan: bad CID \"" + c + "\": " + e.what());
    }
  }
}

nlohmann::ordered_json plan_to_json(const ProbePlan& plan) {
  nlohmann::ordered_json j;
  j["gateways"] = plan.gateways;
  j["cids"] = plan.cids;
  j["repeats"] = plan.repeats;
  j["rate_limit_s"] = plan.rate_limit_s;
  j["timeout_ms"] = plan.timeout_ms;
  j["max_requests"] = plan.max_requests;
  if (plan.allow_fast_rate) j["allow_fast_rate"] = true;
  return j;
}

ProbePlan plan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_plan("top level must be an object");
  ProbePlan p;
  p.gateways = field(j, "gateways", p.gateways);
  p.cids = field(j, "cids", p.cids);
  p.repeats = field(j, "repeats", p.repeats);
  p.rate_limit_s = field(j, "rate_limit_s", p.rate_limit_s);
  p.timeout_ms = field(j, "timeout_ms", p.timeout_ms);
  p.max_requests = field(j, "max_requests", p.max_requests);
  p.allow_fast_rate = field(j, "allow_fast_rate", p.allow_fast_rate);
  return p;
}

nlohmann::ordered_json report_to_json(const ProbeReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "riga-probe-report-v1";
  j["complete"] = report.complete;
  j["started_ms"] = report.started_ms;
  j["ended_ms"] = report.ended_ms;
  j["plan"] = plan_to_json(report.plan);
  auto gws = nlohmann::ordered_json::array();
  for (const auto& g : report.gateways) {
    nlohmann::ordered_json o;
    o["gateway"] = g.gateway;
    o["timeout_ms"] = g.timeout_ms;
    o["requests"] = g.requests;
    o["total_time_ms"] = g.total_time_ms;
    o["dropped"] = g.dropped;
    o["latencies_ms"] = g.latencies_ms;
    o["dropped_flags"] = g.dropped_flags;
    o["timestamps_ms"] = g.timestamps_ms;
    gws.push_back(std::move(o));
  }
  j["gateways"] = std::move(gws);
  return j;
}

ProbeReport report_from_json(const nlohmann::json& j) {
  ProbeReport r;
  r.complete = j.at("complete").get<bool>();
  r.started_ms = j.at("started_ms").get<std::uint64_t>();
  r.ended_ms = j.at("ended_ms").get<std::uint64_t>();
  r.plan = plan_from_json(j.at("plan"));
  for (const auto& o : j.at("gateways")) {
    GatewayReport g;
    g.gateway = o.at("gateway").get<std::string>();
    g.timeout_ms = o.at("timeout_ms").get<std::uint64_t>();
    g.requests = o.at("requests").get<std::uint64_t>();
    g.total_time_ms = o.at("total_time_ms").get<std::uint64_t>();
    g.dropped = o.at("dropped").get<std::uint64_t>();
    g.latencies_ms = o.at("latencies_ms").get<std::vector<std::uint64_t>>();
    g.dropped_flags = o.at("dropped_flags").get<std::vector<bool>>();
    g.timestamps_ms = o.at("timestamps_ms").get<std::vector<std::uint64_t>>();
    r.gateways.push_back(std::move(g));
  }
  return r;
}

std::string report_table_tsv(const ProbeReport& report) {
  std::ostringstream out;
  out << "gateway\ttimeout_ms\trequests\ttime_s\tdropped\n";
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const auto& g : report.gateways) {
    out << g.gateway << '\t' << g.timeout_ms << '\t' << g.requests << '\t'
        << static_cast<double>(g.total_time_ms) / 1000.0 << '\t' << g.dropped << '\n';
  }
  return out.str();
}

std::optional<std::uint64_t> min_request_gap_ms(const GatewayReport& g) {
  if (g.timestamps_ms.size() < 2) return std::nullopt;
  std::uint64_t gap = UINT64_MAX;
  for (std::size_t i = 1; i < g.timestamps_ms.size(); ++i) {
    gap = std::min(gap, g.timestamps_ms[i] - g.timestamps_ms[i - 1]);
  }
  return gap;
}

std::uint64_t SteadyClock::now_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count());
}

std::uint64_t SteadyClock::wall_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

void SteadyClock::sleep_until(std::uint64_t t_ms) {
  using namespace std::chrono;
  std::this_thread::sleep_until(steady_clock::time_point(milliseconds(t_ms)));
}

bool SimFetcher::get(const std::string& gateway, const cid::CidV0& cid, std::uint64_t timeout_ms) {
  auto it = profiles_.find(gateway);
  if (it == profiles_.end()) {
    // Nobody answers: the request hangs until the timeout.
    clock_.t += timeout_ms;
    return false;
  }
  auto result = it->second->request(store_, cid, timeout_ms, clock_.t);
  if (auto* f = std::get_if<gateway::Fetched>(&result)) {
    clock_.t += f->latency_ms;
    return !f->content.empty();
  }
  clock_.t += std::get<gateway::Dropped>(result).elapsed_ms;
  return false;
}

ProbeResult probe_once(Fetcher& fetcher, Clock& clock, const std::string& gateway, const std::string& cid_text,
                       std::uint64_t timeout_ms) {
  cid::CidV0 cid = [&] {
    try {
      return cid::CidV0::parse(cid_text);
    } catch (const cid::CodecError& e) {
      throw ProbeError(Errc::InvalidCid, "bad CID \"" + cid_text + "\": " + e.what());
    }
  }();
  const std::uint64_t t0 = clock.now_ms();
  bool ok = false;
  try {
    ok = fetcher.get(gateway, cid, timeout_ms);
  } catch (const std::exception&) {
    ok = false;
  }
  const std::uint64_t elapsed = clock.now_ms() - t0;
  if (!ok || elapsed > timeout_ms) return Dropped{};
  return elapsed;
}

ProbeReport run_plan(const ProbePlan& plan, Fetcher& fetcher, Clock& clock, const StopFlag& stop) {
  plan.validate();
  ProbeReport report;
  report.plan = plan;
  report.started_ms = clock.wall_ms();
  const std::uint64_t start = clock.now_ms();
  const std::uint64_t gap = rate_ms(plan);
  std::optional<std::uint64_t> next_allowed;

  if (!plan.cids.empty()) {
    for (const auto& gw : plan.gateways) {
      GatewayReport& g = report.gateways.emplace_back();
      g.gateway = gw;
      g.timeout_ms = plan.timeout_ms;
      for (const auto& c : plan.cids) {
        for (std::uint32_t r = 0; r < plan.repeats; ++r) {
          if (stop && stop()) {
            report.complete = false;
            report.ended_ms = clock.wall_ms();
            return report;
          }
          if (next_allowed) clock.sleep_until(*next_allowed);
          const std::uint64_t t0 = clock.now_ms();
          next_allowed = t0 + gap;
          const ProbeResult res = probe_once(fetcher, clock, gw, c, plan.timeout_ms);
          const bool dropped = std::holds_alternative<Dropped>(res);
          const std::uint64_t latency = dropped ? plan.timeout_ms : std::get<std::uint64_t>(res);
          ++g.requests;
          g.dropped += dropped ? 1 : 0;
          g.total_time_ms += latency;
          g.latencies_ms.push_back(latency);
          g.dropped_flags.push_back(dropped);
          g.timestamps_ms.push_back(t0 - start);
        }
      }
    }
  }
  report.ended_ms = clock.wall_ms();
  return report;
}

}  // namespace riga::probe

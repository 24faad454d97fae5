#include "riga/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace riga::harness {

using cid::Bytes;
using cid::CidV0;

namespace {

Bytes random_object(SplitMix64& gen, std::size_t size, std::uint64_t tag) {
  Bytes out(size);
  for (auto& b : out) b = static_cast<std::uint8_t>(gen());
  // The tag keeps objects distinct even when size is tiny.
  for (std::size_t i = 0; i < std::min<std::size_t>(8, size); ++i) out[i] = static_cast<std::uint8_t>(tag >> (8 * i));
  return out;
}

}  // namespace

double pipeline_mean_ms(const gateway::LatencyModel& m, double timeout_ms) {
  if (m.kind == gateway::LatencyModel::Kind::Fixed) {
    if (m.median_ms > timeout_ms) return INFINITY;
    return m.median_ms;
  }
  const double mu = std::log(m.median_ms);
  const double s = m.sigma;
  const double a = (std::log(timeout_ms) - mu) / s;
  const double q = stats::normal_cdf(a);
  if (q <= 0) return INFINITY;
  const double truncated_mean = std::exp(mu + s * s / 2.0) * stats::normal_cdf(a - s) / q;
  return (1.0 - q) / q * timeout_ms + truncated_mean;
}

double calibrate_median_ms(double target_mean_ms, double sigma, double timeout_ms) {
  double lo = 1e-3, hi = 1e7;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (pipeline_mean_ms(gateway::LatencyModel::lognormal(mid, sigma), timeout_ms) < target_mean_ms) lo = mid;
    else hi = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<gateway::GatewayProfile> fastest_gateways(std::span<const gateway::GatewayProfile> all, std::size_t n) {
  std::vector<gateway::GatewayProfile> sorted(all.begin(), all.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.model().median_ms != b.model().median_ms) return a.model().median_ms < b.model().median_ms;
    return a.name() < b.name();
  });
  if (sorted.size() > n) sorted.erase(sorted.begin() + static_cast<std::ptrdiff_t>(n), sorted.end());
  return sorted;
}

AvailabilityResult run_availability(const SimConfig& config) {
  const AvailabilitySpec& opts = config.availability;
  const std::uint64_t seed = config.master_seed;
  AvailabilityResult res;

  std::vector<gateway::GatewayProfile> gws = fastest_gateways(config.gateways, opts.fastest);
  if (opts.calibrate_mean_ms) {
    const double tau = static_cast<double>(opts.timeout_ms);
    const double median = calibrate_median_ms(*opts.calibrate_mean_ms, opts.sigma, tau);
    const auto model = gateway::LatencyModel::lognormal(median, opts.sigma);
    std::vector<gateway::GatewayProfile> calibrated;
    for (const auto& g : gws) calibrated.emplace_back(g.name(), model, 1.0);
    gws = std::move(calibrated);
    res.calibration = Calibration{*opts.calibrate_mean_ms, median, opts.sigma,
                                  stats::normal_cdf((std::log(tau) - std::log(median)) / opts.sigma),
                                  pipeline_mean_ms(model, tau)};
  }
  for (auto& g : gws) {
    g.reseed(substream_seed(seed, "availability"));
    res.gateways.push_back(g.name());
  }

  SplitMix64 gen(substream_seed(seed, "availability/driver"));
  std::vector<std::uint64_t> publish_times(opts.n);
  for (auto& t : publish_times) t = uniform_below(gen, opts.window_ms);
  std::sort(publish_times.begin(), publish_times.end());

  store::Store store;
  const auto uploader = store::Identity::from_seed(crypto::derive_seed(seed, "availability/uploader"));
  store.register_node(uploader.node);

  for (std::size_t i = 0; i < opts.n; ++i) {
    const std::uint64_t t = publish_times[i];
    const CidV0 cid = store.put_object(uploader.node, random_object(gen, opts.object_bytes, i));
    std::size_t cur = static_cast<std::size_t>(uniform_below(gen, gws.size()));
    std::uint64_t elapsed = 0;
    bool ok = false;
    for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
      auto r = gws[cur].request(store, cid, opts.timeout_ms, t + elapsed);
      if (auto* f = std::get_if<gateway::Fetched>(&r)) {
        elapsed += f->latency_ms;
        ok = true;
        break;
      }
      elapsed += std::get<gateway::Dropped>(r).elapsed_ms;
      if (gws.size() > 1) {
        // Shift to a different gateway, chosen at random.
        std::size_t next = static_cast<std::size_t>(uniform_below(gen, gws.size() - 1));
        if (next >= cur) ++next;
        cur = next;
      }
    }
    if (ok) res.samples_ms.push_back(elapsed);
    else ++res.misses;
  }

  std::vector<double> xs(res.samples_ms.begin(), res.samples_ms.end());
  res.summary = stats::summarize(xs);

  nlohmann::ordered_json& r = res.report;
  r["experiment"] = "availability";
  r["master_seed"] = seed;
  r["n"] = opts.n;
  r["object_bytes"] = opts.object_bytes;
  r["timeout_ms"] = opts.timeout_ms;
  r["window_ms"] = opts.window_ms;
  r["gateways"] = res.gateways;
  if (res.calibration) {
    const auto& c = *res.calibration;
    r["calibration"] = {{"target_mean_ms", c.target_mean_ms},
                        {"median_ms", c.median_ms},
                        {"sigma", c.sigma},
                        {"success_probability", c.success_probability},
                        {"analytic_mean_ms", c.analytic_mean_ms}};
  } else {
    r["calibration"] = nullptr;
  }
  r["misses"] = res.misses;
  r["summary"] = stats::summary_to_json(res.summary);
  r["samples_ms"] = res.samples_ms;
  return res;
}

std::string samples_tsv(const std::vector<std::uint64_t>& samples) {
  std::string out = "sample_ms\n";
  for (auto s : samples) out += std::to_string(s) + "\n";
  return out;
}

MatrixResult run_gateway_matrix(const SimConfig& config) {
  const MatrixSpec& opts = config.matrix;
  const std::uint64_t seed = config.master_seed;
  MatrixResult res;

  store::Store store;
  const auto host = store::Identity::from_seed(crypto::derive_seed(seed, "matrix/host"));
  store.register_node(host.node);
  SplitMix64 gen(substream_seed(seed, "matrix/content"));
  std::vector<std::string> cids;
  for (std::size_t i = 0; i < opts.cids; ++i) {
    cids.push_back(store.put_object(host.node, random_object(gen, opts.object_bytes, i)).text());
  }

  std::vector<std::string> names;
  for (const auto& g : config.gateways) names.push_back(g.name());

  for (const std::uint64_t timeout : opts.timeouts_ms) {
    std::vector<gateway::GatewayProfile> gws = config.gateways;
    for (auto& g : gws) g.reseed(substream_seed(seed, "matrix/" + std::to_string(timeout)));
    probe::VirtualClock clock;
    probe::SimFetcher fetcher(store, clock);
    for (auto& g : gws) fetcher.add(g.name(), g);

    probe::ProbePlan plan;
    plan.gateways = names;
    plan.cids = cids;
    plan.repeats = opts.repeats;
    plan.rate_limit_s = opts.rate_limit_s;
    plan.timeout_ms = timeout;
    // Simulated gateways need no throttle or request cap.
    plan.max_requests = std::max<std::uint64_t>(plan.request_count(), 1);
    plan.allow_fast_rate = opts.rate_limit_s < probe::ProbePlan::kMinRateLimitS;
    res.runs.push_back(probe::run_plan(plan, fetcher, clock));
  }

  std::ostringstream tsv;
  tsv << "gateway";
  for (auto t : opts.timeouts_ms) tsv << "\ttime_s@" << t << "ms\tdropped@" << t << "ms";
  tsv << '\n';
  tsv.setf(std::ios::fixed);
  tsv.precision(3);
  for (std::size_t gi = 0; gi < names.size(); ++gi) {
    tsv << names[gi];
    for (const auto& run : res.runs) {
      if (gi < run.gateways.size()) {
        const auto& g = run.gateways[gi];
        tsv << '\t' << static_cast<double>(g.total_time_ms) / 1000.0 << '\t' << g.dropped;
      } else {
        tsv << "\t\t";
      }
    }
    tsv << '\n';
  }
  res.table_tsv = tsv.str();

  auto runs = nlohmann::ordered_json::array();
  for (const auto& run : res.runs) runs.push_back(probe::report_to_json(run));
  res.report["experiment"] = "gateway_matrix";
  res.report["master_seed"] = seed;
  res.report["runs"] = std::move(runs);
  return res;
}

}  // namespace riga::harness

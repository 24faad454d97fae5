#pragma once

// Replays of the two gateway measurements against simulated profiles:
// publish-to-first-fetch availability through the fastest gateways with
// random failover, and the per-gateway timing/drop matrix.

#include "riga/gatewaysim.hpp"
#include "riga/probe.hpp"
#include "riga/sim_config.hpp"
#include "riga/stats.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riga::harness {

/// Expected publish-to-fetch time when every attempt goes to a gateway with
/// latency model `m`, failing attempts cost the full timeout and the next
/// gateway is tried: (1 - q) / q * timeout + E[L | L <= timeout], where
/// q = P(L <= timeout). Lognormal models only.
double pipeline_mean_ms(const gateway::LatencyModel& m, double timeout_ms);

/// Lognormal median giving pipeline_mean_ms == target for the given sigma.
double calibrate_median_ms(double target_mean_ms, double sigma, double timeout_ms);

/// Gateways ordered by median latency (ties by name), first `n` kept.
std::vector<gateway::GatewayProfile> fastest_gateways(std::span<const gateway::GatewayProfile> all, std::size_t n);

struct Calibration {
  double target_mean_ms;
  double median_ms;
  double sigma;
  double success_probability;
  double analytic_mean_ms;
};

struct AvailabilityResult {
  std::vector<std::string> gateways;
  std::optional<Calibration> calibration;
  std::vector<std::uint64_t> samples_ms;
  std::size_t misses = 0;
  stats::Summary summary;
  nlohmann::ordered_json report;
};

AvailabilityResult run_availability(const SimConfig& config);

/// One sample per line under a header, for box plots.
std::string samples_tsv(const std::vector<std::uint64_t>& samples);

struct MatrixResult {
  /// One report per timeout, in the probe's report schema.
  std::vector<probe::ProbeReport> runs;
  nlohmann::ordered_json report;
  /// Gateway rows with time and dropped columns per timeout.
  std::string table_tsv;
};

MatrixResult run_gateway_matrix(const SimConfig& config);

}  // namespace riga::harness

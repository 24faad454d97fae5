#pragma once

// End-to-end campaign run: the botmaster plans and publishes commands, bots
// sweep the stream through the simulated gateways, and the run is checked
// afterwards for anchor reachability and for the safety invariant (every
// executed command carries a valid signature from a trusted key).

#include "riga/agents.hpp"
#include "riga/campaign.hpp"
#include "riga/sim_config.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riga::harness {

struct TraceRecord {
  std::uint64_t sim_time_ms;
  std::size_t bot;
  std::string bot_id;
  std::uint64_t counter;
  std::string gateway;
  std::string outcome;
  std::uint64_t latency_ms;
  std::size_t attempts;
  bool lookback;
  bool rejected;
  std::optional<std::string> command;
};

/// Everything the botmaster prepares before the run.
struct CampaignSetup {
  agents::Botmaster master;
  std::vector<agents::CommandEnvelope> envelopes;  // what sits at each anchor
  std::vector<std::optional<crypto::KeyPair>> placeholders;
  std::vector<std::optional<agents::CommandEnvelope>> fills;
  core::CampaignPlan plan;
  core::Campaign campaign;
};

/// Deterministic in config.master_seed. Throws ConfigError if a campaign
/// file is given and disagrees with the configured commands.
CampaignSetup prepare_campaign(const SimConfig& config);

struct RunResult {
  nlohmann::ordered_json report;
  std::vector<TraceRecord> trace;
  std::vector<std::string> violations;
  std::size_t pairs_total = 0;
  std::size_t pairs_reached = 0;
  bool all_reached() const noexcept { return pairs_reached == pairs_total; }
  bool invariant_ok() const noexcept { return violations.empty(); }
  /// Final store contents: fetchable objects only, and everything.
  nlohmann::ordered_json snapshot;
  nlohmann::ordered_json omniscient_snapshot;
};

RunResult run_simulation(const SimConfig& config);

nlohmann::ordered_json trace_record_to_json(const TraceRecord& r);
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);

}  // namespace riga::harness

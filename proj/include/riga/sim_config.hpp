#pragma once

// Run configuration for the simulator and the experiments. Every identity,
// key and random stream in a run is derived from master_seed.

#include "riga/agents.hpp"
#include "riga/campaign.hpp"
#include "riga/gatewaysim.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace riga::harness {

/// Carries the file and line (0 when unknown) of the problem.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

struct CommandSpec {
  std::uint64_t counter = 0;
  agents::CommandKind kind = agents::CommandKind::Direct;
  std::string text;
  std::uint64_t publish_at_ms = 0;
  /// Redirects only: when the placeholder name is pointed at the command.
  std::uint64_t fill_at_ms = 0;
};

struct BotsSpec {
  std::size_t count = 20;
  /// The first `seeders` bots pin every command as it is published.
  std::size_t seeders = 0;
  std::uint64_t lookback = 0;
  std::size_t max_attempts = 0;
};

struct FeedbackSpec {
  bool enabled = false;
  bool unpin_after = true;
};

enum class ExperimentKind { None, Availability, GatewayMatrix };

const char* to_string(ExperimentKind kind) noexcept;

struct AvailabilitySpec {
  std::size_t n = 1000;
  std::size_t object_bytes = 4096;
  std::uint64_t timeout_ms = 5000;
  std::size_t fastest = 4;
  /// Publication times are drawn uniformly from [0, window_ms).
  std::uint64_t window_ms = 3600000;
  /// When set, the chosen gateways are replaced by identical lognormal
  /// models whose analytic publish-to-fetch mean equals this value.
  std::optional<double> calibrate_mean_ms = 3647.0;
  double sigma = 0.8;
  /// Give up on one object after this many attempts (counted as a miss).
  std::size_t max_attempts = 1000;
};

struct MatrixSpec {
  std::size_t cids = 20;
  std::uint32_t repeats = 50;
  std::vector<std::uint64_t> timeouts_ms{5000, 3000};
  double rate_limit_s = 2.0;
  std::size_t object_bytes = 4096;
};

struct SimConfig {
  std::uint64_t master_seed = 0;
  BotsSpec bots;
  std::vector<gateway::GatewayProfile> gateways;
  std::optional<std::string> gateways_path;
  std::optional<std::string> campaign_path;
  core::CounterDomain domain{0, 300, 2000};
  std::uint64_t timeout_ms = 3000;
  std::vector<CommandSpec> commands;
  /// 0 picks the shortest duration that provably reaches every anchor.
  std::uint64_t duration_ms = 0;
  bool require_all_reached = true;
  FeedbackSpec feedback;
  ExperimentKind experiment = ExperimentKind::None;
  AvailabilitySpec availability;
  MatrixSpec matrix;

  /// Worst-case simulated time for every bot to have polled the largest
  /// anchor counter: each tick may cost a full failover round per fetch.
  std::uint64_t required_duration_ms() const;
  std::uint64_t effective_duration_ms() const { return duration_ms ? duration_ms : required_duration_ms(); }
};

/// Parses and validates; `seed_override` replaces master_seed. Relative
/// paths inside the file resolve against the current directory. Throws
/// ConfigError.
SimConfig load_sim_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);
SimConfig parse_sim_config(const std::string& text, const std::string& name,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

nlohmann::ordered_json sim_config_to_json(const SimConfig& config);

}  // namespace riga::harness

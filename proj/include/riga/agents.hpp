#pragma once

// Botmaster and bot actors. The botmaster signs command envelopes whose
// serialized bytes are exactly the payloads anchored in the campaign plan,
// publishes them into the store when it chooses, and collects feedback
// from a rendezvous board. Bots sweep the RIGA stream through round-robin
// gateways, act only on envelopes signed by a trusted key, and follow
// redirects to mutable names.

#include "riga/cidcodec.hpp"
#include "riga/crypto.hpp"
#include "riga/gatewaysim.hpp"
#include "riga/rigacore.hpp"
#include "riga/storesim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riga::agents {

using cid::Bytes;
using cid::CidV0;
using cid::Digest256;

enum class Errc {
  AnchorMismatch,
  UnknownName,
  BadEnvelope,
};

class AgentError : public std::runtime_error {
 public:
  AgentError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

enum class CommandKind : std::uint8_t {
  Direct = 1,
  Redirect = 2,
};

/// Wire form: kind byte || 4-byte big-endian payload length || payload ||
/// signature. The signature covers everything before it. `signer` is not
/// serialized; receivers try each trusted key.
struct CommandEnvelope {
  CommandKind kind = CommandKind::Direct;
  Bytes payload;
  Bytes signature;
  Bytes signer;

  Bytes signed_bytes() const;
  Bytes serialize() const;
  /// nullopt for anything that is not a well-formed envelope.
  static std::optional<CommandEnvelope> parse(std::span<const std::uint8_t> bytes);
};

/// Throws crypto::MalformedKey.
CommandEnvelope sign_envelope(CommandKind kind, std::span<const std::uint8_t> payload,
                              const crypto::KeyPair& key);
bool verify_envelope(const CommandEnvelope& envelope);

/// Index of the trusted key that verifies `envelope`, if any. On success
/// the envelope's signer is set to that key.
std::optional<std::size_t> find_trusted_signer(CommandEnvelope& envelope, std::span<const Bytes> trusted_keys);

/// Redirect payloads carry the 32-byte name digest of the placeholder.
CommandEnvelope make_redirect(const Digest256& placeholder, const crypto::KeyPair& key);

/// What a bot is handed at infection time.
struct BotCampaign {
  core::SkewedPrng prng;
  core::CounterDomain domain;
  std::vector<Bytes> trusted_keys;
  std::uint64_t timeout_ms = 3000;
  /// Gateways tried per poll before giving up; 0 means one full round.
  std::size_t max_attempts = 0;
  /// Re-poll counter c - lookback at counter c if it found nothing; 0 disables.
  std::uint64_t lookback = 0;
};

struct ExecutionRecord {
  std::uint64_t counter;
  std::string command;
  std::uint64_t sim_time_ms;
  bool via_redirect;
  /// The Direct envelope acted on, kept so the trace can be re-verified.
  Bytes envelope;
};

enum class OutcomeKind { NoContent, Executed, Redirected };

const char* to_string(OutcomeKind kind) noexcept;

struct PollOutcome {
  OutcomeKind kind = OutcomeKind::NoContent;
  std::uint64_t counter = 0;
  std::uint64_t started_ms = 0;
  /// Simulated time spent on the whole poll, including failover and
  /// redirect resolution.
  std::uint64_t latency_ms = 0;
  std::string gateway;
  std::size_t attempts = 0;
  /// Content arrived but was not a trusted envelope.
  bool rejected = false;
  bool lookback = false;
  std::optional<std::string> command;
  std::optional<Digest256> redirect_name;
};

/// Pluggable step between fetching and parsing (e.g. undoing some
/// embedding); the default is the identity.
using Extractor = std::function<Bytes(const Bytes&)>;

class Bot {
 public:
  Bot(store::Identity identity, BotCampaign campaign, std::span<gateway::GatewayProfile> gateways,
      std::size_t rr_start = 0, bool is_seeder = false);

  const store::Identity& identity() const noexcept { return identity_; }
  const store::NodeId& node() const noexcept { return identity_.node; }
  const BotCampaign& campaign() const noexcept { return campaign_; }
  bool is_seeder() const noexcept { return is_seeder_; }
  std::uint64_t counter() const noexcept { return counter_; }
  bool finished() const noexcept { return finished_; }
  const std::vector<ExecutionRecord>& executed() const noexcept { return executed_; }

  void set_extractor(Extractor extractor) { extractor_ = std::move(extractor); }

  /// One poll of the current counter at simulated time `now_ms`, then the
  /// counter advances. Every failure path is NoContent.
  PollOutcome tick(store::Store& store, std::uint64_t now_ms);

  /// The re-poll owed by the look-back window after a tick at `counter`,
  /// if any.
  std::optional<PollOutcome> lookback_tick(store::Store& store, std::uint64_t counter, std::uint64_t now_ms);

  /// When the next tick is due after a poll that started at `started_ms`
  /// and took `busy_ms`: the tick interval, or later if the poll ran over.
  std::uint64_t next_tick_time(std::uint64_t started_ms, std::uint64_t busy_ms) const noexcept;

 private:
  struct Fetch {
    std::optional<Bytes> content;
    std::uint64_t elapsed_ms = 0;
    std::size_t attempts = 0;
    std::string gateway;
  };

  Fetch fetch_with_failover(store::Store& store, const CidV0& cid, std::uint64_t now_ms);
  std::optional<CommandEnvelope> accept(const Bytes& content) const;
  PollOutcome poll(store::Store& store, std::uint64_t counter, std::uint64_t now_ms);

  store::Identity identity_;
  BotCampaign campaign_;
  gateway::RoundRobin rr_;
  bool is_seeder_;
  Extractor extractor_;
  std::uint64_t counter_;
  bool finished_ = false;
  std::set<std::uint64_t> missed_;
  std::vector<ExecutionRecord> executed_;
};

/// bot_tick against the clock's current time.
PollOutcome bot_tick(Bot& bot, store::Store& store, const gateway::SimClock& clock);

class Botmaster {
 public:
  Botmaster(store::Identity identity, crypto::KeyPair signing_key);

  const store::Identity& identity() const noexcept { return identity_; }
  const store::NodeId& node() const noexcept { return identity_.node; }
  const crypto::KeyPair& signing_key() const noexcept { return signing_key_; }

  CommandEnvelope sign(CommandKind kind, std::span<const std::uint8_t> payload) const;

  /// Stores the envelope and checks that it lands on the planned anchor;
  /// throws AnchorMismatch (nothing stored) otherwise. Each extra seeder
  /// then pins it.
  CidV0 publish_command(store::Store& store, const CommandEnvelope& envelope,
                        std::span<const CidV0> planned_anchors, std::size_t anchor_index,
                        std::span<const store::NodeId> extra_seeders = {}) const;

  /// Stores a Direct envelope and points the placeholder name at it.
  CidV0 fill_placeholder(store::Store& store, const crypto::KeyPair& placeholder_key,
                         const CommandEnvelope& envelope) const;

 private:
  store::Identity identity_;
  crypto::KeyPair signing_key_;
};

/// A mutable name listing the CIDs bots have posted. Bots are given the
/// name key so they can republish it; each post writes a new list object.
class RendezvousBoard {
 public:
  explicit RendezvousBoard(crypto::KeyPair key);

  const Digest256& name() const noexcept { return name_; }
  const crypto::KeyPair& key() const noexcept { return key_; }

  /// Publishes the empty list, stored by `owner`.
  void open(store::Store& store, const store::NodeId& owner);

  /// Throws AgentError(UnknownName) if the board was never published.
  std::vector<CidV0> entries(const store::Store& store) const;

 private:
  friend CidV0 push_feedback(const store::Identity&, std::span<const std::uint8_t>, RendezvousBoard&,
                             store::Store&, bool);
  friend std::vector<std::optional<Bytes>> collect_feedback(RendezvousBoard&, store::Store&);

  struct PendingUnpin {
    store::NodeId node;
    CidV0 cid;
  };

  crypto::KeyPair key_;
  Digest256 name_;
  std::vector<PendingUnpin> pending_unpins_;
};

/// Stores `info` with the bot as provider and appends its CID to the
/// board. With `unpin_after`, the bot drops the object once the
/// botmaster has collected it. Throws AgentError(UnknownName).
CidV0 push_feedback(const store::Identity& bot, std::span<const std::uint8_t> info, RendezvousBoard& board,
                    store::Store& store, bool unpin_after = false);

/// Contents in post order; nullopt marks entries no longer fetchable.
std::vector<std::optional<Bytes>> collect_feedback(RendezvousBoard& board, store::Store& store);

}  // namespace riga::agents

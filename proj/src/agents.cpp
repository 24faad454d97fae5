#include "riga/agents.hpp"

#include <algorithm>
#include <string_view>

namespace riga::agents {

namespace {

constexpr std::size_t kHeaderSize = 5;
constexpr std::size_t kSignatureSize = 64;
constexpr std::string_view kBoardMagic = "riga-board-v1\n";

Bytes encode_board(const std::vector<CidV0>& entries) {
  std::string text(kBoardMagic);
  for (const auto& e : entries) {
    text += e.text();
    text += '\n';
  }
  return Bytes(text.begin(), text.end());
}

std::vector<CidV0> decode_board(const Bytes& bytes) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!text.starts_with(kBoardMagic)) throw AgentError(Errc::BadEnvelope, "board object is malformed");
  std::vector<CidV0> out;
  std::size_t pos = kBoardMagic.size();
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    out.push_back(CidV0::parse(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

}  // namespace

const char* to_string(OutcomeKind kind) noexcept {
  switch (kind) {
    case OutcomeKind::NoContent: return "no_content";
    case OutcomeKind::Executed: return "executed";
    case OutcomeKind::Redirected: return "redirected";
  }
  return "unknown";
}

Bytes CommandEnvelope::signed_bytes() const {
  Bytes out;
  out.reserve(kHeaderSize + payload.size());
  out.push_back(static_cast<std::uint8_t>(kind));
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes CommandEnvelope::serialize() const {
  Bytes out = signed_bytes();
  out.insert(out.end(), signature.begin(), signature.end());
  return out;
}

std::optional<CommandEnvelope> CommandEnvelope::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return std::nullopt;
  const std::uint8_t kind = bytes[0];
  if (kind != static_cast<std::uint8_t>(CommandKind::Direct) &&
      kind != static_cast<std::uint8_t>(CommandKind::Redirect)) {
    return std::nullopt;
  }
  std::uint64_t len = 0;
  for (std::size_t i = 1; i < kHeaderSize; ++i) len = (len << 8) | bytes[i];
  if (bytes.size() != kHeaderSize + len + kSignatureSize) return std::nullopt;
  CommandEnvelope env;
  env.kind = static_cast<CommandKind>(kind);
  env.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + len));
  env.signature.assign(bytes.end() - kSignatureSize, bytes.end());
  return env;
}

CommandEnvelope sign_envelope(CommandKind kind, std::span<const std::uint8_t> payload, const crypto::KeyPair& key) {
  CommandEnvelope env;
  env.kind = kind;
  env.payload.assign(payload.begin(), payload.end());
  env.signature = crypto::sign(key.private_key, env.signed_bytes());
  env.signer = key.public_key;
  return env;
}

bool verify_envelope(const CommandEnvelope& envelope) {
  return crypto::verify(envelope.signer, envelope.signed_bytes(), envelope.signature);
}

std::optional<std::size_t> find_trusted_signer(CommandEnvelope& envelope, std::span<const Bytes> trusted_keys) {
  const Bytes message = envelope.signed_bytes();
  for (std::size_t i = 0; i < trusted_keys.size(); ++i) {
    if (crypto::verify(trusted_keys[i], message, envelope.signature)) {
      envelope.signer = trusted_keys[i];
      return i;
    }
  }
  return std::nullopt;
}

CommandEnvelope make_redirect(const Digest256& placeholder, const crypto::KeyPair& key) {
  return sign_envelope(CommandKind::Redirect, placeholder.bytes(), key);
}

Bot::Bot(store::Identity identity, BotCampaign campaign, std::span<gateway::GatewayProfile> gateways,
         std::size_t rr_start, bool is_seeder)
    : identity_(std::move(identity)),
      campaign_(std::move(campaign)),
      rr_(gateways, rr_start),
      is_seeder_(is_seeder),
      counter_(campaign_.domain.start) {
  campaign_.domain.validate();
  if (campaign_.timeout_ms == 0) throw std::invalid_argument("bot timeout must be positive");
}

Bot::Fetch Bot::fetch_with_failover(store::Store& store, const CidV0& cid, std::uint64_t now_ms) {
  const std::size_t budget = campaign_.max_attempts == 0 ? rr_.size() : campaign_.max_attempts;
  Fetch f;
  while (f.attempts < budget) {
    gateway::GatewayProfile& gw = rr_.next();
    ++f.attempts;
    f.gateway = gw.name();
    auto result = gw.request(store, cid, campaign_.timeout_ms, now_ms + f.elapsed_ms);
    if (auto* fetched = std::get_if<gateway::Fetched>(&result)) {
      f.elapsed_ms += fetched->latency_ms;
      f.content = std::move(fetched->content);
      break;
    }
    f.elapsed_ms += std::get<gateway::Dropped>(result).elapsed_ms;
  }
  return f;
}

std::optional<CommandEnvelope> Bot::accept(const Bytes& content) const {
  const Bytes extracted = extractor_ ? extractor_(content) : content;
  auto env = CommandEnvelope::parse(extracted);
  if (!env || !find_trusted_signer(*env, campaign_.trusted_keys)) return std::nullopt;
  return env;
}

PollOutcome Bot::poll(store::Store& store, std::uint64_t counter, std::uint64_t now_ms) {
  PollOutcome out;
  out.counter = counter;
  out.started_ms = now_ms;

  Fetch first = fetch_with_failover(store, campaign_.prng.uri_at(counter), now_ms);
  out.latency_ms = first.elapsed_ms;
  out.attempts = first.attempts;
  out.gateway = first.gateway;
  if (!first.content) return out;

  auto env = accept(*first.content);
  if (!env) {
    out.rejected = true;
    return out;
  }

  if (env->kind == CommandKind::Direct) {
    out.kind = OutcomeKind::Executed;
    out.command = std::string(env->payload.begin(), env->payload.end());
    executed_.push_back(ExecutionRecord{counter, *out.command, now_ms + out.latency_ms, false, env->serialize()});
    return out;
  }

  if (env->payload.size() != Digest256::kSize) {
    out.rejected = true;
    return out;
  }
  const Digest256 name = Digest256::from_bytes(env->payload);
  out.kind = OutcomeKind::Redirected;
  out.redirect_name = name;

  const auto record = store.name_record(name);
  if (!record) return out;  // placeholder not filled yet

  Fetch second = fetch_with_failover(store, record->current, now_ms + out.latency_ms);
  out.latency_ms += second.elapsed_ms;
  out.attempts += second.attempts;
  out.gateway = second.gateway;
  if (!second.content) return out;
  auto inner = accept(*second.content);
  if (!inner || inner->kind != CommandKind::Direct) {
    out.rejected = true;
    return out;
  }
  out.command = std::string(inner->payload.begin(), inner->payload.end());
  executed_.push_back(ExecutionRecord{counter, *out.command, now_ms + out.latency_ms, true, inner->serialize()});
  return out;
}

PollOutcome Bot::tick(store::Store& store, std::uint64_t now_ms) {
  if (finished_) throw std::logic_error("bot has swept its whole counter domain");
  PollOutcome out = poll(store, counter_, now_ms);
  if (campaign_.lookback > 0 && out.kind == OutcomeKind::NoContent) missed_.insert(counter_);
  if (counter_ == campaign_.domain.upper) finished_ = true;
  else ++counter_;
  return out;
}

std::optional<PollOutcome> Bot::lookback_tick(store::Store& store, std::uint64_t counter, std::uint64_t now_ms) {
  if (campaign_.lookback == 0 || counter < campaign_.domain.start + campaign_.lookback) return std::nullopt;
  const std::uint64_t target = counter - campaign_.lookback;
  missed_.erase(missed_.begin(), missed_.lower_bound(target));
  if (missed_.erase(target) == 0) return std::nullopt;
  PollOutcome out = poll(store, target, now_ms);
  out.lookback = true;
  return out;
}

std::uint64_t Bot::next_tick_time(std::uint64_t started_ms, std::uint64_t busy_ms) const noexcept {
  return started_ms + std::max(campaign_.domain.tick_ms, busy_ms);
}

PollOutcome bot_tick(Bot& bot, store::Store& store, const gateway::SimClock& clock) {
  return bot.tick(store, clock.now());
}

Botmaster::Botmaster(store::Identity identity, crypto::KeyPair signing_key)
    : identity_(std::move(identity)), signing_key_(std::move(signing_key)) {}

CommandEnvelope Botmaster::sign(CommandKind kind, std::span<const std::uint8_t> payload) const {
  return sign_envelope(kind, payload, signing_key_);
}

CidV0 Botmaster::publish_command(store::Store& store, const CommandEnvelope& envelope,
                                 std::span<const CidV0> planned_anchors, std::size_t anchor_index,
                                 std::span<const store::NodeId> extra_seeders) const {
  const Bytes bytes = envelope.serialize();
  const CidV0& planned = planned_anchors[anchor_index];
  if (store::content_address(bytes) != planned) {
    throw AgentError(Errc::AnchorMismatch, "envelope does not hash to anchor #" + std::to_string(anchor_index) +
                                               " (" + planned.text() + ")");
  }
  const CidV0 cid = store.put_object(identity_.node, bytes);
  for (const auto& seeder : extra_seeders) store.pin(seeder, cid);
  return cid;
}

CidV0 Botmaster::fill_placeholder(store::Store& store, const crypto::KeyPair& placeholder_key,
                                  const CommandEnvelope& envelope) const {
  const CidV0 cid = store.put_object(identity_.node, envelope.serialize());
  store.publish_name(placeholder_key, cid);
  return cid;
}

RendezvousBoard::RendezvousBoard(crypto::KeyPair key) : key_(std::move(key)), name_(store::name_of(key_)) {}

void RendezvousBoard::open(store::Store& store, const store::NodeId& owner) {
  store.publish_name(name_, key_, store.put_object(owner, encode_board({})));
}

std::vector<CidV0> RendezvousBoard::entries(const store::Store& store) const {
  if (!store.name_record(name_)) throw AgentError(Errc::UnknownName, "rendezvous board was never published");
  auto content = store.try_get(store.resolve_name(name_));
  if (!content) throw AgentError(Errc::BadEnvelope, "rendezvous board object is unavailable");
  return decode_board(*content);
}

CidV0 push_feedback(const store::Identity& bot, std::span<const std::uint8_t> info, RendezvousBoard& board,
                    store::Store& store, bool unpin_after) {
  std::vector<CidV0> list = board.entries(store);
  const CidV0 cid = store.put_object(bot.node, info);
  list.push_back(cid);
  store.publish_name(board.name_, board.key_, store.put_object(bot.node, encode_board(list)));
  if (unpin_after) board.pending_unpins_.push_back(RendezvousBoard::PendingUnpin{bot.node, cid});
  return cid;
}

std::vector<std::optional<Bytes>> collect_feedback(RendezvousBoard& board, store::Store& store) {
  std::vector<std::optional<Bytes>> out;
  for (const auto& cid : board.entries(store)) out.push_back(store.try_get(cid));
  for (const auto& p : board.pending_unpins_) {
    try {
      store.unpin(p.node, p.cid);
    } catch (const store::StoreError&) {
      // Already gone; nothing left to remove.
    }
  }
  board.pending_unpins_.clear();
  return out;
}

}  // namespace riga::agents

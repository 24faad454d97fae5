#include "riga/simulation.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace riga::harness {

using cid::Bytes;
using cid::CidV0;

namespace {

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::string short_id(const store::NodeId& node) { return node.id().hex().substr(0, 16); }

core::Campaign load_campaign_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot read campaign file");
  try {
    return core::campaign_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path, 0, std::string("invalid campaign JSON: ") + e.what());
  } catch (const core::RigaError& e) {
    throw ConfigError(path, 0, e.what());
  }
}

}  // namespace

CampaignSetup prepare_campaign(const SimConfig& config) {
  const std::uint64_t seed = config.master_seed;
  agents::Botmaster master(store::Identity::from_seed(crypto::derive_seed(seed, "botmaster/node")),
                           crypto::keypair_from_seed(crypto::derive_seed(seed, "botmaster/signing")));

  std::vector<agents::CommandEnvelope> envelopes;
  std::vector<std::optional<crypto::KeyPair>> placeholders;
  std::vector<std::optional<agents::CommandEnvelope>> fills;
  std::vector<Bytes> payloads;
  std::vector<std::uint64_t> counters;
  for (const auto& cmd : config.commands) {
    const agents::CommandEnvelope direct = master.sign(agents::CommandKind::Direct, bytes_of(cmd.text));
    if (cmd.kind == agents::CommandKind::Direct) {
      envelopes.push_back(direct);
      placeholders.emplace_back();
      fills.emplace_back();
    } else {
      crypto::KeyPair ph =
          crypto::keypair_from_seed(crypto::derive_seed(seed, "placeholder/" + std::to_string(cmd.counter)));
      envelopes.push_back(agents::make_redirect(store::name_of(ph), master.signing_key()));
      placeholders.emplace_back(std::move(ph));
      fills.emplace_back(direct);
    }
    payloads.push_back(envelopes.back().serialize());
    counters.push_back(cmd.counter);
  }

  std::optional<core::CampaignPlan> plan;
  if (!payloads.empty()) plan = core::plan_campaign(payloads, counters, core::production_field());
  else {
    // No commands: a constant stream through an arbitrary anchor.
    const std::vector<std::pair<std::uint64_t, cid::Digest256>> none{
        {config.domain.start, crypto::sha256("riga/empty/" + std::to_string(seed))}};
    plan = core::CampaignPlan{
        core::build_skewed_prng(core::AnchorSet::from_digests(none), core::production_field()), {}, {}};
  }

  core::Campaign campaign = core::make_campaign(*plan, config.domain, substream_seed(seed, "shuffle"));
  campaign.trusted_keys.push_back(master.signing_key().public_key);
  campaign.timeout_ms = config.timeout_ms;

  if (config.campaign_path) {
    const core::Campaign file = load_campaign_file(*config.campaign_path);
    bool same = file.anchors.size() == campaign.anchors.size() && file.domain == campaign.domain &&
                file.prime == campaign.prime;
    for (std::size_t i = 0; same && i < file.anchors.size(); ++i) {
      same = file.anchors[i].counter == campaign.anchors[i].counter && file.anchors[i].cid == campaign.anchors[i].cid;
    }
    if (!same) {
      throw ConfigError(*config.campaign_path, 0,
                        "campaign anchors/domain do not match the commands and seed in the run config");
    }
    // Bots are handed the file; its trusted keys (if any) must include ours.
    if (!file.trusted_keys.empty()) campaign.trusted_keys = file.trusted_keys;
  }

  return CampaignSetup{std::move(master), std::move(envelopes), std::move(placeholders), std::move(fills),
                       std::move(*plan), std::move(campaign)};
}

RunResult run_simulation(const SimConfig& config) {
  CampaignSetup setup = prepare_campaign(config);
  const std::uint64_t seed = config.master_seed;
  const std::uint64_t duration = config.effective_duration_ms();

  store::Store store;
  store.register_node(setup.master.node());

  std::vector<gateway::GatewayProfile> gateways = config.gateways;
  for (auto& g : gateways) g.reseed(seed);

  // Bots are given the campaign as a file would carry it.
  const core::SkewedPrng prng = setup.campaign.build_prng();
  std::vector<agents::Bot> bots;
  bots.reserve(config.bots.count);
  std::vector<store::NodeId> seeders;
  for (std::size_t i = 0; i < config.bots.count; ++i) {
    auto id = store::Identity::from_seed(crypto::derive_seed(seed, "bot/" + std::to_string(i)));
    store.register_node(id.node);
    const bool is_seeder = i < config.bots.seeders;
    if (is_seeder) seeders.push_back(id.node);
    agents::BotCampaign bc{prng, config.domain, setup.campaign.trusted_keys,
                           setup.campaign.timeout_ms.value_or(config.timeout_ms), config.bots.max_attempts,
                           config.bots.lookback};
    bots.emplace_back(std::move(id), std::move(bc), std::span<gateway::GatewayProfile>(gateways),
                      i % gateways.size(), is_seeder);
  }

  RunResult result;
  gateway::SimClock clock;
  std::map<std::uint64_t, std::uint64_t> published_at;

  std::optional<agents::RendezvousBoard> board;
  std::vector<CidV0> feedback_cids;
  if (config.feedback.enabled) {
    board.emplace(crypto::keypair_from_seed(crypto::derive_seed(seed, "board")));
    board->open(store, setup.master.node());
  }

  for (std::size_t i = 0; i < config.commands.size(); ++i) {
    const CommandSpec& cmd = config.commands[i];
    clock.schedule_at(cmd.publish_at_ms, "publish/" + std::to_string(cmd.counter), [&, i] {
      setup.master.publish_command(store, setup.envelopes[i], setup.plan.anchor_cids, i, seeders);
      published_at[config.commands[i].counter] = clock.now();
    });
    if (setup.placeholders[i]) {
      clock.schedule_at(cmd.fill_at_ms, "fill/" + std::to_string(cmd.counter), [&, i] {
        const CidV0 cid = setup.master.fill_placeholder(store, *setup.placeholders[i], *setup.fills[i]);
        for (const auto& s : seeders) store.pin(s, cid);
      });
    }
  }

  auto record = [&](std::size_t b, const agents::PollOutcome& out) {
    result.trace.push_back(TraceRecord{out.started_ms, b, short_id(bots[b].node()), out.counter, out.gateway,
                                       agents::to_string(out.kind), out.latency_ms, out.attempts, out.lookback,
                                       out.rejected, out.command});
    if (board && out.command) {
      const std::string info = "bot " + short_id(bots[b].node()) + " ran counter " + std::to_string(out.counter) +
                               " at " + std::to_string(out.started_ms + out.latency_ms) + " ms";
      feedback_cids.push_back(
          agents::push_feedback(bots[b].identity(), bytes_of(info), *board, store, config.feedback.unpin_after));
    }
  };

  std::function<void(std::size_t)> tick = [&](std::size_t b) {
    agents::Bot& bot = bots[b];
    const std::uint64_t start = clock.now();
    const std::uint64_t counter = bot.counter();
    const agents::PollOutcome out = bot.tick(store, start);
    record(b, out);
    std::uint64_t busy = out.latency_ms;
    if (auto lb = bot.lookback_tick(store, counter, start + busy)) {
      record(b, *lb);
      busy += lb->latency_ms;
    }
    const std::uint64_t next = bot.next_tick_time(start, busy);
    if (!bot.finished() && next <= duration) {
      clock.schedule_at(next, "bot/" + std::to_string(b), [&tick, b] { tick(b); });
    }
  };
  for (std::size_t b = 0; b < bots.size(); ++b) {
    clock.schedule_at(0, "bot/" + std::to_string(b), [&tick, b] { tick(b); });
  }

  clock.run_until(duration);

  // Feedback collection happens once, after the run.
  nlohmann::ordered_json feedback = nullptr;
  if (board) {
    const auto collected = agents::collect_feedback(*board, store);
    std::size_t received = 0, still_available = 0;
    for (const auto& c : collected) received += c.has_value();
    for (const auto& cid : feedback_cids) still_available += store.is_available(cid);
    feedback = {{"posted", feedback_cids.size()},
                {"collected", received},
                {"available_after_collection", still_available}};
  }

  // Reachability and the safety invariant.
  // An anchor at the polled counter wins; otherwise the first anchor whose
  // CID the counter resolves to.
  auto anchor_for = [&](std::uint64_t counter) -> std::optional<std::size_t> {
    const CidV0 uri = prng.uri_at(counter);
    for (std::size_t i = 0; i < config.commands.size(); ++i) {
      if (config.commands[i].counter == counter && setup.plan.anchor_cids[i] == uri) return i;
    }
    for (std::size_t i = 0; i < config.commands.size(); ++i) {
      if (setup.plan.anchor_cids[i] == uri) return i;
    }
    return std::nullopt;
  };

  auto bot_reports = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < bots.size(); ++b) {
    const agents::Bot& bot = bots[b];
    std::map<std::size_t, const agents::ExecutionRecord*> first;  // by anchor index
    for (const auto& rec : bot.executed()) {
      // The polled URI must be a planned anchor CID. With k = 1 the stream is
      // constant, so any counter may legitimately resolve to it.
      const auto idx = anchor_for(rec.counter);
      if (!idx) {
        result.violations.push_back("bot " + std::to_string(b) + " executed content outside the plan at counter " +
                                    std::to_string(rec.counter));
        continue;
      }
      auto env = agents::CommandEnvelope::parse(rec.envelope);
      if (!env || env->kind != agents::CommandKind::Direct ||
          !agents::find_trusted_signer(*env, setup.campaign.trusted_keys)) {
        result.violations.push_back("bot " + std::to_string(b) + " executed an unverified command at counter " +
                                    std::to_string(rec.counter));
        continue;
      }
      if (std::string(env->payload.begin(), env->payload.end()) != config.commands[*idx].text ||
          rec.command != config.commands[*idx].text) {
        result.violations.push_back("bot " + std::to_string(b) + " executed unexpected text at counter " +
                                    std::to_string(rec.counter));
        continue;
      }
      first.try_emplace(*idx, &rec);
    }
    auto anchors = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < config.commands.size(); ++i) {
      ++result.pairs_total;
      nlohmann::ordered_json a;
      a["counter"] = config.commands[i].counter;
      auto it = first.find(i);
      a["reached"] = it != first.end();
      if (it != first.end()) {
        ++result.pairs_reached;
        a["executed_counter"] = it->second->counter;
        a["executed_at_ms"] = it->second->sim_time_ms;
        a["via_redirect"] = it->second->via_redirect;
      }
      anchors.push_back(std::move(a));
    }
    nlohmann::ordered_json br;
    br["bot"] = b;
    br["id"] = short_id(bot.node());
    br["seeder"] = bot.is_seeder();
    br["final_counter"] = bot.counter();
    br["executions"] = bot.executed().size();
    br["anchors"] = std::move(anchors);
    bot_reports.push_back(std::move(br));
  }

  // Totals must reconcile with the trace.
  std::size_t traced_executions = 0;
  for (const auto& t : result.trace) traced_executions += t.command.has_value();
  std::size_t executions = 0;
  for (const auto& bot : bots) executions += bot.executed().size();
  if (traced_executions != executions) result.violations.push_back("trace and execution totals disagree");

  auto anchors = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < config.commands.size(); ++i) {
    const CommandSpec& cmd = config.commands[i];
    nlohmann::ordered_json a;
    a["counter"] = cmd.counter;
    a["cid"] = setup.plan.anchor_cids[i].text();
    a["kind"] = cmd.kind == agents::CommandKind::Direct ? "direct" : "redirect";
    auto it = published_at.find(cmd.counter);
    if (it != published_at.end()) a["published_at_ms"] = it->second;
    else a["published_at_ms"] = nullptr;
    std::size_t reached_by = 0;
    for (const auto& br : bot_reports) reached_by += br["anchors"][i]["reached"].get<bool>();
    a["reached_by"] = reached_by;
    anchors.push_back(std::move(a));
  }

  auto gw_stats = nlohmann::ordered_json::array();
  for (const auto& g : gateways) {
    gw_stats.push_back({{"name", g.name()},
                        {"requests", g.requests_total()},
                        {"fetched", g.fetched_total()},
                        {"dropped", g.dropped_total()}});
  }

  auto violations = nlohmann::ordered_json::array();
  for (const auto& v : result.violations) violations.push_back(v);

  nlohmann::ordered_json& r = result.report;
  r["schema"] = "riga-run-report-v1";
  r["master_seed"] = seed;
  r["duration_ms"] = duration;
  r["config"] = sim_config_to_json(config);
  r["campaign"] = core::campaign_to_json(setup.campaign);
  r["anchors"] = std::move(anchors);
  r["bots"] = std::move(bot_reports);
  r["gateways"] = std::move(gw_stats);
  r["feedback"] = std::move(feedback);
  r["summary"] = {{"bots", bots.size()},
                  {"anchors", config.commands.size()},
                  {"pairs_total", result.pairs_total},
                  {"pairs_reached", result.pairs_reached},
                  {"all_reached", result.all_reached()},
                  {"polls", result.trace.size()},
                  {"executions", executions},
                  {"invariant_ok", result.invariant_ok()},
                  {"violations", std::move(violations)}};
  result.snapshot = store.snapshot(store::SnapshotView::Analyst);
  result.omniscient_snapshot = store.snapshot(store::SnapshotView::Omniscient);
  return result;
}

nlohmann::ordered_json trace_record_to_json(const TraceRecord& t) {
  nlohmann::ordered_json j;
  j["sim_time_ms"] = t.sim_time_ms;
  j["bot"] = t.bot;
  j["bot_id"] = t.bot_id;
  j["counter"] = t.counter;
  j["gateway"] = t.gateway;
  j["outcome"] = t.outcome;
  j["latency_ms"] = t.latency_ms;
  j["attempts"] = t.attempts;
  j["lookback"] = t.lookback;
  j["rejected"] = t.rejected;
  if (t.command) j["command"] = *t.command;
  return j;
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const auto& t : trace) {
    out += trace_record_to_json(t).dump();
    out += '\n';
  }
  return out;
}

}  // namespace riga::harness

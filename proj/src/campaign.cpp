#include "riga/campaign.hpp"

#include "riga/rng.hpp"

#include <cmath>

namespace riga::core {

namespace {

[[noreturn]] void bad(const std::string& what) { throw RigaError(Errc::BadCampaign, "campaign: " + what); }

std::uint64_t get_u64(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) bad(std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

AnchorSet Campaign::anchor_set() const {
  std::vector<Anchor> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) out.push_back(Anchor{a.counter, cid::cid_to_value(a.cid)});
  AnchorSet set(std::move(out));
  set.check_domain(domain);
  return set;
}

SkewedPrng Campaign::build_prng() const {
  if (prime == BigInt(kProductionPrimeDecimal)) return build_skewed_prng(anchor_set(), production_field());
  return build_skewed_prng(anchor_set(), PrimeField(prime));
}

Campaign make_campaign(const CampaignPlan& plan, const CounterDomain& domain, std::uint64_t shuffle_seed) {
  Campaign c;
  c.prime = plan.prng.prime();
  for (std::size_t i = 0; i < plan.counters.size(); ++i) {
    c.anchors.push_back(CampaignAnchor{plan.counters[i], plan.anchor_cids[i]});
  }
  c.domain = domain;
  c.shuffle_seed = shuffle_seed;
  return c;
}

nlohmann::ordered_json campaign_to_json(const Campaign& campaign) {
  nlohmann::ordered_json j;
  j["prime"] = campaign.prime.str();
  auto anchors = nlohmann::ordered_json::array();
  for (const auto& a : campaign.anchors) {
    anchors.push_back({{"counter", a.counter}, {"cid", a.cid.text()}});
  }
  j["anchors"] = std::move(anchors);
  nlohmann::ordered_json domain;
  domain["start"] = campaign.domain.start;
  domain["upper"] = campaign.domain.upper;
  if (campaign.domain.tick_ms % 1000 == 0) domain["tick_seconds"] = campaign.domain.tick_ms / 1000;
  else domain["tick_seconds"] = static_cast<double>(campaign.domain.tick_ms) / 1000.0;
  j["domain"] = std::move(domain);
  j["shuffle_seed"] = campaign.shuffle_seed;
  j["shuffle_rng"] = campaign.shuffle_rng;
  if (!campaign.trusted_keys.empty()) {
    auto keys = nlohmann::ordered_json::array();
    for (const auto& k : campaign.trusted_keys) keys.push_back(cid::to_hex(k));
    j["trusted_keys"] = std::move(keys);
  }
  if (campaign.timeout_ms) j["timeout_ms"] = *campaign.timeout_ms;
  return j;
}

Campaign campaign_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("top level must be an object");
  Campaign c;

  if (!j.contains("prime") || !j["prime"].is_string()) bad("\"prime\" must be a decimal string");
  const std::string prime = j["prime"].get<std::string>();
  if (prime.empty() || prime.find_first_not_of("0123456789") != std::string::npos) {
    bad("\"prime\" must be a decimal string");
  }
  c.prime = BigInt(prime);
  if (prime != kProductionPrimeDecimal && !modfield::is_probable_prime(c.prime)) bad("\"prime\" is not prime");

  if (!j.contains("domain") || !j["domain"].is_object()) bad("missing \"domain\" object");
  const auto& d = j["domain"];
  c.domain.start = get_u64(d, "start");
  c.domain.upper = get_u64(d, "upper");
  if (!d.contains("tick_seconds") || !d["tick_seconds"].is_number()) bad("\"tick_seconds\" must be a number");
  const double tick = d["tick_seconds"].get<double>();
  if (!(tick > 0)) bad("\"tick_seconds\" must be positive");
  c.domain.tick_ms = static_cast<std::uint64_t>(std::llround(tick * 1000.0));
  try {
    c.domain.validate();
  } catch (const RigaError& e) {
    bad(e.what());
  }

  if (!j.contains("anchors") || !j["anchors"].is_array()) bad("\"anchors\" must be an array");
  for (const auto& a : j["anchors"]) {
    if (!a.is_object() || !a.contains("cid") || !a["cid"].is_string()) bad("anchor needs a \"cid\" string");
    try {
      c.anchors.push_back(CampaignAnchor{get_u64(a, "counter"), CidV0::parse(a["cid"].get<std::string>())});
    } catch (const cid::CodecError& e) {
      bad(std::string("anchor cid: ") + e.what());
    }
  }

  c.shuffle_seed = j.contains("shuffle_seed") ? get_u64(j, "shuffle_seed") : 0;
  if (j.contains("shuffle_rng")) {
    if (!j["shuffle_rng"].is_string()) bad("\"shuffle_rng\" must be a string");
    c.shuffle_rng = j["shuffle_rng"].get<std::string>();
    if (c.shuffle_rng != SplitMix64::kName) bad("unsupported shuffle_rng \"" + c.shuffle_rng + "\"");
  }
  if (j.contains("trusted_keys")) {
    for (const auto& k : j["trusted_keys"]) {
      if (!k.is_string()) bad("trusted keys must be hex strings");
      Bytes key;
      try {
        key = cid::from_hex(k.get<std::string>());
      } catch (const std::exception& e) {
        bad(std::string("trusted key: ") + e.what());
      }
      if (key.size() != 32) bad("trusted keys must be 32 bytes");
      c.trusted_keys.push_back(std::move(key));
    }
  }
  if (j.contains("timeout_ms")) c.timeout_ms = get_u64(j, "timeout_ms");
  return c;
}

}  // namespace riga::core

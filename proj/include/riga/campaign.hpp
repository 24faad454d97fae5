#pragma once

// Campaign file: everything a bot needs to regenerate the RIGA stream.
//
//   { "prime": "<decimal>",
//     "anchors": [{"counter": n, "cid": "Qm..."}],
//     "domain": {"start": n, "upper": n, "tick_seconds": n},
//     "shuffle_seed": n,
//     "shuffle_rng": "splitmix64-v1",          (optional)
//     "trusted_keys": ["<hex ed25519 key>"],    (optional)
//     "timeout_ms": n }                          (optional)

#include "riga/rigacore.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riga::core {

struct CampaignAnchor {
  std::uint64_t counter;
  CidV0 cid;
};

struct Campaign {
  BigInt prime;
  std::vector<CampaignAnchor> anchors;
  CounterDomain domain;
  std::uint64_t shuffle_seed = 0;
  std::string shuffle_rng = "splitmix64-v1";
  std::vector<Bytes> trusted_keys;
  std::optional<std::uint64_t> timeout_ms;

  AnchorSet anchor_set() const;
  /// Re-interpolates from the anchor CIDs; the prime must be prime.
  SkewedPrng build_prng() const;
};

Campaign make_campaign(const CampaignPlan& plan, const CounterDomain& domain, std::uint64_t shuffle_seed);

nlohmann::ordered_json campaign_to_json(const Campaign& campaign);
/// Throws RigaError(BadCampaign) with the offending field in the message.
Campaign campaign_from_json(const nlohmann::json& j);

}  // namespace riga::core

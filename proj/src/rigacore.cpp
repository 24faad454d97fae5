#include "riga/rigacore.hpp"

#include "riga/crypto.hpp"
#include "riga/rng.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace riga::core {

namespace {

const BigInt& two_pow_256() {
  static const BigInt v = BigInt(1) << 256;
  return v;
}

constexpr std::uint64_t kMaxMaterializedDomain = std::uint64_t{1} << 26;

}  // namespace

const PrimeField& production_field() {
  static const PrimeField field{BigInt(kProductionPrimeDecimal), 64};
  return field;
}

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateCounter: return "DuplicateCounter";
    case Errc::PrimeTooSmall: return "PrimeTooSmall";
    case Errc::EmptyAnchorSet: return "EmptyAnchorSet";
    case Errc::TooManyAnchors: return "TooManyAnchors";
    case Errc::CounterOutOfDomain: return "CounterOutOfDomain";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidDomain: return "InvalidDomain";
    case Errc::BadCampaign: return "BadCampaign";
  }
  return "Unknown";
}

void CounterDomain::validate() const {
  if (start > upper) {
    throw RigaError(Errc::InvalidDomain, "domain start " + std::to_string(start) +
                                             " exceeds upper " + std::to_string(upper));
  }
  if (upper == std::numeric_limits<std::uint64_t>::max() && start == 0) {
    throw RigaError(Errc::InvalidDomain, "domain covers the whole 64-bit range");
  }
  if (tick_ms == 0) throw RigaError(Errc::InvalidDomain, "tick interval must be positive");
}

AnchorSet::AnchorSet(std::vector<Anchor> anchors, std::size_t max_anchors)
    : anchors_(std::move(anchors)) {
  if (anchors_.empty()) throw RigaError(Errc::EmptyAnchorSet, "at least one anchor is required");
  if (anchors_.size() > max_anchors) {
    throw RigaError(Errc::TooManyAnchors, std::to_string(anchors_.size()) +
                                              " anchors exceed the maximum of " +
                                              std::to_string(max_anchors));
  }
  std::set<std::uint64_t> seen;
  for (const auto& a : anchors_) {
    if (!seen.insert(a.counter).second) {
      throw RigaError(Errc::DuplicateCounter, "counter " + std::to_string(a.counter) + " is anchored twice");
    }
  }
}

AnchorSet AnchorSet::from_digests(std::span<const std::pair<std::uint64_t, Digest256>> anchors,
                                  std::size_t max_anchors) {
  std::vector<Anchor> out;
  out.reserve(anchors.size());
  for (const auto& [counter, digest] : anchors) out.push_back(Anchor{counter, digest.to_value()});
  return AnchorSet(std::move(out), max_anchors);
}

void AnchorSet::check_domain(const CounterDomain& domain) const {
  for (const auto& a : anchors_) {
    if (!domain.contains(a.counter)) {
      throw RigaError(Errc::CounterOutOfDomain,
                      "anchor counter " + std::to_string(a.counter) + " is outside [" +
                          std::to_string(domain.start) + ", " + std::to_string(domain.upper) + "]");
    }
  }
}

SkewedPrng::SkewedPrng(FieldPoly poly, PostProcessor post)
    : poly_(std::move(poly)), post_(std::move(post)) {}

BigInt SkewedPrng::value_at(std::uint64_t counter) const {
  BigInt v = poly_.eval(BigInt(counter)).value;
  if (post_) v = post_(v);
  // Only values in [2^256, p) are affected; anchors are always below 2^256.
  return v % two_pow_256();
}

SkewedPrng build_skewed_prng(const AnchorSet& anchors, const PrimeField& field) {
  std::vector<modfield::Point> points;
  points.reserve(anchors.size());
  for (const auto& a : anchors.anchors()) {
    if (a.value >= field.modulus()) {
      throw RigaError(Errc::PrimeTooSmall, "prime does not exceed the anchor value at counter " +
                                               std::to_string(a.counter));
    }
    // Counters are reduced into the field; distinct counters stay distinct
    // as long as the domain is smaller than p.
    points.push_back(modfield::Point{field.reduce(BigInt(a.counter)), field.canonical(a.value)});
  }
  try {
    return SkewedPrng(modfield::lagrange_interpolate(points, field));
  } catch (const modfield::FieldError& e) {
    if (e.code() == modfield::Errc::DuplicateAbscissa) {
      throw RigaError(Errc::DuplicateCounter, "two counters coincide modulo p");
    }
    throw;
  }
}

UriTick UriStream::iterator::operator*() const {
  return UriTick{counter_, domain_.time_of(counter_), prng_->uri_at(counter_)};
}

UriStream::UriStream(const SkewedPrng& prng, CounterDomain domain) : prng_(&prng), domain_(domain) {
  domain_.validate();
}

std::vector<std::uint64_t> seeded_permutation(const CounterDomain& domain, std::uint64_t seed) {
  domain.validate();
  if (domain.size() > kMaxMaterializedDomain) {
    throw RigaError(Errc::InvalidDomain, "domain too large to materialize a visit order");
  }
  std::vector<std::uint64_t> order(domain.size());
  for (std::uint64_t i = 0; i < order.size(); ++i) order[i] = domain.start + i;
  SplitMix64 gen(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

NameRiga::NameRiga(SkewedPrng prng, CounterDomain domain, std::vector<std::uint64_t> visit_order)
    : prng_(std::move(prng)), domain_(domain), visit_order_(std::move(visit_order)) {}

NameRiga::Step NameRiga::at_step(std::size_t index) const {
  const std::uint64_t counter = visit_order_.at(index);
  const BigInt v = prng_.value_at(counter);
  const Digest256 name = Digest256::from_value(v);
  return Step{index, counter, name, CidV0(name)};
}

NameRiga build_name_riga(const AnchorSet& name_anchors, const PrimeField& field,
                         const CounterDomain& domain, std::uint64_t shuffle_seed) {
  name_anchors.check_domain(domain);
  SkewedPrng prng = build_skewed_prng(name_anchors, field);
  return NameRiga(std::move(prng), domain, seeded_permutation(domain, shuffle_seed));
}

CampaignPlan plan_campaign(std::span<const Bytes> payloads, std::span<const std::uint64_t> counters,
                           const PrimeField& field) {
  if (payloads.size() != counters.size()) {
    throw RigaError(Errc::LengthMismatch, std::to_string(payloads.size()) + " payloads but " +
                                              std::to_string(counters.size()) + " counters");
  }
  std::vector<Anchor> anchors;
  std::vector<CidV0> cids;
  anchors.reserve(payloads.size());
  cids.reserve(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    const Digest256 digest = crypto::sha256(payloads[i]);
    anchors.push_back(Anchor{counters[i], digest.to_value()});
    cids.emplace_back(digest);
  }
  SkewedPrng prng = build_skewed_prng(AnchorSet(std::move(anchors)), field);
  return CampaignPlan{std::move(prng), std::move(cids),
                      std::vector<std::uint64_t>(counters.begin(), counters.end())};
}

}  // namespace riga::core

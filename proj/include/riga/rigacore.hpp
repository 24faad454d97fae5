#pragma once

// Resource identifier generation: a skewed PRNG built by interpolating a
// polynomial over GF(p) through attacker-chosen (counter, digest) anchors,
// mapped to CIDv0 content addresses. Also the mutable-name variant that
// sweeps the counter domain in a seeded random order.

#include "riga/cidcodec.hpp"
#include "riga/modfield.hpp"

#include <cstdint>
#include <functional>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riga::core {

using cid::Bytes;
using cid::CidV0;
using cid::Digest256;
using modfield::BigInt;
using modfield::FieldPoly;
using modfield::PrimeField;

/// 2^256 + 297, the smallest prime above 2^256.
inline constexpr const char* kProductionPrimeDecimal =
    "115792089237316195423570985008687907853269984665640564039457584007913129640233";

/// The production field, primality-checked with 64 rounds on first use.
const PrimeField& production_field();

enum class Errc {
  DuplicateCounter,
  PrimeTooSmall,
  EmptyAnchorSet,
  TooManyAnchors,
  CounterOutOfDomain,
  LengthMismatch,
  InvalidDomain,
  BadCampaign,
};

const char* to_string(Errc code) noexcept;

class RigaError : public std::runtime_error {
 public:
  RigaError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Counters start..upper inclusive; one counter per tick of simulated time.
struct CounterDomain {
  std::uint64_t start = 0;
  std::uint64_t upper = std::uint64_t{1} << 20;
  std::uint64_t tick_ms = 2000;

  /// Throws InvalidDomain.
  void validate() const;
  std::uint64_t size() const noexcept { return upper - start + 1; }
  bool contains(std::uint64_t counter) const noexcept { return counter >= start && counter <= upper; }
  std::uint64_t time_of(std::uint64_t counter) const noexcept { return (counter - start) * tick_ms; }

  friend bool operator==(const CounterDomain&, const CounterDomain&) = default;
};

struct Anchor {
  std::uint64_t counter;
  BigInt value;
};

class AnchorSet {
 public:
  static constexpr std::size_t kDefaultMaxAnchors = 64;

  /// Throws EmptyAnchorSet, TooManyAnchors or DuplicateCounter.
  explicit AnchorSet(std::vector<Anchor> anchors, std::size_t max_anchors = kDefaultMaxAnchors);

  static AnchorSet from_digests(std::span<const std::pair<std::uint64_t, Digest256>> anchors,
                                std::size_t max_anchors = kDefaultMaxAnchors);

  const std::vector<Anchor>& anchors() const noexcept { return anchors_; }
  std::size_t size() const noexcept { return anchors_.size(); }

  /// Throws CounterOutOfDomain.
  void check_domain(const CounterDomain& domain) const;

 private:
  std::vector<Anchor> anchors_;
};

/// Maps counters to 256-bit values that hit every anchor exactly.
class SkewedPrng {
 public:
  /// Applied to the raw field value before the 2^256 reduction. The empty
  /// function is the identity; anything else may break anchor exactness.
  using PostProcessor = std::function<BigInt(const BigInt&)>;

  SkewedPrng(FieldPoly poly, PostProcessor post = {});

  const FieldPoly& polynomial() const noexcept { return poly_; }
  const BigInt& prime() const noexcept { return poly_.prime(); }
  static constexpr unsigned hash_bits() noexcept { return 256; }

  /// f(counter) mod 2^256.
  BigInt value_at(std::uint64_t counter) const;
  CidV0 uri_at(std::uint64_t counter) const { return cid::cid_from_value(value_at(counter)); }

 private:
  FieldPoly poly_;
  PostProcessor post_;
};

/// Throws DuplicateCounter (via AnchorSet) or PrimeTooSmall.
SkewedPrng build_skewed_prng(const AnchorSet& anchors, const PrimeField& field);

inline CidV0 uri_at(const SkewedPrng& prng, std::uint64_t counter) { return prng.uri_at(counter); }

struct UriTick {
  std::uint64_t counter;
  std::uint64_t sim_time_ms;
  CidV0 cid;
};

/// Lazy, single-pass sequence of uri_at over a counter domain.
class UriStream {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = UriTick;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    UriTick operator*() const;
    iterator& operator++() {
      if (counter_ == domain_.upper) done_ = true;
      else ++counter_;
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& it, std::default_sentinel_t) { return it.done_; }

   private:
    friend class UriStream;
    iterator(const SkewedPrng* prng, CounterDomain domain)
        : prng_(prng), domain_(domain), counter_(domain.start) {}

    const SkewedPrng* prng_ = nullptr;
    CounterDomain domain_{};
    std::uint64_t counter_ = 0;
    bool done_ = false;
  };

  UriStream(const SkewedPrng& prng, CounterDomain domain);

  iterator begin() const { return iterator(prng_, domain_); }
  std::default_sentinel_t end() const noexcept { return {}; }
  std::uint64_t size() const noexcept { return domain_.size(); }

 private:
  const SkewedPrng* prng_;
  CounterDomain domain_;
};

inline UriStream uri_stream(const SkewedPrng& prng, const CounterDomain& domain) {
  return UriStream(prng, domain);
}

/// Fisher-Yates shuffle of [start, upper] driven by splitmix64-v1.
std::vector<std::uint64_t> seeded_permutation(const CounterDomain& domain, std::uint64_t seed);

/// The mutable-name variant: same interpolation, but anchors are name
/// digests and the domain is visited in a seeded random order.
class NameRiga {
 public:
  struct Step {
    std::size_t index;
    std::uint64_t counter;
    Digest256 name;
    CidV0 text;
  };

  NameRiga(SkewedPrng prng, CounterDomain domain, std::vector<std::uint64_t> visit_order);

  const SkewedPrng& prng() const noexcept { return prng_; }
  const CounterDomain& domain() const noexcept { return domain_; }
  const std::vector<std::uint64_t>& visit_order() const noexcept { return visit_order_; }
  std::size_t steps() const noexcept { return visit_order_.size(); }
  Step at_step(std::size_t index) const;

 private:
  SkewedPrng prng_;
  CounterDomain domain_;
  std::vector<std::uint64_t> visit_order_;
};

/// Domains larger than 2^26 counters are rejected (InvalidDomain) since
/// the visit order is materialized.
NameRiga build_name_riga(const AnchorSet& name_anchors, const PrimeField& field,
                         const CounterDomain& domain, std::uint64_t shuffle_seed);

struct CampaignPlan {
  SkewedPrng prng;
  std::vector<CidV0> anchor_cids;
  std::vector<std::uint64_t> counters;
};

/// Hashes each payload with SHA-256 and forces the PRNG through the
/// digests at the given counters. Nothing is published.
CampaignPlan plan_campaign(std::span<const Bytes> payloads, std::span<const std::uint64_t> counters,
                           const PrimeField& field);

}  // namespace riga::core

#pragma once

// CIDv0 codec: 256-bit value <-> 32-byte digest <-> 34-byte SHA-256
// multihash <-> 46-character Base58 text starting with "Qm".

#include "riga/modfield.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riga::cid {

using Bytes = std::vector<std::uint8_t>;
using BigInt = modfield::BigInt;

inline constexpr std::string_view kBase58Alphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
inline constexpr std::uint8_t kSha256Code = 0x12;
inline constexpr std::uint8_t kSha256Length = 0x20;
inline constexpr std::size_t kCidTextLength = 46;

enum class Errc {
  InvalidCharacter,
  ValueTooLarge,
  BadPrefix,
  BadLength,
};

const char* to_string(Errc code) noexcept;

class CodecError : public std::runtime_error {
 public:
  CodecError(Errc code, const std::string& what, std::size_t index = 0)
      : std::runtime_error(what), code_(code), index_(index) {}
  Errc code() const noexcept { return code_; }
  /// Offending character position for InvalidCharacter.
  std::size_t index() const noexcept { return index_; }

 private:
  Errc code_;
  std::size_t index_;
};

std::string base58_encode(std::span<const std::uint8_t> data);
Bytes base58_decode(std::string_view text);

class Digest256 {
 public:
  static constexpr std::size_t kSize = 32;

  Digest256() = default;
  explicit Digest256(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}
  /// Throws CodecError(BadLength) unless exactly 32 bytes.
  static Digest256 from_bytes(std::span<const std::uint8_t> bytes);
  static Digest256 from_hex(std::string_view hex);

  const std::array<std::uint8_t, kSize>& bytes() const noexcept { return bytes_; }
  std::string hex() const;

  /// Big-endian reading of the 32 bytes.
  BigInt to_value() const;
  /// Throws ValueTooLarge if v >= 2^256.
  static Digest256 from_value(const BigInt& v);

  friend auto operator<=>(const Digest256&, const Digest256&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

class CidV0 {
 public:
  static constexpr std::size_t kMultihashSize = 34;

  explicit CidV0(const Digest256& digest);
  /// Parses "Qm..." text; throws InvalidCharacter, BadLength or BadPrefix.
  static CidV0 parse(std::string_view text);
  /// Throws BadLength or BadPrefix.
  static CidV0 from_multihash(std::span<const std::uint8_t> multihash);

  const std::string& text() const noexcept { return text_; }
  const std::array<std::uint8_t, kMultihashSize>& multihash() const noexcept { return multihash_; }
  Digest256 digest() const;

  friend bool operator==(const CidV0& a, const CidV0& b) { return a.multihash_ == b.multihash_; }
  friend auto operator<=>(const CidV0& a, const CidV0& b) { return a.multihash_ <=> b.multihash_; }

 private:
  CidV0() = default;
  std::array<std::uint8_t, kMultihashSize> multihash_{};
  std::string text_;
};

CidV0 cid_from_value(const BigInt& v);
BigInt cid_to_value(const CidV0& cid);

std::string to_hex(std::span<const std::uint8_t> data);
/// Throws std::invalid_argument on odd length or non-hex digits.
Bytes from_hex(std::string_view hex);

}  // namespace riga::cid

template <>
struct std::hash<riga::cid::CidV0> {
  std::size_t operator()(const riga::cid::CidV0& c) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 2; i < 2 + sizeof(std::size_t); ++i) h = (h << 8) | c.multihash()[i];
    return h;
  }
};

#include "riga/cidcodec.hpp"

#include <algorithm>

namespace riga::cid {

namespace {

constexpr std::array<std::int8_t, 128> make_digit_map() {
  std::array<std::int8_t, 128> map{};
  for (auto& m : map) m = -1;
  for (std::size_t i = 0; i < kBase58Alphabet.size(); ++i) {
    map[static_cast<unsigned char>(kBase58Alphabet[i])] = static_cast<std::int8_t>(i);
  }
  return map;
}

constexpr auto kDigitMap = make_digit_map();

const BigInt& two_pow_256() {
  static const BigInt v = BigInt(1) << 256;
  return v;
}

}  // namespace

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidCharacter: return "InvalidCharacter";
    case Errc::ValueTooLarge: return "ValueTooLarge";
    case Errc::BadPrefix: return "BadPrefix";
    case Errc::BadLength: return "BadLength";
  }
  return "Unknown";
}

std::string base58_encode(std::span<const std::uint8_t> data) {
  std::size_t zeros = 0;
  while (zeros < data.size() && data[zeros] == 0) ++zeros;

  // log(256)/log(58) ~ 1.366, rounded up.
  std::vector<std::uint8_t> digits((data.size() - zeros) * 138 / 100 + 1, 0);
  std::size_t used = 0;
  for (std::size_t i = zeros; i < data.size(); ++i) {
    unsigned carry = data[i];
    std::size_t j = 0;
    for (auto it = digits.rbegin(); (carry != 0 || j < used) && it != digits.rend(); ++it, ++j) {
      carry += 256u * *it;
      *it = static_cast<std::uint8_t>(carry % 58);
      carry /= 58;
    }
    used = j;
  }

  auto first = std::find_if(digits.begin(), digits.end(), [](std::uint8_t d) { return d != 0; });
  std::string out(zeros, '1');
  out.reserve(zeros + static_cast<std::size_t>(digits.end() - first));
  for (auto it = first; it != digits.end(); ++it) out.push_back(kBase58Alphabet[*it]);
  return out;
}

Bytes base58_decode(std::string_view text) {
  std::size_t ones = 0;
  while (ones < text.size() && text[ones] == '1') ++ones;

  // log(58)/log(256) ~ 0.733, rounded up.
  std::vector<std::uint8_t> bytes((text.size() - ones) * 733 / 1000 + 1, 0);
  std::size_t used = 0;
  for (std::size_t i = ones; i < text.size(); ++i) {
    const auto ch = static_cast<unsigned char>(text[i]);
    const int digit = ch < 128 ? kDigitMap[ch] : -1;
    if (digit < 0) {
      throw CodecError(Errc::InvalidCharacter,
                       "invalid Base58 character '" + std::string(1, text[i]) + "' at index " +
                           std::to_string(i),
                       i);
    }
    unsigned carry = static_cast<unsigned>(digit);
    std::size_t j = 0;
    for (auto it = bytes.rbegin(); (carry != 0 || j < used) && it != bytes.rend(); ++it, ++j) {
      carry += 58u * *it;
      *it = static_cast<std::uint8_t>(carry & 0xff);
      carry >>= 8;
    }
    used = j;
  }

  auto first = std::find_if(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b != 0; });
  Bytes out(ones, 0);
  out.insert(out.end(), first, bytes.end());
  return out;
}

Digest256 Digest256::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSize) {
    throw CodecError(Errc::BadLength, "digest must be 32 bytes, got " + std::to_string(bytes.size()));
  }
  std::array<std::uint8_t, kSize> a{};
  std::copy(bytes.begin(), bytes.end(), a.begin());
  return Digest256(a);
}

Digest256 Digest256::from_hex(std::string_view hex) { return from_bytes(cid::from_hex(hex)); }

std::string Digest256::hex() const { return to_hex(bytes_); }

BigInt Digest256::to_value() const {
  BigInt v = 0;
  for (std::uint8_t b : bytes_) {
    v <<= 8;
    v |= b;
  }
  return v;
}

Digest256 Digest256::from_value(const BigInt& v) {
  if (v < 0 || v >= two_pow_256()) {
    throw CodecError(Errc::ValueTooLarge, "value does not fit in 256 bits");
  }
  std::array<std::uint8_t, kSize> a{};
  BigInt rest = v;
  for (std::size_t i = kSize; i > 0; --i) {
    a[i - 1] = static_cast<std::uint8_t>(rest & 0xff);
    rest >>= 8;
  }
  return Digest256(a);
}

CidV0::CidV0(const Digest256& digest) {
  multihash_[0] = kSha256Code;
  multihash_[1] = kSha256Length;
  std::copy(digest.bytes().begin(), digest.bytes().end(), multihash_.begin() + 2);
  text_ = base58_encode(multihash_);
}

CidV0 CidV0::from_multihash(std::span<const std::uint8_t> multihash) {
  if (multihash.size() >= 2 && (multihash[0] != kSha256Code || multihash[1] != kSha256Length)) {
    throw CodecError(Errc::BadPrefix, "multihash header is not sha2-256/32");
  }
  if (multihash.size() != kMultihashSize) {
    throw CodecError(Errc::BadLength,
                     "multihash must be 34 bytes, got " + std::to_string(multihash.size()));
  }
  return CidV0(Digest256::from_bytes(multihash.subspan(2)));
}

CidV0 CidV0::parse(std::string_view text) {
  // Extra leading '1's change the decoded length, so accepted text is canonical.
  return from_multihash(base58_decode(text));
}

Digest256 CidV0::digest() const {
  return Digest256::from_bytes(std::span<const std::uint8_t>(multihash_).subspan(2));
}

CidV0 cid_from_value(const BigInt& v) { return CidV0(Digest256::from_value(v)); }

BigInt cid_to_value(const CidV0& cid) { return cid.digest().to_value(); }

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument(std::string("invalid hex digit '") + c + "'");
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  }
  return out;
}

}  // namespace riga::cid

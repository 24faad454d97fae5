#include "riga/cidcodec.hpp"

#include "doctest.h"

#include <random>

using namespace riga::cid;

namespace {

// A CID seen in a real gateway request.
constexpr const char* kRealCid = "Qmc8N5wtMkvMySqxu4Agy2SGvL2zxYGf4rWmHvMASoUQv6";

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

BigInt random_value(std::mt19937_64& rng) {
  BigInt v = 0;
  // Mix in short values so leading zero bytes are exercised.
  const int words = 1 + static_cast<int>(rng() % 4);
  for (int w = 0; w < words; ++w) v = (v << 64) | BigInt(rng());
  return v;
}

}  // namespace

TEST_CASE("base58 examples") {
  CHECK(base58_encode(Bytes{}).empty());
  CHECK(base58_decode("").empty());
  // Frozen from tests/oracles/compute_oracles.py.
  CHECK(base58_encode(Bytes{0x00}) == "1");
  CHECK(base58_encode(Bytes{0x00, 0x00, 0x01}) == "112");
  CHECK(base58_encode(Bytes{57}) == "z");
  CHECK(base58_encode(Bytes{58}) == "21");
}

TEST_CASE("base58_decode rejects characters outside the alphabet") {
  for (const char* bad : {"Qm0abc", "QmOabc", "QmIabc", "Qmlabc"}) {
    try {
      base58_decode(bad);
      FAIL("expected InvalidCharacter");
    } catch (const CodecError& e) {
      CHECK(e.code() == Errc::InvalidCharacter);
      CHECK(e.index() == 2);
    }
  }
  CHECK_THROWS_AS(base58_decode("Qm\xc3\xa9"), CodecError);
}

TEST_CASE("base58 round-trips random byte strings") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10000; ++i) {
    const Bytes data = random_bytes(rng, rng() % 65);
    CHECK(base58_decode(base58_encode(data)) == data);
  }
}

TEST_CASE("leading zero bytes map to leading '1's") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 500; ++i) {
    Bytes s = random_bytes(rng, rng() % 40);
    Bytes z{0x00};
    z.insert(z.end(), s.begin(), s.end());
    CHECK(base58_encode(z) == "1" + base58_encode(s));
  }
}

TEST_CASE("a real gateway CID decodes to a sha2-256 multihash") {
  const Bytes mh = base58_decode(kRealCid);
  REQUIRE(mh.size() == 34);
  CHECK(mh[0] == 0x12);
  CHECK(mh[1] == 0x20);
  CHECK(to_hex(mh) == "1220ccddd9e0257a5a7729f867cd85e0ff56150fb577084da4e01813fb0a95b3393b");
  CHECK(base58_encode(mh) == kRealCid);

  const CidV0 cid = CidV0::parse(kRealCid);
  const BigInt v = cid_to_value(cid);
  CHECK(v == BigInt("92663798034234561212244336879083124971744011488086798241867482344937642735931"));
  CHECK(cid_from_value(v).text() == kRealCid);
}

TEST_CASE("cid_from_value examples") {
  const CidV0 zero = cid_from_value(0);
  CHECK(zero.multihash()[0] == 0x12);
  CHECK(zero.multihash()[1] == 0x20);
  for (std::size_t i = 2; i < 34; ++i) CHECK(zero.multihash()[i] == 0);
  CHECK(zero.text() == "QmNLei78zWmzUdbeRB3CiUfAizWUrbeeZh5K1rhAQKCh51");
  CHECK(cid_to_value(zero) == 0);

  const BigInt max = (BigInt(1) << 256) - 1;
  CHECK(cid_to_value(cid_from_value(max)) == max);
  try {
    cid_from_value(BigInt(1) << 256);
    FAIL("expected ValueTooLarge");
  } catch (const CodecError& e) {
    CHECK(e.code() == Errc::ValueTooLarge);
  }
}

TEST_CASE("cid values round-trip and keep the Qm format") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 10000; ++i) {
    const BigInt v = random_value(rng);
    const CidV0 cid = cid_from_value(v);
    REQUIRE(cid.text().size() == 46);
    CHECK(cid.text().rfind("Qm", 0) == 0);
    CHECK(cid_to_value(cid) == v);
    CHECK(CidV0::parse(cid.text()) == cid);
  }
}

TEST_CASE("out-of-format identifiers are rejected") {
  auto code_of = [](const char* text) {
    try {
      CidV0::parse(text);
    } catch (const CodecError& e) {
      return e.code();
    }
    FAIL("parse accepted " << text);
    return Errc::BadLength;
  };
  // CIDv1 in base32: 'l' and '0' are not Base58, anything else fails the header.
  const Errc v1 = code_of("bafybeigdyrzt5sfp7udm7hu76uh7y26nf3efuylqabf3oclgtqy55fbzdi");
  CHECK((v1 == Errc::BadPrefix || v1 == Errc::InvalidCharacter));
  // Valid Base58, wrong multihash header (sha1 code 0x11).
  Bytes sha1(34, 0);
  sha1[0] = 0x11;
  sha1[1] = 0x20;
  CHECK(code_of(base58_encode(sha1).c_str()) == Errc::BadPrefix);
  // Right header, truncated digest.
  Bytes shortened(33, 0x07);
  shortened[0] = 0x12;
  shortened[1] = 0x20;
  CHECK(code_of(base58_encode(shortened).c_str()) == Errc::BadLength);
  CHECK(code_of("1QmNLei78zWmzUdbeRB3CiUfAizWUrbeeZh5K1rhAQKCh51") == Errc::BadPrefix);
}

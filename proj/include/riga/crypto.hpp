#pragma once

// Hashing and signatures used by the simulator. SHA-256 is the content
// address function; Ed25519 provides deterministic key derivation from a
// seed so that every simulated identity is reproducible.

#include "riga/cidcodec.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

namespace riga::crypto {

using cid::Bytes;
using cid::Digest256;

class CryptoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for keys of the wrong size or that OpenSSL refuses.
class MalformedKey : public CryptoError {
 public:
  using CryptoError::CryptoError;
};

Digest256 sha256(std::span<const std::uint8_t> data);
Digest256 sha256(std::string_view text);

struct KeyPair {
  Bytes public_key;   // 32 bytes
  Bytes private_key;  // 32-byte Ed25519 seed

  friend bool operator==(const KeyPair&, const KeyPair&) = default;
};

using Seed = std::array<std::uint8_t, 32>;

KeyPair keypair_from_seed(const Seed& seed);

/// SHA-256(master seed as 8 big-endian bytes || label).
Seed derive_seed(std::uint64_t master_seed, std::string_view label);

Bytes sign(std::span<const std::uint8_t> private_key, std::span<const std::uint8_t> message);

/// False for bad signatures and for malformed keys alike.
bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> signature);

/// True when `private_key` is the signing half of `public_key`.
bool key_matches(const KeyPair& keys);

}  // namespace riga::crypto

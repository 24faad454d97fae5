#include "riga/crypto.hpp"

#include <openssl/evp.h>

#include <memory>
#include <string>

namespace riga::crypto {

namespace {

constexpr std::size_t kEd25519KeySize = 32;
constexpr std::size_t kEd25519SigSize = 64;

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const noexcept { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const noexcept { EVP_MD_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

PkeyPtr private_pkey(std::span<const std::uint8_t> private_key) {
  if (private_key.size() != kEd25519KeySize) {
    throw MalformedKey("Ed25519 private key must be 32 bytes, got " +
                       std::to_string(private_key.size()));
  }
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, private_key.data(),
                                           private_key.size()));
  if (!key) throw MalformedKey("OpenSSL rejected the Ed25519 private key");
  return key;
}

}  // namespace

Digest256 sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw CryptoError("SHA-256 failed");
  }
  return Digest256(out);
}

Digest256 sha256(std::string_view text) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

KeyPair keypair_from_seed(const Seed& seed) {
  PkeyPtr key = private_pkey(seed);
  Bytes pub(kEd25519KeySize);
  std::size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1 || len != kEd25519KeySize) {
    throw CryptoError("could not derive Ed25519 public key");
  }
  return KeyPair{std::move(pub), Bytes(seed.begin(), seed.end())};
}

Seed derive_seed(std::uint64_t master_seed, std::string_view label) {
  Bytes buf;
  buf.reserve(8 + label.size());
  for (int shift = 56; shift >= 0; shift -= 8) buf.push_back(static_cast<std::uint8_t>(master_seed >> shift));
  buf.insert(buf.end(), label.begin(), label.end());
  return sha256(buf).bytes();
}

Bytes sign(std::span<const std::uint8_t> private_key, std::span<const std::uint8_t> message) {
  PkeyPtr key = private_pkey(private_key);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    throw CryptoError("EVP_DigestSignInit failed");
  }
  Bytes sig(kEd25519SigSize);
  std::size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != kEd25519SigSize) {
    throw CryptoError("Ed25519 signing failed");
  }
  return sig;
}

bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> signature) {
  if (public_key.size() != kEd25519KeySize || signature.size() != kEd25519SigSize) return false;
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                          public_key.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

bool key_matches(const KeyPair& keys) {
  if (keys.private_key.size() != kEd25519KeySize) return false;
  Seed seed{};
  std::copy(keys.private_key.begin(), keys.private_key.end(), seed.begin());
  return keypair_from_seed(seed).public_key == keys.public_key;
}

}  // namespace riga::crypto

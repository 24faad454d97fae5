#pragma once

// In-memory model of a content-addressed P2P store: immutable objects of at
// most one 256 KB block plus links, provider (seeder) sets maintained by
// pinning, node identities derived from public keys, and a registry of
// mutable names that resolve to the latest published CID.
//
// Simulator CIDs are SHA-256 over the raw bytes (or, for a chunked root,
// over the concatenated child multihashes). Real IPFS hashes a UnixFS
// protobuf encoding, so these CIDs never match the live network's.

#include "riga/cidcodec.hpp"
#include "riga/crypto.hpp"

#include "json.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riga::store {

using cid::Bytes;
using cid::CidV0;
using cid::Digest256;

inline constexpr std::size_t kBlockSize = 262144;

enum class Errc {
  UnknownNode,
  NotFound,
  NotPinned,
  UnknownName,
  Unauthorized,
};

const char* to_string(Errc code) noexcept;

class StoreError : public std::runtime_error {
 public:
  StoreError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct StoredObject {
  Bytes data;
  std::vector<CidV0> links;

  /// The bytes whose SHA-256 is this object's address.
  Bytes addressed_bytes() const;
};

/// A node is identified by the hash of its public key.
class NodeId {
 public:
  explicit NodeId(Bytes public_key);

  const Digest256& id() const noexcept { return id_; }
  const Bytes& public_key() const noexcept { return public_key_; }

  friend bool operator==(const NodeId& a, const NodeId& b) { return a.id_ == b.id_; }
  friend auto operator<=>(const NodeId& a, const NodeId& b) { return a.id_ <=> b.id_; }

 private:
  Digest256 id_;
  Bytes public_key_;
};

/// A node together with its private key, held by whichever agent owns it.
struct Identity {
  NodeId node;
  crypto::KeyPair keys;

  static Identity from_seed(const crypto::Seed& seed);
};

struct NameRecord {
  Digest256 name;
  CidV0 current;
  std::uint64_t version;
};

/// The CID put_object would return for `content`, without storing it.
CidV0 content_address(std::span<const std::uint8_t> content);

/// Name of the record a key pair may publish: SHA-256 of its public key.
Digest256 name_of(const crypto::KeyPair& keys);

enum class SnapshotView {
  /// Only content that is still fetchable, with its providers.
  Analyst,
  /// Everything the simulator knows, including unavailable objects.
  Omniscient,
};

class Store {
 public:
  void register_node(const NodeId& node);
  bool is_registered(const NodeId& node) const;

  /// Content above kBlockSize is split into chunk objects under a root
  /// object holding only links. The uploader becomes a provider of every
  /// object involved. Throws UnknownNode.
  CidV0 put_object(const NodeId& node, std::span<const std::uint8_t> content);

  /// Reassembles chunked content. Throws NotFound if the object (or any
  /// chunk) was never stored or has no providers left.
  Bytes get_object(const CidV0& cid) const;
  std::optional<Bytes> try_get(const CidV0& cid) const;
  bool is_available(const CidV0& cid) const;
  const StoredObject* find_object(const CidV0& cid) const;

  /// Pinning a root pins its chunks too. Throws NotFound when the content
  /// is not currently fetchable, UnknownNode for unregistered nodes.
  std::size_t pin(const NodeId& node, const CidV0& cid);
  /// Throws NotPinned if `node` is not a provider of `cid`.
  std::size_t unpin(const NodeId& node, const CidV0& cid);

  std::set<NodeId> providers(const CidV0& cid) const;

  /// Throws Unauthorized (record unchanged) unless `keys` hashes to `name`
  /// and its private half matches.
  NameRecord publish_name(const Digest256& name, const crypto::KeyPair& keys, const CidV0& cid);
  NameRecord publish_name(const crypto::KeyPair& keys, const CidV0& cid) {
    return publish_name(name_of(keys), keys, cid);
  }
  /// Throws UnknownName.
  CidV0 resolve_name(const Digest256& name) const;
  std::optional<NameRecord> name_record(const Digest256& name) const;

  std::size_t object_count() const noexcept { return objects_.size(); }

  nlohmann::ordered_json snapshot(SnapshotView view = SnapshotView::Analyst) const;

 private:
  CidV0 store_block(const NodeId& node, StoredObject object);
  void add_provider(const CidV0& cid, const Digest256& node);
  bool remove_provider(const CidV0& cid, const Digest256& node);
  void require_node(const NodeId& node) const;

  std::map<Digest256, NodeId> nodes_;
  std::map<CidV0, StoredObject> objects_;
  std::map<CidV0, std::set<Digest256>> providers_;
  std::map<Digest256, NameRecord> names_;
};

}  // namespace riga::store

#include "riga/storesim.hpp"

#include <algorithm>

namespace riga::store {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NotFound: return "NotFound";
    case Errc::NotPinned: return "NotPinned";
    case Errc::UnknownName: return "UnknownName";
    case Errc::Unauthorized: return "Unauthorized";
  }
  return "Unknown";
}

Bytes StoredObject::addressed_bytes() const {
  if (links.empty()) return data;
  Bytes out;
  out.reserve(links.size() * CidV0::kMultihashSize);
  for (const auto& l : links) out.insert(out.end(), l.multihash().begin(), l.multihash().end());
  return out;
}

NodeId::NodeId(Bytes public_key) : id_(crypto::sha256(public_key)), public_key_(std::move(public_key)) {}

Identity Identity::from_seed(const crypto::Seed& seed) {
  crypto::KeyPair keys = crypto::keypair_from_seed(seed);
  return Identity{NodeId(keys.public_key), std::move(keys)};
}

CidV0 content_address(std::span<const std::uint8_t> content) {
  if (content.size() <= kBlockSize) return CidV0(crypto::sha256(content));
  StoredObject root;
  for (std::size_t off = 0; off < content.size(); off += kBlockSize) {
    root.links.emplace_back(crypto::sha256(content.subspan(off, std::min(kBlockSize, content.size() - off))));
  }
  return CidV0(crypto::sha256(root.addressed_bytes()));
}

Digest256 name_of(const crypto::KeyPair& keys) { return crypto::sha256(keys.public_key); }

void Store::register_node(const NodeId& node) { nodes_.emplace(node.id(), node); }

bool Store::is_registered(const NodeId& node) const { return nodes_.contains(node.id()); }

void Store::require_node(const NodeId& node) const {
  if (!is_registered(node)) throw StoreError(Errc::UnknownNode, "node " + node.id().hex() + " is not registered");
}

void Store::add_provider(const CidV0& cid, const Digest256& node) { providers_[cid].insert(node); }

bool Store::remove_provider(const CidV0& cid, const Digest256& node) {
  auto it = providers_.find(cid);
  if (it == providers_.end() || it->second.erase(node) == 0) return false;
  if (it->second.empty()) providers_.erase(it);
  return true;
}

CidV0 Store::store_block(const NodeId& node, StoredObject object) {
  const CidV0 cid(crypto::sha256(object.addressed_bytes()));
  objects_.try_emplace(cid, std::move(object));
  add_provider(cid, node.id());
  return cid;
}

CidV0 Store::put_object(const NodeId& node, std::span<const std::uint8_t> content) {
  require_node(node);
  if (content.size() <= kBlockSize) {
    return store_block(node, StoredObject{Bytes(content.begin(), content.end()), {}});
  }
  StoredObject root;
  for (std::size_t off = 0; off < content.size(); off += kBlockSize) {
    const auto chunk = content.subspan(off, std::min(kBlockSize, content.size() - off));
    root.links.push_back(store_block(node, StoredObject{Bytes(chunk.begin(), chunk.end()), {}}));
  }
  return store_block(node, std::move(root));
}

const StoredObject* Store::find_object(const CidV0& cid) const {
  auto it = objects_.find(cid);
  return it == objects_.end() ? nullptr : &it->second;
}

bool Store::is_available(const CidV0& cid) const {
  const StoredObject* obj = find_object(cid);
  if (obj == nullptr || !providers_.contains(cid)) return false;
  return std::all_of(obj->links.begin(), obj->links.end(), [this](const CidV0& l) { return is_available(l); });
}

std::optional<Bytes> Store::try_get(const CidV0& cid) const {
  if (!is_available(cid)) return std::nullopt;
  const StoredObject& obj = objects_.at(cid);
  if (obj.links.empty()) return obj.data;
  Bytes out;
  for (const auto& l : obj.links) {
    const Bytes& part = objects_.at(l).data;
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Bytes Store::get_object(const CidV0& cid) const {
  auto content = try_get(cid);
  if (!content) throw StoreError(Errc::NotFound, "no provider serves " + cid.text());
  return std::move(*content);
}

std::size_t Store::pin(const NodeId& node, const CidV0& cid) {
  require_node(node);
  if (!is_available(cid)) throw StoreError(Errc::NotFound, "cannot pin unavailable content " + cid.text());
  for (const auto& l : objects_.at(cid).links) add_provider(l, node.id());
  add_provider(cid, node.id());
  return providers_.at(cid).size();
}

std::size_t Store::unpin(const NodeId& node, const CidV0& cid) {
  if (!remove_provider(cid, node.id())) {
    throw StoreError(Errc::NotPinned, "node " + node.id().hex() + " does not provide " + cid.text());
  }
  if (const StoredObject* obj = find_object(cid)) {
    for (const auto& l : obj->links) remove_provider(l, node.id());
  }
  auto it = providers_.find(cid);
  return it == providers_.end() ? 0 : it->second.size();
}

std::set<NodeId> Store::providers(const CidV0& cid) const {
  std::set<NodeId> out;
  auto it = providers_.find(cid);
  if (it == providers_.end()) return out;
  for (const auto& id : it->second) out.insert(nodes_.at(id));
  return out;
}

NameRecord Store::publish_name(const Digest256& name, const crypto::KeyPair& keys, const CidV0& cid) {
  if (name_of(keys) != name || !crypto::key_matches(keys)) {
    throw StoreError(Errc::Unauthorized, "key does not own name " + name.hex());
  }
  auto it = names_.find(name);
  if (it == names_.end()) {
    it = names_.emplace(name, NameRecord{name, cid, 1}).first;
  } else {
    it->second.current = cid;
    ++it->second.version;
  }
  return it->second;
}

CidV0 Store::resolve_name(const Digest256& name) const {
  auto it = names_.find(name);
  if (it == names_.end()) throw StoreError(Errc::UnknownName, "name " + name.hex() + " was never published");
  return it->second.current;
}

std::optional<NameRecord> Store::name_record(const Digest256& name) const {
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

nlohmann::ordered_json Store::snapshot(SnapshotView view) const {
  nlohmann::ordered_json j;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& [cid, obj] : objects_) {
    const bool available = is_available(cid);
    if (view == SnapshotView::Analyst && !available) continue;
    nlohmann::ordered_json o;
    o["cid"] = cid.text();
    o["size"] = obj.data.size();
    auto links = nlohmann::ordered_json::array();
    for (const auto& l : obj.links) links.push_back(l.text());
    o["links"] = std::move(links);
    o["available"] = available;
    auto provs = nlohmann::ordered_json::array();
    if (auto it = providers_.find(cid); it != providers_.end()) {
      for (const auto& id : it->second) provs.push_back(id.hex());
    }
    o["providers"] = std::move(provs);
    objects.push_back(std::move(o));
  }
  j["objects"] = std::move(objects);

  auto names = nlohmann::ordered_json::array();
  for (const auto& [name, rec] : names_) {
    names.push_back({{"name", name.hex()}, {"current", rec.current.text()}, {"version", rec.version}});
  }
  j["names"] = std::move(names);

  if (view == SnapshotView::Omniscient) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& [id, node] : nodes_) {
      nodes.push_back({{"id", id.hex()}, {"public_key", cid::to_hex(node.public_key())}});
    }
    j["nodes"] = std::move(nodes);
  }
  return j;
}

}  // namespace riga::store

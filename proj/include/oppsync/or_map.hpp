// Copyright 2026 The oppsync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>

#include <json.hpp>

#include "oppsync/crdt.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/// Map values are restricted to simple types.
using MapValue = std::variant<std::int64_t, std::string>;

enum class MapSemantics : std::uint8_t { set_wins = 0, del_wins = 1 };

/**
 * Observed-remove map with explicit tombstones.
 *
 * Every set and every delete is recorded as a uniquely tagged operation on a
 * key. Issuing an operation on a key tombstones all operations on that key
 * the issuer currently observes, so the operations that remain live for a key
 * are exactly the mutually concurrent ones. Reading a key resolves them:
 *
 *  - set-wins: any live set makes the key present;
 *  - del-wins: any live delete makes the key absent.
 *
 * Several live sets resolve to the greatest (value, tag) pair.
 *
 * Blob layout (little-endian, ascending tag order everywhere):
 *
 *     "ORM1" | u8 semantics
 *     u32 n_ops  | n_ops × (str replica, u64 seq, str key, u8 kind,
 *                           [kind==set: u8 vtype, (u64 int | str)])
 *     u32 n_tomb | n_tomb × (str replica, u64 seq)
 *
 * where str is u32 length + bytes, kind is 0=set/1=del and vtype 0=int/1=str.
 * Tombstoned operation bodies are dropped; only their tags are kept.
 */
class ObservedRemoveMap final : public CrdtFacade {
 public:
  struct Tag {
    ReplicaId replica;
    std::uint64_t seq = 0;
    friend auto operator<=>(const Tag&, const Tag&) = default;
  };

  explicit ObservedRemoveMap(MapSemantics semantics = MapSemantics::set_wins)
      : semantics_(semantics) {}

  MapSemantics semantics() const { return semantics_; }

  void set(const std::string& key, MapValue value, const ReplicaId& issuer) {
    supersede(key);
    add_op(next_tag(issuer), Op{key, Kind::set, std::move(value)});
    notify_update();
  }

  /// Deleting a key that is not currently present is a no-op.
  void del(const std::string& key, const ReplicaId& issuer) {
    if (!get(key)) return;
    supersede(key);
    add_op(next_tag(issuer), Op{key, Kind::del, MapValue{}});
    notify_update();
  }

  std::optional<MapValue> get(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    const Op* winner = nullptr;
    const Tag* winner_tag = nullptr;
    bool deleted = false;
    for (const auto& tag : it->second) {
      const Op& op = ops_.at(tag);
      if (op.kind == Kind::del) {
        deleted = true;
        continue;
      }
      if (winner == nullptr || std::tie(op.value, tag) > std::tie(winner->value, *winner_tag)) {
        winner = &op;
        winner_tag = &tag;
      }
    }
    if (winner == nullptr) return std::nullopt;
    if (deleted && semantics_ == MapSemantics::del_wins) return std::nullopt;
    return winner->value;
  }

  /// Present entries, sorted by key.
  std::map<std::string, MapValue> entries() const {
    std::map<std::string, MapValue> out;
    for (const auto& [key, tags] : by_key_) {
      if (auto v = get(key)) out.emplace(key, *v);
    }
    return out;
  }

  std::size_t live_op_count() const { return ops_.size(); }
  std::size_t tombstone_count() const { return tombstones_.size(); }

  SerializedState serialized_state() const override {
    codec::Writer w;
    w.magic("ORM1");
    w.u8(static_cast<std::uint8_t>(semantics_));
    w.u32(static_cast<std::uint32_t>(ops_.size()));
    for (const auto& [tag, op] : ops_) {
      w.str(tag.replica);
      w.u64(tag.seq);
      w.str(op.key);
      w.u8(static_cast<std::uint8_t>(op.kind));
      if (op.kind == Kind::set) {
        if (const auto* i = std::get_if<std::int64_t>(&op.value)) {
          w.u8(0);
          w.u64(static_cast<std::uint64_t>(*i));
        } else {
          w.u8(1);
          w.str(std::get<std::string>(op.value));
        }
      }
    }
    w.u32(static_cast<std::uint32_t>(tombstones_.size()));
    for (const auto& tag : tombstones_) {
      w.str(tag.replica);
      w.u64(tag.seq);
    }
    return SerializedState(w.take());
  }

  void merge_serialized_state(const SerializedState& blob) override { merge(decode(blob)); }

  void merge(const ObservedRemoveMap& other) {
    if (other.semantics_ != semantics_) throw DecodeError("map semantics mismatch");
    for (const auto& tag : other.tombstones_) tombstone(tag);
    for (const auto& [tag, op] : other.ops_) {
      if (tombstones_.count(tag) == 0 && ops_.count(tag) == 0) add_op(tag, op);
    }
  }

  static ObservedRemoveMap decode(const SerializedState& blob) {
    codec::Reader r(blob.bytes());
    r.expect_magic("ORM1");
    const auto sem = r.u8();
    if (sem > 1) throw DecodeError("unknown map semantics");
    ObservedRemoveMap out(static_cast<MapSemantics>(sem));
    const auto n_ops = r.u32();
    for (std::uint32_t i = 0; i < n_ops; ++i) {
      Tag tag = read_tag(r);
      Op op;
      op.key = r.str();
      const auto kind = r.u8();
      if (kind > 1) throw DecodeError("unknown op kind");
      op.kind = static_cast<Kind>(kind);
      if (op.kind == Kind::set) {
        const auto vtype = r.u8();
        if (vtype == 0) {
          op.value = static_cast<std::int64_t>(r.u64());
        } else if (vtype == 1) {
          op.value = r.str();
        } else {
          throw DecodeError("unknown value type");
        }
      }
      if (!out.ops_.empty() && !(out.ops_.rbegin()->first < tag)) {
        throw DecodeError("ops not in canonical order");
      }
      out.add_op(std::move(tag), std::move(op));
    }
    const auto n_tomb = r.u32();
    for (std::uint32_t i = 0; i < n_tomb; ++i) {
      Tag tag = read_tag(r);
      if (!out.tombstones_.empty() && !(*out.tombstones_.rbegin() < tag)) {
        throw DecodeError("tombstones not in canonical order");
      }
      if (out.ops_.count(tag) != 0) throw DecodeError("tombstoned op still live");
      out.note_seq(tag);
      out.tombstones_.insert(std::move(tag));
    }
    r.expect_end();
    return out;
  }

  /// Debug rendering: {"semantics": "...", "entries": {key: value, ...}}.
  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [key, value] : this->entries()) {
      std::visit([&](const auto& v) { entries[key] = v; }, value);
    }
    return {{"semantics", semantics_ == MapSemantics::set_wins ? "set-wins" : "del-wins"},
            {"entries", entries}};
  }

  friend bool operator==(const ObservedRemoveMap& a, const ObservedRemoveMap& b) {
    return a.semantics_ == b.semantics_ && a.ops_ == b.ops_ && a.tombstones_ == b.tombstones_;
  }

 private:
  enum class Kind : std::uint8_t { set = 0, del = 1 };

  struct Op {
    std::string key;
    Kind kind = Kind::set;
    MapValue value;
    friend bool operator==(const Op&, const Op&) = default;
  };

  static Tag read_tag(codec::Reader& r) {
    Tag tag;
    tag.replica = r.str();
    tag.seq = r.u64();
    if (tag.replica.empty() || tag.seq == 0) throw DecodeError("invalid tag");
    return tag;
  }

  Tag next_tag(const ReplicaId& issuer) {
    Tag tag{issuer, max_seq_[issuer] + 1};
    return tag;
  }

  void note_seq(const Tag& tag) {
    auto& m = max_seq_[tag.replica];
    m = std::max(m, tag.seq);
  }

  void add_op(Tag tag, Op op) {
    note_seq(tag);
    by_key_[op.key].insert(tag);
    ops_.emplace(std::move(tag), std::move(op));
  }

  void tombstone(const Tag& tag) {
    note_seq(tag);
    if (!tombstones_.insert(tag).second) return;
    auto it = ops_.find(tag);
    if (it == ops_.end()) return;
    auto key_it = by_key_.find(it->second.key);
    key_it->second.erase(tag);
    if (key_it->second.empty()) by_key_.erase(key_it);
    ops_.erase(it);
  }

  void supersede(const std::string& key) {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return;
    const std::set<Tag> observed = it->second;
    for (const auto& tag : observed) tombstone(tag);
  }

  MapSemantics semantics_;
  std::map<Tag, Op> ops_;
  std::set<Tag> tombstones_;
  std::map<std::string, std::set<Tag>> by_key_;
  std::map<ReplicaId, std::uint64_t> max_seq_;
};

}  // namespace oppsync

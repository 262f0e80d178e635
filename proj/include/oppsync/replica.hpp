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

#include <map>
#include <memory>
#include <optional>
#include <utility>

#include "oppsync/crdt.hpp"
#include "oppsync/messages.hpp"
#include "oppsync/protocol.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/**
 * Replica side of the three synchronization protocols.
 *
 * A replica owns one CRDT instance and the version vector describing it. It
 * talks to replica peers by exchanging vectors and then states, and to relay
 * peers by sending its vector, absorbing the relay's contributions, and
 * returning its merged state once the last contribution arrives.
 *
 * Handlers are atomic: each one runs to completion and only appends messages
 * to the outbox.
 */
class ReplicaNode {
 public:
  ReplicaNode(ReplicaId id, std::unique_ptr<CrdtFacade> crdt, ProtocolConfig cfg = {})
      : id_(std::move(id)), crdt_(std::move(crdt)), cfg_(cfg) {
    crdt_->set_update_listener([this] { vv_ = vv_.incremented(id_); ++local_updates_; });
  }

  ReplicaNode(const ReplicaNode&) = delete;
  ReplicaNode& operator=(const ReplicaNode&) = delete;

  const ReplicaId& id() const { return id_; }
  const VersionVector& vv() const { return vv_; }
  const CrdtFacade& crdt() const { return *crdt_; }
  CrdtFacade& crdt() { return *crdt_; }
  std::uint64_t local_updates() const { return local_updates_; }
  std::uint64_t decode_failures() const { return decode_failures_; }
  const std::map<NodeId, Role>& neighbors() const { return neighbors_; }

  /// Runs `mutate` against the CRDT; the update hook bumps our own entry.
  template <class F>
  void issue_update(F&& mutate, Outbox& out) {
    std::forward<F>(mutate)(*crdt_);
    on_local_update(out);
  }

  /// Called after the CRDT signalled a local update.
  void on_local_update(Outbox& out) { inflated(std::nullopt, out); }

  void on_peer_detected(const NodeId& peer, Role role, Outbox& out) {
    if (role == Role::none) return;
    neighbors_[peer] = role;
    out.push_back({peer, VectorMsg{vv_}});
  }

  void on_peer_lost(const NodeId& peer) { neighbors_.erase(peer); }

  void on_message(const NodeId& from, const Message& msg, Outbox& out) {
    auto it = neighbors_.find(from);
    if (it == neighbors_.end()) return;
    const Role role = it->second;
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, VectorMsg>) {
            on_vector(from, m, out);
          } else if constexpr (std::is_same_v<T, AggregateMsg>) {
            on_aggregate(from, m, out);
          } else if constexpr (std::is_same_v<T, StateMsg>) {
            if (role == Role::replica) on_state(from, m, out);
          } else if constexpr (std::is_same_v<T, ContributionMsg>) {
            if (role == Role::relay) on_contribution(from, m, out);
          } else {
            out.push_back({from, VectorMsg{vv_}});
          }
        },
        msg);
  }

  /// Periodic propagation: notify neighbors if something inflated since the
  /// previous tick.
  void on_tick(Outbox& out) {
    if (cfg_.propagation != Propagation::periodic || !dirty_) return;
    dirty_ = false;
    for (const auto& [peer, role] : neighbors_) out.push_back({peer, InflationNotice{}});
  }

  /// The replica's current state as it would be put on the wire.
  StateRecord record() const { return {crdt_->serialized_state(), vv_}; }

 private:
  // A peer replica's vector: send our state if it holds anything new for it.
  void on_vector(const NodeId& from, const VectorMsg& m, Outbox& out) {
    if (over(vv_, m.vv)) out.push_back({from, StateMsg{record()}});
  }

  // A relay's aggregate, in answer to one of our notices.
  void on_aggregate(const NodeId& from, const AggregateMsg& m, Outbox& out) {
    if (over(m.vagg, vv_)) {
      out.push_back({from, VectorMsg{vv_}});
    } else if (over(vv_, m.vagg) && vv_.total() > 0) {
      out.push_back({from, StateMsg{record()}});
    }
  }

  void on_state(const NodeId& from, const StateMsg& m, Outbox& out) {
    if (!absorb(m.record)) return;
    // The sender already holds everything we now have unless it gained from us.
    std::optional<NodeId> skip;
    if (leq(vv_, m.record.vv)) skip = from;
    inflated(skip, out);
  }

  void on_contribution(const NodeId& from, const ContributionMsg& m, Outbox& out) {
    bool grew = false;
    if (m.record) grew = absorb(*m.record);
    if (m.last && vv_.total() > 0) out.push_back({from, StateMsg{record()}});
    if (grew) inflated(from, out);
  }

  // Merge a peer state; returns true if our vector grew.
  bool absorb(const StateRecord& rec) {
    if (!over(rec.vv, vv_)) {
      // Nothing new by the vectors; merging is still harmless but skipped.
      return false;
    }
    try {
      crdt_->merge_serialized_state(rec.blob);
    } catch (const DecodeError&) {
      ++decode_failures_;
      return false;
    }
    vv_.join_with(rec.vv);
    return true;
  }

  void inflated(const std::optional<NodeId>& skip, Outbox& out) {
    switch (cfg_.propagation) {
      case Propagation::none: return;
      case Propagation::periodic: dirty_ = true; return;
      case Propagation::immediate:
        for (const auto& [peer, role] : neighbors_) {
          if (skip && *skip == peer) continue;
          out.push_back({peer, InflationNotice{}});
        }
        return;
    }
  }

  ReplicaId id_;
  std::unique_ptr<CrdtFacade> crdt_;
  ProtocolConfig cfg_;
  VersionVector vv_;
  std::map<NodeId, Role> neighbors_;
  std::uint64_t local_updates_ = 0;
  std::uint64_t decode_failures_ = 0;
  bool dirty_ = false;
};

}  // namespace oppsync

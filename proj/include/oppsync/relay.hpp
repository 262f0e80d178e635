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

#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/protocol.hpp"
#include "oppsync/relay_store.hpp"
#include "oppsync/selection.hpp"

namespace oppsync {

/**
 * Relay side of the replica-relay and relay-relay protocols.
 *
 * Selected states go out one message at a time: the next one is only handed
 * to the transport once the previous one was delivered (`on_delivered`). Until
 * then they sit in a per-peer pending list, which is re-selected whenever the
 * store changes so that a peer never receives a state the store has since
 * superseded.
 */
class RelayNode {
 public:
  explicit RelayNode(NodeId id, ProtocolConfig cfg = {}) : id_(std::move(id)), cfg_(cfg) {}

  const NodeId& id() const { return id_; }
  const RelayStore& store() const { return store_; }
  const std::map<NodeId, Role>& neighbors() const { return neighbors_; }

  /// Records still waiting to go to `peer`.
  std::vector<StateRecord> pending_for(const NodeId& peer) const {
    auto it = sessions_.find(peer);
    if (it == sessions_.end()) return {};
    return {it->second.queue.begin(), it->second.queue.end()};
  }

  /// Test hook: seed the store directly.
  void preload(StateRecord rec) { store_.insert(std::move(rec)); }

  void on_peer_detected(const NodeId& peer, Role role, Outbox& out) {
    if (role == Role::none) return;
    neighbors_[peer] = role;
    // Replicas open the exchange themselves; relays swap aggregates.
    if (role == Role::relay) out.push_back({peer, AggregateMsg{store_.vagg()}});
  }

  void on_peer_lost(const NodeId& peer) {
    neighbors_.erase(peer);
    sessions_.erase(peer);
  }

  void on_message(const NodeId& from, const Message& msg, Outbox& out) {
    auto it = neighbors_.find(from);
    if (it == neighbors_.end()) return;
    const Role role = it->second;
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, VectorMsg>) {
            if (role == Role::replica) on_replica_vector(from, m.vv, out);
          } else if constexpr (std::is_same_v<T, AggregateMsg>) {
            if (role == Role::relay) open_session(from, m.vagg, false, out);
          } else if constexpr (std::is_same_v<T, StateMsg>) {
            if (role == Role::replica) on_replica_state(from, m.record, out);
          } else if constexpr (std::is_same_v<T, ContributionMsg>) {
            if (role == Role::relay && m.record) on_relay_state(from, *m.record, out);
          } else {
            out.push_back({from, AggregateMsg{store_.vagg()}});
          }
        },
        msg);
  }

  /// The transport finished delivering our previous message to `peer`.
  void on_delivered(const NodeId& peer, Outbox& out) {
    auto it = sessions_.find(peer);
    if (it == sessions_.end()) return;
    it->second.in_flight = false;
    pump(peer, it->second, out);
  }

  void on_tick(Outbox& out) {
    if (cfg_.propagation != Propagation::periodic || !dirty_) return;
    dirty_ = false;
    for (const auto& [peer, role] : neighbors_) out.push_back({peer, InflationNotice{}});
  }

 private:
  struct Session {
    VersionVector peer_vv;  // what the peer is known to hold
    std::deque<StateRecord> queue;
    bool to_replica = false;
    bool owes_last = false;  // a replica still expects a last-flagged message
    bool in_flight = false;
  };

  void on_replica_vector(const NodeId& from, const VersionVector& vv, Outbox& out) {
    const auto& recs = store_.records();
    if (recs.size() == 1 && recs.front().vv == vv) {
      sessions_.erase(from);
      return;
    }
    open_session(from, vv, true, out);
  }

  void open_session(const NodeId& peer, const VersionVector& vv, bool to_replica, Outbox& out) {
    Session& s = sessions_[peer];
    s.peer_vv = vv;
    s.to_replica = to_replica;
    s.queue = select_for(vv);
    s.owes_last = to_replica;
    pump(peer, s, out);
  }

  void on_replica_state(const NodeId& from, const StateRecord& rec, Outbox& out) {
    if (auto it = sessions_.find(from); it != sessions_.end()) it->second.peer_vv.join_with(rec.vv);
    const auto before = store_.vagg();
    const auto outcome = cfg_.store_guard ? store_.absorb_guarded(rec) : store_.replace(rec);
    if (outcome != RelayStore::Outcome::unchanged) store_changed(before, from, out);
  }

  void on_relay_state(const NodeId& from, const StateRecord& rec, Outbox& out) {
    if (auto it = sessions_.find(from); it != sessions_.end()) it->second.peer_vv.join_with(rec.vv);
    const auto before = store_.vagg();
    if (store_.insert(rec) != RelayStore::Outcome::unchanged) store_changed(before, from, out);
  }

  std::deque<StateRecord> select_for(const VersionVector& peer_vv) const {
    const auto& recs = store_.records();
    std::vector<StateRecord> picked;
    for (auto idx : select_inflators(recs, peer_vv, cfg_.selection)) picked.push_back(recs[idx]);
    sort_for_transmission(picked);
    return {picked.begin(), picked.end()};
  }

  void pump(const NodeId& peer, Session& s, Outbox& out) {
    if (s.in_flight) return;
    if (!s.queue.empty()) {
      StateRecord rec = std::move(s.queue.front());
      s.queue.pop_front();
      s.peer_vv.join_with(rec.vv);
      const bool last = s.to_replica && s.queue.empty();
      if (last) s.owes_last = false;
      out.push_back({peer, ContributionMsg{std::move(rec), last}});
      s.in_flight = true;
    } else if (s.owes_last) {
      s.owes_last = false;
      out.push_back({peer, ContributionMsg{std::nullopt, true}});
      s.in_flight = true;
    }
  }

  void store_changed(const VersionVector& vagg_before, const NodeId& source, Outbox& out) {
    // Re-select what is still pending; finished sessions are left alone.
    for (auto& [peer, s] : sessions_) {
      if (s.queue.empty() && !s.owes_last) continue;
      s.queue = select_for(s.peer_vv);
      if (s.to_replica) s.owes_last = true;
      pump(peer, s, out);
    }
    if (store_.vagg() == vagg_before) return;
    switch (cfg_.propagation) {
      case Propagation::none: return;
      case Propagation::periodic: dirty_ = true; return;
      case Propagation::immediate:
        for (const auto& [peer, role] : neighbors_) {
          auto it = sessions_.find(peer);
          const bool busy = it != sessions_.end() && (!it->second.queue.empty() || it->second.owes_last);
          if (busy) continue;
          if (peer == source && it != sessions_.end() && leq(store_.vagg(), it->second.peer_vv)) continue;
          out.push_back({peer, InflationNotice{}});
        }
        return;
    }
  }

  NodeId id_;
  ProtocolConfig cfg_;
  RelayStore store_;
  std::map<NodeId, Role> neighbors_;
  std::map<NodeId, Session> sessions_;
  bool dirty_ = false;
};

}  // namespace oppsync

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

// Generators, oracles and a tiny in-memory network shared by the unit tests
// and the acceptance binary.

#pragma once

#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oppsync/oppsync.hpp"

namespace oppsync::testing {

using Rng = std::mt19937_64;

inline std::uint64_t draw(Rng& rng, std::uint64_t n) { return rng() % n; }

inline std::vector<ReplicaId> replica_ids(std::size_t n) {
  std::vector<ReplicaId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
  return ids;
}

inline VersionVector vv(std::initializer_list<std::pair<const ReplicaId, Counter>> e) { return VersionVector(e); }

/// Random vector over `ids`, each entry in [0, max] (zero entries absent).
inline VersionVector random_vv(Rng& rng, const std::vector<ReplicaId>& ids, Counter max) {
  VersionVector out;
  for (const auto& id : ids) out.set(id, draw(rng, max + 1));
  return out;
}

/// G-counter whose per-replica contributions equal `v`, so its blob and
/// vector describe the same state.
inline GrowOnlyCounter counter_for(const VersionVector& v) {
  GrowOnlyCounter c;
  for (const auto& [id, n] : v.entries()) c.increment(id, n);
  return c;
}

inline StateRecord counter_record(const VersionVector& v) { return {counter_for(v).serialized_state(), v}; }

inline std::unique_ptr<ReplicaNode> counter_replica(const ReplicaId& id, const VersionVector& v,
                                                    ProtocolConfig cfg = {}) {
  auto node = std::make_unique<ReplicaNode>(id, std::make_unique<GrowOnlyCounter>(), cfg);
  // Install the state as if a relay had handed it over.
  Outbox sink;
  node->on_peer_detected("__seed", Role::relay, sink);
  node->on_message("__seed", ContributionMsg{counter_record(v), false}, sink);
  node->on_peer_lost("__seed");
  return node;
}

/// Vectors a set of replicas can actually reach: each step either issues a
/// local update or merges one replica into another.
class ReplicaModel {
 public:
  explicit ReplicaModel(std::vector<ReplicaId> ids) : ids_(std::move(ids)), vvs_(ids_.size()) {}

  /// Advances one random step and returns the vector of the replica touched.
  const VersionVector& step(Rng& rng) {
    const auto i = draw(rng, ids_.size());
    if (draw(rng, 3) == 0) {
      vvs_[i].join_with(vvs_[draw(rng, ids_.size())]);
    } else {
      vvs_[i] = vvs_[i].incremented(ids_[i]);
    }
    return vvs_[i];
  }

 private:
  std::vector<ReplicaId> ids_;
  std::vector<VersionVector> vvs_;
};

/// Store of up to `n` random pairwise-concurrent vectors over `ids`.
inline std::vector<StateRecord> random_store(Rng& rng, const std::vector<ReplicaId>& ids, std::size_t n,
                                             Counter max) {
  RelayStore store;
  for (std::size_t i = 0; i < 4 * n && store.size() < n; ++i) store.insert(counter_record(random_vv(rng, ids, max)));
  return store.records();
}

/// Smallest number of candidates whose join reaches the whole target, by
/// exhaustive search over candidate subsets.
inline std::size_t brute_force_min_cover(const std::vector<StateRecord>& store, const VersionVector& peer) {
  std::vector<VersionVector> cands;
  VersionVector all;
  for (const auto& r : store) {
    if (over(r.vv, peer)) {
      cands.push_back(r.vv);
      all.join_with(r.vv);
    }
  }
  VersionVector target;
  for (const auto& [id, n] : all.entries()) {
    if (n > peer[id]) target.set(id, n);
  }
  std::size_t best = cands.size();
  for (std::uint32_t mask = 0; mask < (1u << cands.size()); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size >= best) continue;
    VersionVector j;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (mask & (1u << i)) j.join_with(cands[i]);
    }
    if (leq(target, j)) best = size;
  }
  return best;
}

/**
 * Zero-latency, in-order network of protocol nodes. Every message is logged
 * so tests can count what went over the air. Relays are told about each
 * delivery of their own messages, like the simulator does.
 */
class Bench {
 public:
  struct Sent {
    NodeId from;
    NodeId to;
    Message msg;
  };

  explicit Bench(ProtocolConfig cfg = {}) : cfg_(cfg) {}

  ReplicaNode& add_replica(const ReplicaId& id, const VersionVector& v) {
    auto& slot = replicas_[id];
    slot = counter_replica(id, v, cfg_);
    return *slot;
  }
  RelayNode& add_relay(const NodeId& id, const std::vector<VersionVector>& store = {}) {
    auto& slot = relays_[id];
    slot = std::make_unique<RelayNode>(id, cfg_);
    for (const auto& v : store) slot->preload(counter_record(v));
    return *slot;
  }
  ReplicaNode& replica(const NodeId& id) { return *replicas_.at(id); }
  RelayNode& relay(const NodeId& id) { return *relays_.at(id); }

  void connect(const NodeId& a, const NodeId& b) {
    links_.insert({a, b});
    links_.insert({b, a});
    Outbox oa, ob;
    detect(a, b, oa);
    detect(b, a, ob);
    enqueue(a, oa);
    enqueue(b, ob);
  }

  void disconnect(const NodeId& a, const NodeId& b) {
    links_.erase({a, b});
    links_.erase({b, a});
    lost(a, b);
    lost(b, a);
  }

  /// Delivers up to `limit` queued messages; returns how many were delivered.
  std::size_t run(std::size_t limit = 100'000) {
    std::size_t n = 0;
    while (!queue_.empty() && n < limit) {
      Sent s = std::move(queue_.front());
      queue_.pop_front();
      if (!links_.count({s.from, s.to})) continue;
      ++n;
      delivered_.push_back(s);
      Outbox out;
      if (auto it = replicas_.find(s.to); it != replicas_.end()) it->second->on_message(s.from, s.msg, out);
      if (auto it = relays_.find(s.to); it != relays_.end()) it->second->on_message(s.from, s.msg, out);
      enqueue(s.to, out);
      if (auto it = relays_.find(s.from); it != relays_.end()) {
        Outbox more;
        it->second->on_delivered(s.to, more);
        enqueue(s.from, more);
      }
    }
    return n;
  }

  const std::vector<Sent>& delivered() const { return delivered_; }
  std::size_t pending() const { return queue_.size(); }

  /// State-carrying messages delivered from `from` to `to`.
  std::vector<VersionVector> states_sent(const NodeId& from, const NodeId& to) const {
    std::vector<VersionVector> out;
    for (const auto& s : delivered_) {
      if (s.from != from || s.to != to) continue;
      if (const auto* m = std::get_if<StateMsg>(&s.msg)) out.push_back(m->record.vv);
      if (const auto* c = std::get_if<ContributionMsg>(&s.msg); c && c->record) out.push_back(c->record->vv);
    }
    return out;
  }

 private:
  Role role_of(const NodeId& id) const {
    if (replicas_.count(id)) return Role::replica;
    if (relays_.count(id)) return Role::relay;
    return Role::none;
  }
  void detect(const NodeId& self, const NodeId& peer, Outbox& out) {
    if (auto it = replicas_.find(self); it != replicas_.end()) it->second->on_peer_detected(peer, role_of(peer), out);
    if (auto it = relays_.find(self); it != relays_.end()) it->second->on_peer_detected(peer, role_of(peer), out);
  }
  void lost(const NodeId& self, const NodeId& peer) {
    if (auto it = replicas_.find(self); it != replicas_.end()) it->second->on_peer_lost(peer);
    if (auto it = relays_.find(self); it != relays_.end()) it->second->on_peer_lost(peer);
  }
  void enqueue(const NodeId& from, Outbox& out) {
    for (auto& o : out) queue_.push_back({from, o.to, std::move(o.msg)});
    out.clear();
  }

  ProtocolConfig cfg_;
  std::map<NodeId, std::unique_ptr<ReplicaNode>> replicas_;
  std::map<NodeId, std::unique_ptr<RelayNode>> relays_;
  std::set<std::pair<NodeId, NodeId>> links_;
  std::deque<Sent> queue_;
  std::vector<Sent> delivered_;
};

/**
 * Temporal reachability oracle over an event log: after the last update,
 * can every live replica reach every other one through a time-respecting
 * chain of contacts whose intermediate nodes are replicas or relays?
 * Transmission delays are ignored, so this is necessary for convergence
 * rather than sufficient.
 */
/// Random scenario: `replicas` replicas r0.. and `relays` relays x0.. start
/// at t=0, then contacts come and go and replicas issue updates until at
/// least `events` events exist. Gaps are 1..`max_gap` ms, so messages are
/// often still in flight when their contact breaks.
inline Scenario random_scenario(Rng& rng, std::size_t replicas, std::size_t relays, std::size_t events,
                                Millis max_gap = 400) {
  Scenario out;
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i < replicas; ++i) {
    nodes.push_back("r" + std::to_string(i));
    out.push_back(ScenarioEvent::node_add(0, nodes.back(), Role::replica));
  }
  for (std::size_t i = 0; i < relays; ++i) {
    nodes.push_back("x" + std::to_string(i));
    out.push_back(ScenarioEvent::node_add(0, nodes.back(), Role::relay));
  }
  std::vector<std::pair<NodeId, NodeId>> up;
  Millis t = 0;
  while (out.size() < events) {
    t += 1 + static_cast<Millis>(draw(rng, static_cast<std::uint64_t>(max_gap)));
    const auto op = draw(rng, 10);
    if (op < 2 && replicas > 0) {
      out.push_back(ScenarioEvent::update(t, nodes[draw(rng, replicas)]));
    } else if (op < 6 || up.empty()) {
      const auto a = draw(rng, nodes.size());
      const auto b = draw(rng, nodes.size());
      const std::pair<NodeId, NodeId> key = std::minmax(nodes[a], nodes[b]);
      if (a == b || std::find(up.begin(), up.end(), key) != up.end()) continue;
      up.push_back(key);
      out.push_back(ScenarioEvent::edge_add(t, key.first, key.second));
    } else {
      const auto i = draw(rng, up.size());
      out.push_back(ScenarioEvent::edge_del(t, up[i].first, up[i].second));
      up.erase(up.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  return out;
}

/// Reachability oracle over an event log: true iff, after the last update,
/// every replica alive at the end is reached from every other through a
/// time-respecting path of contacts between replicas and relays.
inline bool temporally_connected_after_last_update(std::istream& log) {
  struct Ev {
    Millis t;
    std::string tag, a, b;
  };
  std::vector<Ev> evs;
  Millis last_update = 0;
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    Ev e;
    in >> e.t >> e.tag;
    if (e.tag == "ns" || e.tag == "ea" || e.tag == "ed") {
      in >> e.a >> e.b;
    } else if (e.tag == "nd" || e.tag == "up") {
      in >> e.a;
    } else {
      continue;
    }
    if (e.tag == "up") last_update = e.t;
    evs.push_back(std::move(e));
  }

  std::map<NodeId, std::string> role;
  std::set<NodeId> replicas_alive;
  {
    std::set<NodeId> alive;
    for (const auto& e : evs) {
      if (e.tag == "ns") role[e.a] = e.b;
      if (e.tag == "ns" && e.b == "rep") alive.insert(e.a);
      if (e.tag == "nd") alive.erase(e.a);
    }
    replicas_alive = alive;
  }

  for (const auto& source : replicas_alive) {
    std::map<NodeId, std::set<NodeId>> adj;
    std::set<NodeId> reached;
    bool started = false;
    auto spread = [&](std::vector<NodeId> frontier) {
      while (!frontier.empty()) {
        auto v = frontier.back();
        frontier.pop_back();
        for (const auto& w : adj[v]) {
          if (role[w] == "none" || reached.count(w)) continue;
          reached.insert(w);
          frontier.push_back(w);
        }
      }
    };
    for (std::size_t i = 0; i <= evs.size(); ++i) {
      if (!started && (i == evs.size() || evs[i].t > last_update)) {
        started = true;
        reached = {source};
        spread({source});
      }
      if (i == evs.size()) break;
      const auto& e = evs[i];
      if (e.tag == "ea") {
        adj[e.a].insert(e.b);
        adj[e.b].insert(e.a);
        if (started && reached.count(e.a)) spread({e.a});
        if (started && reached.count(e.b)) spread({e.b});
      } else if (e.tag == "ed") {
        adj[e.a].erase(e.b);
        adj[e.b].erase(e.a);
      } else if (e.tag == "nd") {
        for (const auto& w : adj[e.a]) adj[w].erase(e.a);
        adj.erase(e.a);
        if (started && role[e.a] != "rep") reached.erase(e.a);
      }
    }
    for (const auto& r : replicas_alive) {
      if (!reached.count(r)) return false;
    }
  }
  return true;
}

}  // namespace oppsync::testing

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

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oppsync/event_log.hpp"
#include "oppsync/g_counter.hpp"
#include "oppsync/messages.hpp"
#include "oppsync/or_map.hpp"
#include "oppsync/protocol.hpp"
#include "oppsync/relay.hpp"
#include "oppsync/replica.hpp"
#include "oppsync/trace.hpp"

namespace oppsync {

/// A well-formed trace asked for something impossible (edge to a dead node,
/// update on a non-replica, ...).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A protocol invariant failed while simulating.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

/// Relay for arrival `index` (0-based) under a relay ratio in [0,1]. The
/// schedule is evenly spread and starts with a relay: ratio 1/3 gives
/// relay, none, none, relay, none, none, ...
inline Role assign_role(double ratio, std::size_t index) {
  if (ratio <= 0.0) return Role::none;
  if (ratio >= 1.0) return Role::relay;
  constexpr double eps = 1e-9;
  const auto before = std::ceil(static_cast<double>(index) * ratio - eps);
  const auto after = std::ceil(static_cast<double>(index + 1) * ratio - eps);
  return after > before ? Role::relay : Role::none;
}

struct RoleAssignment {
  enum class Policy { from_trace, ratio };
  Policy policy = Policy::from_trace;
  double relay_ratio = 0.0;

  static RoleAssignment from_trace() { return {}; }
  static RoleAssignment ratio(double r) { return {Policy::ratio, r}; }
};

enum class PayloadKind { or_map, or_map_del_wins, counter };

struct SimConfig {
  ProtocolConfig protocol;
  Millis latency_base_ms = 50;
  double latency_per_byte_ms = 0.0;
  Millis tick_period_ms = 10'000;  // periodic propagation only
  RoleAssignment roles;
  PayloadKind payload = PayloadKind::or_map;
  std::uint32_t map_keys = 32;
  std::uint64_t seed = 1;
  /// Check relay-store and causal-safety invariants after every event.
  bool check_invariants = false;
};

struct SimStats {
  std::uint64_t updates = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t states_sent = 0;
  std::uint64_t contacts_replica_replica = 0;
  std::uint64_t contacts_replica_relay = 0;
  std::uint64_t contacts_relay_relay = 0;
  std::uint64_t invariant_checks = 0;
};

struct SimResult {
  ConvergenceLog log;
  SimStats stats;
  VersionVector global;
};

/**
 * Deterministic discrete-event engine over a merged contact + application
 * scenario.
 *
 * Messages travel over directed links that transmit one message at a time;
 * each takes `base + per_byte × size` ms. A message is delivered only if its
 * contact stayed up from send to delivery, otherwise it is silently lost.
 * Ties in time are broken by scheduling order, so equal inputs give equal
 * logs.
 */
class Simulator {
 public:
  explicit Simulator(SimConfig cfg, std::ostream* event_log = nullptr)
      : cfg_(std::move(cfg)), out_(event_log), rng_(cfg_.seed) {}

  SimResult run(const Scenario& events) {
    if (ran_) throw std::logic_error("Simulator::run called twice");
    ran_ = true;
    Millis last_time = 0;
    for (const auto& e : events) {
      if (e.time < last_time) throw ScenarioError("scenario events are not time-sorted");
      last_time = e.time;
      if (e.kind == ScenarioEvent::Kind::node_add && e.role == Role::replica) ++replica_total_;
    }
    last_scenario_time_ = last_time;
    if (out_) *out_ << kEventLogHeader << '\n';
    for (std::size_t i = 0; i < events.size(); ++i) push(events[i].time, Item::scenario, i);
    if (cfg_.protocol.propagation == Propagation::periodic && cfg_.tick_period_ms > 0 &&
        cfg_.tick_period_ms <= last_time) {
      push(cfg_.tick_period_ms, Item::tick, 0);
    }
    while (!queue_.empty()) {
      const QueueItem item = queue_.top();
      queue_.pop();
      now_ = item.t;
      switch (item.type) {
        case Item::scenario: apply(events[item.index]); break;
        case Item::delivery: deliver(item.seq); break;
        case Item::tick: tick(); break;
      }
      if (cfg_.check_invariants) check_invariants();
    }
    for (auto& [key, ep] : episodes_) log_sync(key.first, key.second, ep);
    episodes_.clear();
    result_.log.end_time = now_;
    emit(now_, " end");
    result_.global = global_;
    return std::move(result_);
  }

  // Introspection for tests, valid during and after run().
  const ReplicaNode* replica(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : it->second.replica.get();
  }
  const RelayNode* relay(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : it->second.relay.get();
  }
  const VersionVector& global() const { return global_; }

 private:
  enum class Item { scenario, delivery, tick };

  struct QueueItem {
    Millis t;
    std::uint64_t seq;
    Item type;
    std::size_t index;
    bool operator>(const QueueItem& o) const { return t != o.t ? t > o.t : seq > o.seq; }
  };

  struct InFlight {
    NodeId src;
    NodeId dst;
    Message msg;
    std::uint64_t epoch;
  };

  struct NodeSlot {
    Role role = Role::none;
    std::unique_ptr<ReplicaNode> replica;
    std::unique_ptr<RelayNode> relay;
    std::set<NodeId> adjacent;
  };

  struct Episode {
    std::uint32_t states = 0;
  };

  using Pair = std::pair<NodeId, NodeId>;

  static Pair edge_key(const NodeId& a, const NodeId& b) { return a < b ? Pair{a, b} : Pair{b, a}; }

  std::uint64_t push(Millis t, Item type, std::size_t index) {
    const auto seq = next_seq_++;
    queue_.push({t, seq, type, index});
    return seq;
  }

  // Event-log line; arguments are streamed, so nothing is formatted when
  // logging is off.
  template <class... Parts>
  void emit(const Parts&... parts) {
    if (!out_) return;
    ((*out_ << parts), ...);
    *out_ << '\n';
  }

  NodeSlot& live(const NodeId& id, const char* what) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ScenarioError(std::string(what) + ": node '" + id + "' is not live");
    return it->second;
  }

  Role resolve_role(Role trace_role) {
    if (trace_role == Role::replica) return Role::replica;
    if (cfg_.roles.policy == RoleAssignment::Policy::from_trace) return trace_role;
    return assign_role(cfg_.roles.relay_ratio, arrivals_++);
  }

  std::unique_ptr<CrdtFacade> make_payload() const {
    switch (cfg_.payload) {
      case PayloadKind::or_map: return std::make_unique<ObservedRemoveMap>(MapSemantics::set_wins);
      case PayloadKind::or_map_del_wins: return std::make_unique<ObservedRemoveMap>(MapSemantics::del_wins);
      case PayloadKind::counter: return std::make_unique<GrowOnlyCounter>();
    }
    return nullptr;
  }

  void apply(const ScenarioEvent& e) {
    using K = ScenarioEvent::Kind;
    switch (e.kind) {
      case K::node_add: add_node(e.a, e.role); break;
      case K::node_del: remove_node(e.a); break;
      case K::edge_add: edge_up(e.a, e.b); break;
      case K::edge_del: edge_down(e.a, e.b); break;
      case K::update: update(e.a); break;
    }
  }

  void add_node(const NodeId& id, Role trace_role) {
    if (!seen_.insert(id).second) throw ScenarioError("node '" + id + "' started twice");
    NodeSlot slot;
    slot.role = resolve_role(trace_role);
    emit(now_, " ns ", id, " ", role_name(slot.role));
    if (slot.role == Role::replica) {
      slot.replica = std::make_unique<ReplicaNode>(id, make_payload(), cfg_.protocol);
      result_.log.replicas[id].push_back({now_, {}});
      emit(now_, " V ", id, " []");
    } else if (slot.role == Role::relay) {
      slot.relay = std::make_unique<RelayNode>(id, cfg_.protocol);
      emit(now_, " S ", id, " [] 0");
    }
    nodes_.emplace(id, std::move(slot));
  }

  void remove_node(const NodeId& id) {
    NodeSlot& slot = live(id, "nd");
    const auto adjacent = slot.adjacent;
    for (const auto& peer : adjacent) edge_down(id, peer);
    emit(now_, " nd ", id);
    nodes_.erase(id);
  }

  void edge_up(const NodeId& a, const NodeId& b) {
    NodeSlot& sa = live(a, "ea");
    NodeSlot& sb = live(b, "ea");
    auto& edge = edges_[edge_key(a, b)];
    if (edge.up) throw ScenarioError("ea: contact " + a + "-" + b + " is already up");
    edge.up = true;
    ++edge.epoch;
    sa.adjacent.insert(b);
    sb.adjacent.insert(a);
    emit(now_, " ea ", a, " ", b);
    if (sa.role == Role::none || sb.role == Role::none) return;
    if (sa.role == Role::replica && sb.role == Role::replica) {
      ++result_.stats.contacts_replica_replica;
    } else if (sa.role == Role::relay && sb.role == Role::relay) {
      ++result_.stats.contacts_relay_relay;
    } else {
      ++result_.stats.contacts_replica_relay;
    }
    Outbox out_a, out_b;
    detect(sa, b, sb.role, out_a);
    detect(sb, a, sa.role, out_b);
    flush(a, out_a);
    flush(b, out_b);
    after_handlers({a, b});
  }

  static void detect(NodeSlot& s, const NodeId& peer, Role role, Outbox& out) {
    if (s.replica) s.replica->on_peer_detected(peer, role, out);
    if (s.relay) s.relay->on_peer_detected(peer, role, out);
  }

  void edge_down(const NodeId& a, const NodeId& b) {
    NodeSlot& sa = live(a, "ed");
    NodeSlot& sb = live(b, "ed");
    auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end() || !it->second.up) throw ScenarioError("ed: contact " + a + "-" + b + " is not up");
    it->second.up = false;
    ++it->second.epoch;
    link_free_.erase({a, b});
    link_free_.erase({b, a});
    sa.adjacent.erase(b);
    sb.adjacent.erase(a);
    emit(now_, " ed ", a, " ", b);
    for (const Pair& p : {Pair{a, b}, Pair{b, a}}) {
      if (auto ep = episodes_.find(p); ep != episodes_.end()) {
        log_sync(p.first, p.second, ep->second);
        episodes_.erase(ep);
      }
    }
    if (sa.replica) sa.replica->on_peer_lost(b);
    if (sa.relay) sa.relay->on_peer_lost(b);
    if (sb.replica) sb.replica->on_peer_lost(a);
    if (sb.relay) sb.relay->on_peer_lost(a);
  }

  void update(const NodeId& id) {
    NodeSlot& slot = live(id, "up");
    if (!slot.replica) throw ScenarioError("up: node '" + id + "' is not a replica");
    ReplicaNode& r = *slot.replica;
    const auto before = r.local_updates();
    Outbox out;
    r.issue_update([&](CrdtFacade& crdt) { mutate(crdt, id); }, out);
    if (r.local_updates() != before + 1) throw std::logic_error("payload update did not fire the update hook");
    global_ = global_.incremented(id);
    ++result_.stats.updates;
    result_.log.global.push_back({now_, global_});
    emit(now_, " up ", id);
    emit(now_, " G ", global_);
    flush(id, out);
    after_handlers({id});
  }

  void mutate(CrdtFacade& crdt, const ReplicaId& issuer) {
    const std::uint64_t draw = rng_();
    if (auto* map = dynamic_cast<ObservedRemoveMap*>(&crdt)) {
      const std::string key = "k" + std::to_string(draw % cfg_.map_keys);
      // one update in five deletes, when there is something to delete
      if ((draw >> 32) % 5 == 0 && map->get(key)) {
        map->del(key, issuer);
      } else {
        map->set(key, static_cast<std::int64_t>(result_.stats.updates + 1), issuer);
      }
    } else if (auto* counter = dynamic_cast<GrowOnlyCounter*>(&crdt)) {
      counter->increment(issuer);
    }
  }

  void flush(const NodeId& src, Outbox& out) {
    for (auto& o : out) send(src, o.to, std::move(o.msg));
    out.clear();
  }

  void send(const NodeId& src, const NodeId& dst, Message msg) {
    auto edge = edges_.find(edge_key(src, dst));
    if (edge == edges_.end() || !edge->second.up) return;
    const auto size = wire_size(msg);
    const Millis cost = cfg_.latency_base_ms +
                        static_cast<Millis>(std::llround(cfg_.latency_per_byte_ms * static_cast<double>(size)));
    Millis& free_at = link_free_[{src, dst}];
    const Millis deliver_at = std::max(now_, free_at) + cost;
    free_at = deliver_at;
    ++result_.stats.messages_sent;
    if (carries_state(msg)) {
      ++result_.stats.states_sent;
      if (auto ep = episodes_.find({src, dst}); ep != episodes_.end()) ++ep->second.states;
    }
    emit(now_, " tx ", src, " ", dst, " ", message_kind(msg), " ", size, " ", deliver_at);
    const auto seq = push(deliver_at, Item::delivery, 0);
    in_flight_.emplace(seq, InFlight{src, dst, std::move(msg), edge->second.epoch});
  }

  static bool opens_episode(const Message& msg, Role receiver) {
    if (std::holds_alternative<VectorMsg>(msg) || std::holds_alternative<AggregateMsg>(msg)) return true;
    if (const auto* c = std::get_if<ContributionMsg>(&msg)) return c->last && receiver == Role::replica;
    return false;
  }

  void deliver(std::uint64_t seq) {
    auto node = in_flight_.extract(seq);
    InFlight& f = node.mapped();
    auto edge = edges_.find(edge_key(f.src, f.dst));
    if (edge == edges_.end() || !edge->second.up || edge->second.epoch != f.epoch) {
      ++result_.stats.messages_dropped;
      emit(now_, " drop ", f.src, " ", f.dst, " ", message_kind(f.msg));
      return;
    }
    ++result_.stats.messages_delivered;
    emit(now_, " rx ", f.src, " ", f.dst, " ", message_kind(f.msg));
    NodeSlot& dst = nodes_.at(f.dst);
    NodeSlot& src = nodes_.at(f.src);
    if (opens_episode(f.msg, dst.role)) open_episode(f.dst, f.src, dst);
    Outbox out;
    if (dst.replica) dst.replica->on_message(f.src, f.msg, out);
    if (dst.relay) dst.relay->on_message(f.src, f.msg, out);
    flush(f.dst, out);
    if (src.relay) {
      src.relay->on_delivered(f.dst, out);
      flush(f.src, out);
    }
    after_handlers({f.dst, f.src});
  }

  void open_episode(const NodeId& node, const NodeId& peer, const NodeSlot& slot) {
    const Pair key{node, peer};
    if (auto ep = episodes_.find(key); ep != episodes_.end()) {
      log_sync(node, peer, ep->second);
      episodes_.erase(ep);
    }
    episodes_.emplace(key, Episode{});
    if (slot.relay) {
      const auto size = slot.relay->store().size();
      result_.log.store_samples.push_back({now_, node, size});
      emit(now_, " Z ", node, " ", size);
    }
  }

  void log_sync(const NodeId& node, const NodeId& peer, const Episode& ep) {
    const Role r = role_of(node);
    const Role pr = role_of(peer);
    result_.log.syncs.push_back({now_, node, r, peer, pr, ep.states});
    emit(now_, " sync ", node, " ", role_name(r), " ", peer, " ", role_name(pr), " ", ep.states);
  }

  Role role_of(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? Role::none : it->second.role;
  }

  void tick() {
    for (auto& [id, slot] : nodes_) {
      Outbox out;
      if (slot.replica) slot.replica->on_tick(out);
      if (slot.relay) slot.relay->on_tick(out);
      flush(id, out);
    }
    if (now_ + cfg_.tick_period_ms <= last_scenario_time_) push(now_ + cfg_.tick_period_ms, Item::tick, 0);
  }

  // Logs vector/store changes of the nodes a step touched.
  void after_handlers(std::initializer_list<NodeId> touched) {
    for (const auto& id : touched) {
      auto it = nodes_.find(id);
      if (it == nodes_.end()) continue;
      const NodeSlot& slot = it->second;
      if (slot.replica) {
        const auto& vv = slot.replica->vv();
        auto& timeline = result_.log.replicas[id];
        if (timeline.back().vv != vv) {
          if (cfg_.check_invariants && !leq(timeline.back().vv, vv)) {
            throw InvariantViolation("replica-monotonic", id + " went from " + timeline.back().vv.to_string() +
                                                              " to " + vv.to_string());
          }
          timeline.push_back({now_, vv});
          emit(now_, " V ", id, " ", vv);
        }
      }
      if (slot.relay) {
        const auto& store = slot.relay->store();
        std::vector<VersionVector> sig;
        for (const auto& r : store.records()) sig.push_back(r.vv);
        auto& last = store_sig_[id];
        if (last != sig) {
          last = sig;
          if (out_) {
            std::string line = std::to_string(now_) + " S " + id + " " + store.vagg().to_string() + " " +
                               std::to_string(sig.size());
            for (const auto& vv : sig) line += " " + vv.to_string();
            emit(line);
          }
        }
      }
    }
  }

  void check_invariants() {
    ++result_.stats.invariant_checks;
    for (const auto& [id, slot] : nodes_) {
      if (slot.relay) {
        if (auto why = slot.relay->store().violation(replica_total_)) {
          throw InvariantViolation("relay-store", id + " at t=" + std::to_string(now_) + ": " + *why);
        }
      }
      if (slot.replica && !leq(slot.replica->vv(), global_)) {
        throw InvariantViolation("causal-safety", id + " " + slot.replica->vv().to_string() + " exceeds global " +
                                                      global_.to_string());
      }
    }
  }

  struct EdgeState {
    bool up = false;
    std::uint64_t epoch = 0;
  };

  SimConfig cfg_;
  std::ostream* out_;
  std::mt19937_64 rng_;
  bool ran_ = false;
  Millis now_ = 0;
  Millis last_scenario_time_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t replica_total_ = 0;
  std::size_t arrivals_ = 0;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
  std::map<std::uint64_t, InFlight> in_flight_;
  std::map<NodeId, NodeSlot> nodes_;
  std::set<NodeId> seen_;
  std::map<Pair, EdgeState> edges_;
  std::map<Pair, Millis> link_free_;
  std::map<Pair, Episode> episodes_;
  std::map<NodeId, std::vector<VersionVector>> store_sig_;
  VersionVector global_;
  SimResult result_;
};

/// Merges a contact trace with an application scenario and runs them.
inline SimResult simulate(const Scenario& contacts, const Scenario& app, const SimConfig& cfg,
                          std::ostream* event_log = nullptr) {
  Simulator sim(cfg, event_log);
  return sim.run(merge_scenarios(contacts, app));
}

}  // namespace oppsync

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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oppsync/crdt.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

using NodeId = std::string;

enum class Role { replica, relay, none };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::replica: return "rep";
    case Role::relay: return "rel";
    case Role::none: return "none";
  }
  return "?";
}

/// A serialized state together with its causal context.
struct StateRecord {
  SerializedState blob;
  VersionVector vv;

  friend bool operator==(const StateRecord&, const StateRecord&) = default;
};

// Wire messages exchanged between neighbors.

/// A replica's version vector. Opens a sync with a replica or a relay.
struct VectorMsg {
  VersionVector vv;
};

/// A relay's aggregate vector. Opens a relay-relay sync, or answers an
/// inflation notice.
struct AggregateMsg {
  VersionVector vagg;
};

/// A replica's own state, sent to a replica or to a relay.
struct StateMsg {
  StateRecord record;
};

/// One stored state sent by a relay. Towards a replica, `last` marks the end
/// of the contribution sequence; the sequence may consist of a single empty
/// contribution so that the replica still replies.
struct ContributionMsg {
  std::optional<StateRecord> record;
  bool last = false;
};

/// "My state just inflated": the receiver answers with its vector.
struct InflationNotice {};

using Message = std::variant<VectorMsg, AggregateMsg, StateMsg, ContributionMsg, InflationNotice>;

inline const char* message_kind(const Message& m) {
  static constexpr const char* names[] = {"vv", "vagg", "state", "contrib", "notice"};
  return names[m.index()];
}

/// Does this message carry a serialized state?
inline bool carries_state(const Message& m) {
  if (std::holds_alternative<StateMsg>(m)) return true;
  if (const auto* c = std::get_if<ContributionMsg>(&m)) return c->record.has_value();
  return false;
}

/// Approximate wire size in bytes, used by the latency model.
inline std::size_t wire_size(const Message& m) {
  auto vv_size = [](const VersionVector& vv) {
    std::size_t n = 4;
    for (const auto& [id, c] : vv.entries()) n += 4 + id.size() + 8;
    return n;
  };
  return std::visit(
      [&](const auto& msg) -> std::size_t {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, VectorMsg>) {
          return 1 + vv_size(msg.vv);
        } else if constexpr (std::is_same_v<T, AggregateMsg>) {
          return 1 + vv_size(msg.vagg);
        } else if constexpr (std::is_same_v<T, StateMsg>) {
          return 1 + vv_size(msg.record.vv) + msg.record.blob.size();
        } else if constexpr (std::is_same_v<T, ContributionMsg>) {
          return 2 + (msg.record ? vv_size(msg.record->vv) + msg.record->blob.size() : 0);
        } else {
          return 1;
        }
      },
      m);
}

/// Messages a node handler wants sent, in order.
struct Outbound {
  NodeId to;
  Message msg;
};
using Outbox = std::vector<Outbound>;

}  // namespace oppsync

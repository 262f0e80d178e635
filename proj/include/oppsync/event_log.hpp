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

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/trace.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

// Simulation event log, one event per line, `<t> <tag> <fields...>`:
//
//   <t> ns <id> <role>                 node started with its effective role
//   <t> nd <id>                        node died
//   <t> ea <a> <b> / <t> ed <a> <b>    contact up / down
//   <t> up <replica>                   update issued
//   <t> G <vv>                         global vector after an update
//   <t> V <replica> <vv>               replica vector after it changed
//   <t> S <relay> <vagg> <n> <vv>*n    relay store after it changed
//   <t> tx <src> <dst> <kind> <bytes> <deliver_at>
//   <t> rx <src> <dst> <kind>          delivered
//   <t> drop <src> <dst> <kind>        lost with the contact
//   <t> sync <node> <role> <peer> <role> <states>
//                                      one finished sync episode: states
//                                      `node` sent to `peer`
//   <t> Z <relay> <size>               store size when a sync episode opens
//   <t> end                            simulation drained
//
// The first line is a `# oppsync event log v1` header.

struct VvSample {
  Millis t = 0;
  VersionVector vv;
  friend bool operator==(const VvSample&, const VvSample&) = default;
};

struct SyncRecord {
  Millis t = 0;
  NodeId node;
  Role role = Role::none;
  NodeId peer;
  Role peer_role = Role::none;
  std::uint32_t states = 0;
  friend bool operator==(const SyncRecord&, const SyncRecord&) = default;
};

struct StoreSample {
  Millis t = 0;
  NodeId relay;
  std::size_t size = 0;
  friend bool operator==(const StoreSample&, const StoreSample&) = default;
};

/// The parts of a run the convergence metrics are computed from.
struct ConvergenceLog {
  std::vector<VvSample> global;                       // after each update
  std::map<NodeId, std::vector<VvSample>> replicas;   // after each change
  std::vector<SyncRecord> syncs;
  std::vector<StoreSample> store_samples;
  Millis end_time = 0;

  friend bool operator==(const ConvergenceLog&, const ConvergenceLog&) = default;
};

inline constexpr const char* kEventLogHeader = "# oppsync event log v1";

/// Rebuilds a ConvergenceLog from event-log text. Lines the metrics do not
/// need are skipped. Throws ParseError on malformed lines.
inline ConvergenceLog read_convergence_log(std::istream& is) {
  ConvergenceLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    Millis t = 0;
    std::string tag;
    if (!(in >> t >> tag)) throw ParseError("event log line " + std::to_string(lineno) + ": malformed");
    auto fail = [&] { throw ParseError("event log line " + std::to_string(lineno) + ": bad '" + tag + "' record"); };
    try {
      if (tag == "G") {
        std::string vv;
        if (!(in >> vv)) fail();
        log.global.push_back({t, VersionVector::parse(vv)});
      } else if (tag == "V") {
        std::string id, vv;
        if (!(in >> id >> vv)) fail();
        log.replicas[id].push_back({t, VersionVector::parse(vv)});
      } else if (tag == "sync") {
        SyncRecord s;
        std::string r1, r2;
        s.t = t;
        if (!(in >> s.node >> r1 >> s.peer >> r2 >> s.states)) fail();
        s.role = parse_role(r1);
        s.peer_role = parse_role(r2);
        log.syncs.push_back(std::move(s));
      } else if (tag == "Z") {
        StoreSample z;
        z.t = t;
        if (!(in >> z.relay >> z.size)) fail();
        log.store_samples.push_back(std::move(z));
      } else if (tag == "end") {
        log.end_time = t;
      }
    } catch (const ParseError& e) {
      throw ParseError("event log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace oppsync

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

#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oppsync/event_log.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

struct LogViolation {
  std::string invariant;
  std::size_t line = 0;
  std::string detail;
};

/**
 * Replays an event log and reports every invariant it breaks:
 *
 *   relay-concurrency   stored vectors are pairwise concurrent
 *   relay-bound         a store holds at most one record per replica
 *   relay-vagg          vagg is the join of the stored vectors
 *   replica-monotonic   a replica's vector never goes back
 *   causal-safety       a replica's vector stays <= the global vector
 *   global-conservation the global vector counts exactly the `up` lines
 *   replica-transfer    a replica sends at most one state per sync
 *   log-format          unparseable line or missing header
 */
inline std::vector<LogViolation> check_event_log(std::istream& is) {
  std::vector<LogViolation> out;
  std::string line;
  std::size_t lineno = 0;
  VersionVector global;
  VersionVector counted;  // rebuilt from `up` lines
  std::map<NodeId, VersionVector> replicas;
  std::set<NodeId> replica_ids;
  struct Store {
    std::size_t line;
    std::size_t records;
  };
  std::vector<std::pair<NodeId, Store>> stores;  // bound is checked at the end
  bool header = false;

  auto report = [&](const std::string& inv, const std::string& detail) { out.push_back({inv, lineno, detail}); };

  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1) {
      header = line == kEventLogHeader;
      if (!header) report("log-format", "missing header");
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    Millis t = 0;
    std::string tag;
    if (!(in >> t >> tag)) {
      report("log-format", "malformed line");
      continue;
    }
    try {
      if (tag == "ns") {
        std::string id, role;
        in >> id >> role;
        if (role == "rep") replica_ids.insert(id);
      } else if (tag == "up") {
        std::string id;
        in >> id;
        counted = counted.incremented(id);
      } else if (tag == "G") {
        std::string text;
        in >> text;
        const auto vv = VersionVector::parse(text);
        if (!leq(global, vv)) report("global-conservation", "global vector went back to " + text);
        global = vv;
        if (global != counted) {
          report("global-conservation", text + " does not match issued updates " + counted.to_string());
        }
      } else if (tag == "V") {
        std::string id, text;
        in >> id >> text;
        const auto vv = VersionVector::parse(text);
        auto& prev = replicas[id];
        if (!leq(prev, vv)) report("replica-monotonic", id + " went from " + prev.to_string() + " to " + text);
        if (!leq(vv, global)) report("causal-safety", id + " " + text + " exceeds global " + global.to_string());
        prev = vv;
      } else if (tag == "S") {
        std::string id, vagg_text;
        std::size_t n = 0;
        in >> id >> vagg_text >> n;
        const auto vagg = VersionVector::parse(vagg_text);
        std::vector<VersionVector> recs;
        for (std::size_t i = 0; i < n; ++i) {
          std::string text;
          if (!(in >> text)) throw ParseError("store lists fewer records than announced");
          recs.push_back(VersionVector::parse(text));
        }
        VersionVector joined;
        for (std::size_t i = 0; i < recs.size(); ++i) {
          joined.join_with(recs[i]);
          for (std::size_t j = i + 1; j < recs.size(); ++j) {
            if (!concurrent(recs[i], recs[j])) {
              report("relay-concurrency", id + " holds " + recs[i].to_string() + " and " + recs[j].to_string());
            }
          }
        }
        if (joined != vagg) report("relay-vagg", id + " vagg " + vagg_text + " != join " + joined.to_string());
        stores.push_back({id, {lineno, n}});
      } else if (tag == "sync") {
        std::string node, role, peer, peer_role;
        std::uint32_t states = 0;
        in >> node >> role >> peer >> peer_role >> states;
        if (role == "rep" && states > 1) {
          report("replica-transfer", node + " sent " + std::to_string(states) + " states to " + peer);
        }
      }
    } catch (const ParseError& e) {
      report("log-format", e.what());
    }
  }
  if (lineno == 0) out.push_back({"log-format", 0, "empty log"});
  for (const auto& [id, s] : stores) {
    if (s.records > replica_ids.size()) {
      out.push_back({"relay-bound", s.line,
                     id + " holds " + std::to_string(s.records) + " records for " +
                         std::to_string(replica_ids.size()) + " replicas"});
    }
  }
  return out;
}

}  // namespace oppsync

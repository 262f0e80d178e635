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

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/// Simulation time in integer milliseconds.
using Millis = std::int64_t;

/// One line of a contact trace or application scenario.
///
///     <t> ns <id> <rep|rel|none>   node starts
///     <t> nd <id>                  node dies
///     <t> ea <a> <b>               edge (contact) up
///     <t> ed <a> <b>               edge down
///     <t> up <replica>             update issued on a replica
///
/// `t` is a non-negative integer in milliseconds, non-decreasing per file.
/// Blank lines and lines starting with '#' are ignored.
struct ScenarioEvent {
  enum class Kind { node_add, node_del, edge_add, edge_del, update };

  Millis time = 0;
  Kind kind = Kind::update;
  NodeId a;
  NodeId b;
  Role role = Role::none;

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;

  static ScenarioEvent node_add(Millis t, NodeId id, Role r) { return {t, Kind::node_add, std::move(id), {}, r}; }
  static ScenarioEvent node_del(Millis t, NodeId id) { return {t, Kind::node_del, std::move(id), {}, Role::none}; }
  static ScenarioEvent edge_add(Millis t, NodeId a, NodeId b) {
    return {t, Kind::edge_add, std::move(a), std::move(b), Role::none};
  }
  static ScenarioEvent edge_del(Millis t, NodeId a, NodeId b) {
    return {t, Kind::edge_del, std::move(a), std::move(b), Role::none};
  }
  static ScenarioEvent update(Millis t, NodeId id) { return {t, Kind::update, std::move(id), {}, Role::none}; }
};

using Scenario = std::vector<ScenarioEvent>;

inline Role parse_role(const std::string& s) {
  if (s == "rep") return Role::replica;
  if (s == "rel") return Role::relay;
  if (s == "none") return Role::none;
  throw ParseError("unknown role '" + s + "'");
}

inline std::string format_event(const ScenarioEvent& e) {
  std::string out = std::to_string(e.time);
  switch (e.kind) {
    case ScenarioEvent::Kind::node_add: return out + " ns " + e.a + " " + role_name(e.role);
    case ScenarioEvent::Kind::node_del: return out + " nd " + e.a;
    case ScenarioEvent::Kind::edge_add: return out + " ea " + e.a + " " + e.b;
    case ScenarioEvent::Kind::edge_del: return out + " ed " + e.a + " " + e.b;
    case ScenarioEvent::Kind::update: return out + " up " + e.a;
  }
  return out;
}

inline void write_scenario(std::ostream& os, const Scenario& events) {
  for (const auto& e : events) os << format_event(e) << '\n';
}

/// Parses a trace or scenario file. Throws ParseError naming the line.
inline Scenario read_scenario(std::istream& is) {
  Scenario out;
  std::string line;
  std::size_t lineno = 0;
  Millis last = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw ParseError("line " + std::to_string(lineno) + ": " + why);
    };
    std::istringstream in(line);
    std::string ts, op;
    in >> ts >> op;
    if (ts.empty() || !std::all_of(ts.begin(), ts.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail("time must be a non-negative integer (ms)");
    }
    if (ts.size() > 15) fail("time out of range");
    const Millis t = std::stoll(ts);
    if (t < last) fail("time goes backwards");
    last = t;
    std::vector<std::string> args;
    for (std::string w; in >> w;) args.push_back(w);
    auto arity = [&](std::size_t n) {
      if (args.size() != n) fail("'" + op + "' expects " + std::to_string(n) + " argument(s)");
    };
    if (op == "ns") {
      arity(2);
      Role r;
      try {
        r = parse_role(args[1]);
      } catch (const ParseError& e) {
        fail(e.what());
      }
      out.push_back(ScenarioEvent::node_add(t, args[0], r));
    } else if (op == "nd") {
      arity(1);
      out.push_back(ScenarioEvent::node_del(t, args[0]));
    } else if (op == "ea" || op == "ed") {
      arity(2);
      if (args[0] == args[1]) fail("self edge");
      out.push_back(op == "ea" ? ScenarioEvent::edge_add(t, args[0], args[1])
                               : ScenarioEvent::edge_del(t, args[0], args[1]));
    } else if (op == "up") {
      arity(1);
      out.push_back(ScenarioEvent::update(t, args[0]));
    } else {
      fail("unknown event '" + op + "'");
    }
  }
  return out;
}

inline Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return read_scenario(in);
}

/// Stable merge by time; at equal times contact events come first.
inline Scenario merge_scenarios(const Scenario& contacts, const Scenario& app) {
  Scenario out;
  out.reserve(contacts.size() + app.size());
  std::merge(contacts.begin(), contacts.end(), app.begin(), app.end(), std::back_inserter(out),
             [](const ScenarioEvent& x, const ScenarioEvent& y) { return x.time < y.time; });
  return out;
}

}  // namespace oppsync

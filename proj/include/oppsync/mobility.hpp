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
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/trace.hpp"

namespace oppsync {

class MobilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Closed interval used for speeds (m/s), pauses (s) and the like.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

// Portable uniform draws; std:: distributions differ across standard libraries.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(std::mt19937_64& rng, Range r) { return r.lo + (r.hi - r.lo) * unit(rng); }
inline std::size_t index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
inline double exponential(std::mt19937_64& rng, double rate) { return -std::log(1.0 - unit(rng)) / rate; }

}  // namespace detail

/// Piecewise-linear trajectory of one node, present during [start, end).
struct Track {
  struct Waypoint {
    double t;
    Point p;
  };

  NodeId id;
  Role role = Role::none;
  int node_class = 0;  // indexes the contact range matrix
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
  std::vector<Waypoint> path;  // time-ordered

  Point at(double t) const {
    if (path.empty()) throw std::logic_error("track '" + id + "' has no waypoints");
    if (t <= path.front().t) return path.front().p;
    if (t >= path.back().t) return path.back().p;
    auto hi = std::upper_bound(path.begin(), path.end(), t, [](double x, const Waypoint& w) { return x < w.t; });
    auto lo = std::prev(hi);
    const double span = hi->t - lo->t;
    const double f = span > 0.0 ? (t - lo->t) / span : 1.0;
    return {lo->p.x + f * (hi->p.x - lo->p.x), lo->p.y + f * (hi->p.y - lo->p.y)};
  }
};

using Tracks = std::vector<Track>;

/// Undirected street graph read from `<id> <x> <y>` and `edge <a> <b>` lines.
struct StreetGraph {
  std::map<std::string, Point> vertices;
  std::map<std::string, std::vector<std::string>> adjacent;

  void add_vertex(const std::string& id, Point p) {
    vertices[id] = p;
    adjacent[id];
  }
  void add_edge(const std::string& a, const std::string& b) {
    if (!vertices.count(a) || !vertices.count(b)) throw MobilityError("edge " + a + "-" + b + ": unknown vertex");
    adjacent[a].push_back(b);
    adjacent[b].push_back(a);
  }

  bool connected() const {
    if (vertices.empty()) return false;
    std::set<std::string> seen{vertices.begin()->first};
    std::vector<std::string> stack{vertices.begin()->first};
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& w : adjacent.at(v)) {
        if (seen.insert(w).second) stack.push_back(w);
      }
    }
    return seen.size() == vertices.size();
  }

  /// Shortest path (Dijkstra, Euclidean edge lengths), both ends included.
  std::vector<std::string> shortest_path(const std::string& from, const std::string& to) const {
    std::map<std::string, double> best{{from, 0.0}};
    std::map<std::string, std::string> prev;
    using Entry = std::pair<double, std::string>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    pq.push({0.0, from});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > best[v]) continue;
      if (v == to) break;
      for (const auto& w : adjacent.at(v)) {
        const double nd = d + dist(vertices.at(v), vertices.at(w));
        auto it = best.find(w);
        if (it == best.end() || nd < it->second) {
          best[w] = nd;
          prev[w] = v;
          pq.push({nd, w});
        }
      }
    }
    if (!best.count(to)) throw MobilityError("no path from " + from + " to " + to);
    std::vector<std::string> path{to};
    while (path.back() != from) path.push_back(prev.at(path.back()));
    std::reverse(path.begin(), path.end());
    return path;
  }

  /// Square lattice of `cols` x `rows` intersections, `spacing` metres apart.
  static StreetGraph grid(std::size_t cols, std::size_t rows, double spacing) {
    StreetGraph g;
    auto name = [](std::size_t c, std::size_t r) { return "v" + std::to_string(c) + "_" + std::to_string(r); };
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        g.add_vertex(name(c, r), {static_cast<double>(c) * spacing, static_cast<double>(r) * spacing});
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c + 1 < cols) g.add_edge(name(c, r), name(c + 1, r));
        if (r + 1 < rows) g.add_edge(name(c, r), name(c, r + 1));
      }
    }
    return g;
  }

  static StreetGraph parse(std::istream& is) {
    StreetGraph g;
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream in(line);
      std::string head;
      in >> head;
      if (head == "edge") {
        std::string a, b;
        if (!(in >> a >> b)) throw MobilityError("street graph line " + std::to_string(lineno) + ": bad edge");
        edges.emplace_back(a, b);
      } else {
        Point p;
        if (!(in >> p.x >> p.y)) throw MobilityError("street graph line " + std::to_string(lineno) + ": bad vertex");
        g.add_vertex(head, p);
      }
    }
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    return g;
  }
};

/// Parameters of one homogeneous group of mobile nodes.
struct MobilityConfig {
  double width = 1000.0;   // m
  double height = 1000.0;  // m
  double duration = 3600.0;  // s
  std::uint64_t seed = 1;

  std::size_t nodes = 0;
  std::string prefix = "n";
  Role role = Role::none;
  int node_class = 0;

  Range speed{1.0, 2.0};  // m/s
  Range pause{0.0, 0.0};  // s, between flights
  double max_flight = std::numeric_limits<double>::infinity();  // m, random waypoint

  // Crossing flow.
  double entry_rate = 0.0;  // nodes/s, Poisson
  std::vector<std::vector<Point>> paths;

  void validate() const {
    if (!(width > 0.0 && height > 0.0)) throw MobilityError("area dimensions must be positive");
    if (!(duration > 0.0)) throw MobilityError("duration must be positive");
    if (!(speed.lo > 0.0 && speed.hi >= speed.lo)) throw MobilityError("speed range must be positive");
    if (!(pause.lo >= 0.0 && pause.hi >= pause.lo)) throw MobilityError("pause range must be non-negative");
    if (!(max_flight > 0.0)) throw MobilityError("max flight must be positive");
    if (!(entry_rate >= 0.0)) throw MobilityError("entry rate must be non-negative");
  }
};

inline std::string node_name(const std::string& prefix, std::size_t i) { return prefix + std::to_string(i); }

/// Random waypoint: pick a uniform destination (within `max_flight`), travel
/// at a uniform speed, pause, repeat until `duration`.
inline Tracks gen_random_waypoint(const MobilityConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Tracks out;
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    Track tr{node_name(cfg.prefix, i), cfg.role, cfg.node_class, 0.0, std::numeric_limits<double>::infinity(), {}};
    Point p{detail::uniform(rng, {0, cfg.width}), detail::uniform(rng, {0, cfg.height})};
    double t = 0.0;
    tr.path.push_back({t, p});
    while (t < cfg.duration) {
      Point q{};
      for (int attempt = 0;; ++attempt) {
        q = {detail::uniform(rng, {0, cfg.width}), detail::uniform(rng, {0, cfg.height})};
        const double d = dist(p, q);
        if (d <= cfg.max_flight) break;
        if (attempt == 64) {  // shorten towards q instead of sampling forever
          const double f = cfg.max_flight / d;
          q = {p.x + f * (q.x - p.x), p.y + f * (q.y - p.y)};
          break;
        }
      }
      t += dist(p, q) / detail::uniform(rng, cfg.speed);
      tr.path.push_back({t, q});
      p = q;
      const double pause = detail::uniform(rng, cfg.pause);
      if (pause > 0.0) {
        t += pause;
        tr.path.push_back({t, p});
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

/// Graph walk: from a random intersection, repeatedly walk the shortest
/// street path to another random intersection, then wait.
inline Tracks gen_graph_walk(const StreetGraph& graph, const MobilityConfig& cfg) {
  cfg.validate();
  if (!graph.connected()) throw MobilityError("street graph is empty or not connected");
  std::vector<std::string> names;
  for (const auto& [id, p] : graph.vertices) names.push_back(id);
  std::mt19937_64 rng(cfg.seed);
  Tracks out;
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    Track tr{node_name(cfg.prefix, i), cfg.role, cfg.node_class, 0.0, std::numeric_limits<double>::infinity(), {}};
    std::string here = names[detail::index(rng, names.size())];
    double t = 0.0;
    tr.path.push_back({t, graph.vertices.at(here)});
    if (names.size() < 2) {
      out.push_back(std::move(tr));
      continue;
    }
    while (t < cfg.duration) {
      std::string there = here;
      while (there == here) there = names[detail::index(rng, names.size())];
      const double speed = detail::uniform(rng, cfg.speed);
      const auto route = graph.shortest_path(here, there);
      for (std::size_t k = 1; k < route.size(); ++k) {
        t += dist(graph.vertices.at(route[k - 1]), graph.vertices.at(route[k])) / speed;
        tr.path.push_back({t, graph.vertices.at(route[k])});
      }
      here = there;
      const double pause = detail::uniform(rng, cfg.pause);
      if (pause > 0.0) {
        t += pause;
        tr.path.push_back({t, graph.vertices.at(here)});
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

/// Crossing flow: nodes arrive as a Poisson process, traverse one of
/// `cfg.paths` (chosen uniformly) at a uniform speed, and leave.
inline Tracks gen_crossing_flow(const MobilityConfig& cfg) {
  cfg.validate();
  if (cfg.paths.empty()) throw MobilityError("crossing flow needs at least one path");
  for (const auto& p : cfg.paths) {
    if (p.size() < 2) throw MobilityError("crossing path needs at least two points");
  }
  Tracks out;
  if (cfg.entry_rate == 0.0) return out;
  std::mt19937_64 rng(cfg.seed);
  double t = 0.0;
  for (std::size_t i = 0;; ++i) {
    t += detail::exponential(rng, cfg.entry_rate);
    if (t >= cfg.duration) break;
    const auto& path = cfg.paths[detail::index(rng, cfg.paths.size())];
    const double speed = detail::uniform(rng, cfg.speed);
    Track tr{node_name(cfg.prefix, i), cfg.role, cfg.node_class, t, 0.0, {}};
    double u = t;
    tr.path.push_back({u, path.front()});
    for (std::size_t k = 1; k < path.size(); ++k) {
      u += dist(path[k - 1], path[k]) / speed;
      tr.path.push_back({u, path[k]});
    }
    tr.end = u;
    out.push_back(std::move(tr));
  }
  return out;
}

/// Contact range in metres for each pair of node classes (symmetric).
struct RangeMatrix {
  std::vector<std::vector<double>> r{{15.0}};

  static RangeMatrix uniform(double range) { return {{{range}}}; }

  double at(int a, int b) const {
    const auto i = static_cast<std::size_t>(a);
    const auto j = static_cast<std::size_t>(b);
    if (i >= r.size() || j >= r[i].size()) throw MobilityError("no contact range for class pair");
    return r[i][j];
  }
};

inline Millis to_millis(double seconds) { return static_cast<Millis>(std::llround(seconds * 1000.0)); }

/**
 * Samples all tracks every `timestep` seconds over [0, duration] and emits
 * the node and contact events: `ns` at a node's start, `ea`/`ed` when a
 * pair's distance crosses its class range, `ed` for open contacts then `nd`
 * at a node's end.
 */
inline Scenario compute_contacts(const Tracks& tracks, const RangeMatrix& ranges, double timestep, double duration) {
  if (!(timestep > 0.0)) throw MobilityError("timestep must be positive");
  const Millis step = std::max<Millis>(1, to_millis(timestep));
  const Millis horizon = to_millis(duration);

  struct Life {
    Millis start;
    Millis end;  // exclusive; max() if the node never leaves
  };
  std::vector<Life> life;
  for (const auto& tr : tracks) {
    const Millis end = std::isfinite(tr.end) ? to_millis(tr.end) : std::numeric_limits<Millis>::max();
    life.push_back({to_millis(tr.start), std::max(end, to_millis(tr.start) + 1)});
  }
  std::vector<std::size_t> by_start(tracks.size()), by_end(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) by_start[i] = by_end[i] = i;
  auto stable_by = [&](std::vector<std::size_t>& v, auto key) {
    std::stable_sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  };
  stable_by(by_start, [&](std::size_t i) { return life[i].start; });
  stable_by(by_end, [&](std::size_t i) { return life[i].end; });

  auto ordered = [&](std::size_t i, std::size_t j) {
    return tracks[i].id < tracks[j].id ? std::pair{i, j} : std::pair{j, i};
  };
  Scenario out;
  std::set<std::size_t> alive;
  std::set<std::pair<std::size_t, std::size_t>> up;
  std::size_t next_start = 0;
  std::size_t next_end = 0;

  // Node arrivals and departures up to and including `limit`, in time order.
  auto lifecycle_until = [&](Millis limit) {
    while (true) {
      const bool has_start = next_start < by_start.size() && life[by_start[next_start]].start <= limit;
      const bool has_end = next_end < by_end.size() && life[by_end[next_end]].end <= limit;
      if (!has_start && !has_end) break;
      const bool take_start =
          has_start && (!has_end || life[by_start[next_start]].start <= life[by_end[next_end]].end);
      if (take_start) {
        const auto i = by_start[next_start++];
        out.push_back(ScenarioEvent::node_add(life[i].start, tracks[i].id, tracks[i].role));
        alive.insert(i);
      } else {
        const auto i = by_end[next_end++];
        if (!alive.count(i)) continue;
        for (auto it = up.begin(); it != up.end();) {
          if (it->first == i || it->second == i) {
            out.push_back(ScenarioEvent::edge_del(life[i].end, tracks[it->first].id, tracks[it->second].id));
            it = up.erase(it);
          } else {
            ++it;
          }
        }
        out.push_back(ScenarioEvent::node_del(life[i].end, tracks[i].id));
        alive.erase(i);
      }
    }
  };

  for (Millis now = 0; now <= horizon; now += step) {
    lifecycle_until(now);
    const double t = static_cast<double>(now) / 1000.0;
    std::vector<std::size_t> live(alive.begin(), alive.end());
    std::vector<Point> pos;
    pos.reserve(live.size());
    for (auto i : live) pos.push_back(tracks[i].at(t));
    std::vector<std::pair<std::size_t, std::size_t>> adds, dels;
    for (std::size_t x = 0; x < live.size(); ++x) {
      for (std::size_t y = x + 1; y < live.size(); ++y) {
        const auto key = ordered(live[x], live[y]);
        const bool in_range = dist(pos[x], pos[y]) <= ranges.at(tracks[live[x]].node_class, tracks[live[y]].node_class);
        const bool was_up = up.count(key) > 0;
        if (in_range && !was_up) adds.push_back(key);
        if (!in_range && was_up) dels.push_back(key);
      }
    }
    auto by_name = [&](const auto& p, const auto& q) {
      return std::tie(tracks[p.first].id, tracks[p.second].id) < std::tie(tracks[q.first].id, tracks[q.second].id);
    };
    std::sort(dels.begin(), dels.end(), by_name);
    std::sort(adds.begin(), adds.end(), by_name);
    for (const auto& k : dels) {
      out.push_back(ScenarioEvent::edge_del(now, tracks[k.first].id, tracks[k.second].id));
      up.erase(k);
    }
    for (const auto& k : adds) {
      out.push_back(ScenarioEvent::edge_add(now, tracks[k.first].id, tracks[k.second].id));
      up.insert(k);
    }
  }
  lifecycle_until(horizon);
  return out;
}

/// Each replica updates every `period` seconds in [start, end), beginning at
/// a random offset in [0, period) so that replicas are not in lockstep.
inline Scenario gen_periodic_updates(const std::vector<NodeId>& replicas, double start, double end, double period,
                                     std::uint64_t seed) {
  if (!(period > 0.0)) throw MobilityError("update period must be positive");
  std::mt19937_64 rng(seed);
  Scenario out;
  for (const auto& id : replicas) {
    for (double t = start + detail::uniform(rng, {0.0, period}); t < end; t += period) {
      out.push_back(ScenarioEvent::update(to_millis(t), id));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return out;
}

}  // namespace oppsync

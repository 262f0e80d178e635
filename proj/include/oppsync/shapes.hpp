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
#include <optional>
#include <string>
#include <vector>

#include "oppsync/mobility.hpp"
#include "oppsync/trace.hpp"

namespace oppsync {

// Ready-made contact + application scenarios.
//
//   churn     replicas walk a street grid; a Poisson flow of pedestrians
//             crosses it along straight streets. Pedestrians are written as
//             relays; the simulator's relay ratio decides who really is one.
//   bus       static replicas placed on bus loops; buses are the relays.
//   disaster  many random-waypoint replicas on the ground, a few fast
//             random-waypoint relays in the air with a longer range.
//   bridge    two static replicas out of each other's range and a single
//             relay shuttling between them.

enum class Shape { churn, bus, disaster, bridge };

inline Shape parse_shape(const std::string& s) {
  if (s == "churn") return Shape::churn;
  if (s == "bus") return Shape::bus;
  if (s == "disaster") return Shape::disaster;
  if (s == "bridge") return Shape::bridge;
  throw MobilityError("unknown shape '" + s + "'");
}

struct ShapeConfig {
  Shape shape = Shape::churn;
  std::size_t replicas = 5;
  std::size_t relays = 10;     // bus and disaster
  double rate = 0.01;          // churn entry rate, nodes/s
  double duration = 18'000.0;  // s
  double update_start = 300.0;
  double update_end = 16'200.0;
  double update_period = 60.0;
  double timestep = 1.0;
  std::uint64_t seed = 1;
  std::optional<StreetGraph> streets;  // churn; default is a 5x5 grid

  void validate() const {
    if (replicas == 0) throw MobilityError("at least one replica is required");
    if (!(rate >= 0.0)) throw MobilityError("rate must be non-negative");
    if (!(duration > 0.0)) throw MobilityError("duration must be positive");
    if (!(update_period > 0.0)) throw MobilityError("update period must be positive");
    if (!(update_start >= 0.0 && update_end >= update_start)) throw MobilityError("bad update interval");
    if (!(timestep >= 0.1)) throw MobilityError("timestep must be at least 0.1 s");
  }
};

struct GeneratedScenario {
  Scenario contacts;
  Scenario app;
};

namespace detail {

inline std::vector<NodeId> ids_of(const Tracks& tracks, Role role) {
  std::vector<NodeId> out;
  for (const auto& t : tracks) {
    if (t.role == role) out.push_back(t.id);
  }
  return out;
}

inline Track static_track(NodeId id, Role role, int cls, Point p) {
  return {std::move(id), role, cls, 0.0, std::numeric_limits<double>::infinity(), {{0.0, p}}};
}

// Straight streets of the graph's bounding grid, walked in both directions.
inline std::vector<std::vector<Point>> crossing_paths(const StreetGraph& g) {
  std::set<double> xs, ys;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& [id, p] : g.vertices) {
    xs.insert(p.x);
    ys.insert(p.y);
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  std::vector<std::vector<Point>> paths;
  for (double x : xs) {
    paths.push_back({{x, y0}, {x, y1}});
    paths.push_back({{x, y1}, {x, y0}});
  }
  for (double y : ys) {
    paths.push_back({{x0, y}, {x1, y}});
    paths.push_back({{x1, y}, {x0, y}});
  }
  return paths;
}

}  // namespace detail

inline GeneratedScenario generate(const ShapeConfig& cfg) {
  cfg.validate();
  Tracks tracks;
  RangeMatrix ranges = RangeMatrix::uniform(15.0);
  auto add = [&](Tracks more) { tracks.insert(tracks.end(), more.begin(), more.end()); };

  switch (cfg.shape) {
    case Shape::churn: {
      const StreetGraph streets = cfg.streets ? *cfg.streets : StreetGraph::grid(5, 5, 100.0);
      MobilityConfig walkers;
      walkers.width = walkers.height = 1.0;  // unused by the graph walk
      walkers.duration = cfg.duration;
      walkers.seed = cfg.seed;
      walkers.nodes = cfg.replicas;
      walkers.prefix = "r";
      walkers.role = Role::replica;
      walkers.speed = {0.3, 1.5};
      walkers.pause = {10.0, 60.0};
      add(gen_graph_walk(streets, walkers));

      MobilityConfig flow;
      flow.duration = cfg.duration;
      flow.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
      flow.prefix = "p";
      flow.role = Role::relay;
      flow.speed = {0.6, 2.0};
      flow.entry_rate = cfg.rate;
      flow.paths = detail::crossing_paths(streets);
      add(gen_crossing_flow(flow));
      break;
    }
    case Shape::bus: {
      // Four rectangular loops over a 2 km square; replicas sit beside them.
      const std::vector<std::vector<Point>> loops = {
          {{0, 0}, {1000, 0}, {1000, 1000}, {0, 1000}, {0, 0}},
          {{1000, 0}, {2000, 0}, {2000, 1000}, {1000, 1000}, {1000, 0}},
          {{0, 1000}, {1000, 1000}, {1000, 2000}, {0, 2000}, {0, 1000}},
          {{1000, 1000}, {2000, 1000}, {2000, 2000}, {1000, 2000}, {1000, 1000}},
      };
      ranges = RangeMatrix::uniform(200.0);
      std::mt19937_64 rng(cfg.seed);
      for (std::size_t i = 0; i < cfg.replicas; ++i) {
        const auto& loop = loops[i % loops.size()];
        const auto leg = detail::index(rng, loop.size() - 1);
        const double f = detail::unit(rng);
        const Point a = loop[leg], b = loop[leg + 1];
        const Point p{a.x + f * (b.x - a.x) + detail::uniform(rng, {-50, 50}),
                      a.y + f * (b.y - a.y) + detail::uniform(rng, {-50, 50})};
        tracks.push_back(detail::static_track(node_name("r", i), Role::replica, 0, p));
      }
      for (std::size_t i = 0; i < cfg.relays; ++i) {
        const auto& loop = loops[i % loops.size()];
        Track bus{node_name("b", i), Role::relay, 0, 0.0, std::numeric_limits<double>::infinity(), {}};
        double t = detail::uniform(rng, {0.0, 600.0});
        bus.path.push_back({0.0, loop.front()});
        bus.path.push_back({t, loop.front()});
        while (t < cfg.duration) {
          for (std::size_t k = 1; k < loop.size(); ++k) {
            t += dist(loop[k - 1], loop[k]) / detail::uniform(rng, {8.0, 14.0});
            bus.path.push_back({t, loop[k]});
            t += detail::uniform(rng, {10.0, 30.0});  // stop
            bus.path.push_back({t, loop[k]});
          }
        }
        tracks.push_back(std::move(bus));
      }
      break;
    }
    case Shape::disaster: {
      MobilityConfig ground;
      ground.width = ground.height = 2000.0;
      ground.duration = cfg.duration;
      ground.seed = cfg.seed;
      ground.nodes = cfg.replicas;
      ground.prefix = "r";
      ground.role = Role::replica;
      ground.node_class = 0;
      ground.speed = {0.5, 1.5};
      ground.pause = {0.0, 300.0};
      ground.max_flight = 500.0;
      add(gen_random_waypoint(ground));

      MobilityConfig air = ground;
      air.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
      air.nodes = cfg.relays;
      air.prefix = "d";
      air.role = Role::relay;
      air.node_class = 1;
      air.speed = {5.0, 20.0};
      air.pause = {0.0, 60.0};
      air.max_flight = 15'000.0;
      add(gen_random_waypoint(air));
      ranges.r = {{50.0, 200.0}, {200.0, 200.0}};
      break;
    }
    case Shape::bridge: {
      tracks.push_back(detail::static_track("r0", Role::replica, 0, {0.0, 0.0}));
      tracks.push_back(detail::static_track("r1", Role::replica, 0, {1000.0, 0.0}));
      Track shuttle{"s0", Role::relay, 0, 0.0, std::numeric_limits<double>::infinity(), {}};
      const Point west{10.0, 0.0}, east{990.0, 0.0};
      double t = 0.0;
      bool going_east = true;
      shuttle.path.push_back({t, west});
      while (t < cfg.duration) {
        const Point to = going_east ? east : west;
        t += dist(west, east) / 5.0;
        shuttle.path.push_back({t, to});
        t += 60.0;
        shuttle.path.push_back({t, to});
        going_east = !going_east;
      }
      tracks.push_back(std::move(shuttle));
      break;
    }
  }

  GeneratedScenario out;
  out.contacts = compute_contacts(tracks, ranges, cfg.timestep, cfg.duration);
  out.app = gen_periodic_updates(detail::ids_of(tracks, Role::replica), cfg.update_start, cfg.update_end,
                                 cfg.update_period, cfg.seed + 1);
  return out;
}

}  // namespace oppsync

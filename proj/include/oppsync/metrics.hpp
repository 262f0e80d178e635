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
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oppsync/event_log.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/// Updates visible in the global vector but not yet at the replica.
inline Counter distance(const VersionVector& global, const VersionVector& local) {
  if (!leq(local, global)) {
    throw std::logic_error("replica vector " + local.to_string() + " is ahead of global " + global.to_string());
  }
  return global.total() - local.total();
}

/// Replica vector in force at time `t`, or nullptr before the replica existed.
inline const VersionVector* vector_at(const std::vector<VvSample>& timeline, Millis t) {
  auto it = std::upper_bound(timeline.begin(), timeline.end(), t,
                             [](Millis x, const VvSample& s) { return x < s.t; });
  if (it == timeline.begin()) return nullptr;
  return &std::prev(it)->vv;
}

/// Time for a replica to catch up (>=) with `target`, reached at time `t`.
/// Undefined if the replica never gets there within the log.
inline std::optional<Millis> catch_up_latency(const std::vector<VvSample>& timeline, Millis t,
                                              const VersionVector& target) {
  // Replica vectors only grow, so "has caught up" is monotone along the timeline.
  auto it = std::partition_point(timeline.begin(), timeline.end(),
                                 [&](const VvSample& s) { return !leq(target, s.vv); });
  if (it == timeline.end()) return std::nullopt;
  return std::max<Millis>(0, it->t - t);
}

/// Latency of `replica` for the `update_index`-th global update.
inline std::optional<Millis> latency(const ConvergenceLog& log, std::size_t update_index, const NodeId& replica) {
  const auto& g = log.global.at(update_index);
  auto it = log.replicas.find(replica);
  if (it == log.replicas.end()) return std::nullopt;
  return catch_up_latency(it->second, g.t, g.vv);
}

struct UpdateRow {
  Millis t = 0;
  std::optional<Millis> latency_min;
  std::optional<Millis> latency_max;
  std::optional<double> latency_avg;
  std::size_t latency_undefined = 0;
  Counter distance_min = 0;
  Counter distance_max = 0;
  double distance_avg = 0.0;
};

struct Report {
  std::vector<UpdateRow> rows;  // one per update event
  std::size_t replica_count = 0;
  std::size_t updates = 0;
  /// Mean over update events of the per-event average latency (events with
  /// no defined latency are skipped).
  std::optional<double> mean_latency_ms;
  double mean_distance = 0.0;
  std::size_t latency_defined = 0;
  std::size_t latency_undefined = 0;
  std::map<NodeId, Counter> final_distance;
  std::map<std::size_t, std::size_t> store_hist;            // store size -> samples
  std::map<std::uint32_t, std::size_t> relay_transfer_hist;  // states sent -> syncs
  std::map<std::uint32_t, std::size_t> replica_transfer_hist;
};

inline Report summarize(const ConvergenceLog& log) {
  Report rep;
  rep.replica_count = log.replicas.size();
  rep.updates = log.global.size();
  double latency_sum = 0.0;
  std::size_t latency_rows = 0;
  double distance_sum = 0.0;
  std::size_t distance_rows = 0;
  for (std::size_t i = 0; i < log.global.size(); ++i) {
    const auto& g = log.global[i];
    UpdateRow row;
    row.t = g.t;
    double lsum = 0.0;
    std::size_t lcount = 0;
    double dsum = 0.0;
    std::size_t dcount = 0;
    row.distance_min = std::numeric_limits<Counter>::max();
    for (const auto& [id, timeline] : log.replicas) {
      const VersionVector* now = vector_at(timeline, g.t);
      if (now == nullptr) continue;  // not started yet
      // Several updates can share a timestamp, so the vector in force at t may
      // already hold a later update; count only what it lacks.
      Counter d = 0;
      for (const auto& [rid, n] : g.vv.entries()) d += n - std::min(n, (*now)[rid]);
      row.distance_min = std::min(row.distance_min, d);
      row.distance_max = std::max(row.distance_max, d);
      dsum += static_cast<double>(d);
      ++dcount;
      if (auto l = catch_up_latency(timeline, g.t, g.vv)) {
        row.latency_min = row.latency_min ? std::min(*row.latency_min, *l) : *l;
        row.latency_max = row.latency_max ? std::max(*row.latency_max, *l) : *l;
        lsum += static_cast<double>(*l);
        ++lcount;
        ++rep.latency_defined;
      } else {
        ++row.latency_undefined;
        ++rep.latency_undefined;
      }
    }
    if (dcount == 0) row.distance_min = 0;
    if (dcount > 0) {
      row.distance_avg = dsum / static_cast<double>(dcount);
      distance_sum += row.distance_avg;
      ++distance_rows;
    }
    if (lcount > 0) {
      row.latency_avg = lsum / static_cast<double>(lcount);
      latency_sum += *row.latency_avg;
      ++latency_rows;
    }
    rep.rows.push_back(row);
  }
  if (latency_rows > 0) rep.mean_latency_ms = latency_sum / static_cast<double>(latency_rows);
  if (distance_rows > 0) rep.mean_distance = distance_sum / static_cast<double>(distance_rows);

  const VersionVector final_global = log.global.empty() ? VersionVector{} : log.global.back().vv;
  for (const auto& [id, timeline] : log.replicas) {
    if (!timeline.empty()) rep.final_distance[id] = distance(final_global, timeline.back().vv);
  }
  for (const auto& z : log.store_samples) ++rep.store_hist[z.size];
  for (const auto& s : log.syncs) {
    if (s.role == Role::relay) ++rep.relay_transfer_hist[s.states];
    if (s.role == Role::replica) ++rep.replica_transfer_hist[s.states];
  }
  return rep;
}

/// Share of relay syncs that sent at most `k` states (1.0 if there were none).
inline double relay_share_at_most(const Report& rep, std::uint32_t k) {
  std::size_t total = 0;
  std::size_t small = 0;
  for (const auto& [n, count] : rep.relay_transfer_hist) {
    total += count;
    if (n <= k) small += count;
  }
  return total == 0 ? 1.0 : static_cast<double>(small) / static_cast<double>(total);
}

inline nlohmann::json report_json(const Report& rep) {
  nlohmann::json j;
  j["replicas"] = rep.replica_count;
  j["updates"] = rep.updates;
  j["mean_latency_ms"] = rep.mean_latency_ms ? nlohmann::json(*rep.mean_latency_ms) : nlohmann::json(nullptr);
  j["mean_distance"] = rep.mean_distance;
  j["latency_defined"] = rep.latency_defined;
  j["latency_undefined"] = rep.latency_undefined;
  j["final_distance"] = rep.final_distance;
  auto hist = [](const auto& h) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : h) o[std::to_string(k)] = v;
    return o;
  };
  j["store_hist"] = hist(rep.store_hist);
  j["relay_transfer_hist"] = hist(rep.relay_transfer_hist);
  j["replica_transfer_hist"] = hist(rep.replica_transfer_hist);
  return j;
}

/// Writes latency.csv, distance.csv, store_hist.csv, transfer_hist.csv and
/// summary.json into `dir`.
inline void write_report(const Report& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
  {
    auto f = open("latency.csv");
    f << "t_ms,min_ms,max_ms,avg_ms,undefined\n";
    for (const auto& r : rep.rows) {
      f << r.t << ',' << opt(r.latency_min) << ',' << opt(r.latency_max) << ',' << opt(r.latency_avg) << ','
        << r.latency_undefined << '\n';
    }
  }
  {
    auto f = open("distance.csv");
    f << "t_ms,min,max,avg\n";
    for (const auto& r : rep.rows) {
      f << r.t << ',' << r.distance_min << ',' << r.distance_max << ',' << std::to_string(r.distance_avg) << '\n';
    }
  }
  {
    auto f = open("store_hist.csv");
    f << "states,samples\n";
    for (const auto& [k, v] : rep.store_hist) f << k << ',' << v << '\n';
  }
  {
    auto f = open("transfer_hist.csv");
    f << "role,states,syncs\n";
    for (const auto& [k, v] : rep.replica_transfer_hist) f << "rep," << k << ',' << v << '\n';
    for (const auto& [k, v] : rep.relay_transfer_hist) f << "rel," << k << ',' << v << '\n';
  }
  {
    auto f = open("summary.json");
    f << report_json(rep).dump(2) << '\n';
  }
}

}  // namespace oppsync

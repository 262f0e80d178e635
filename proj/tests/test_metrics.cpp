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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

using namespace oppsync;
using namespace oppsync::testing;

namespace {

VersionVector V(const char* text) { return VersionVector::parse(text); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

SimResult run(const std::string& trace, std::string* event_log = nullptr) {
  SimConfig cfg;
  cfg.payload = PayloadKind::counter;
  std::ostringstream log;
  auto r = simulate(parse_scenario(trace), {}, cfg, &log);
  if (event_log) *event_log = log.str();
  return r;
}

}  // namespace

TEST(Distance, CountsMissingUpdates) {
  EXPECT_EQ(distance(V("[a:3,b:2]"), V("[a:1,b:2]")), 2u);
  EXPECT_EQ(distance(V("[a:3,b:2]"), V("[a:3,b:2]")), 0u);
  EXPECT_EQ(distance(V("[a:3,b:2]"), {}), 5u);
  EXPECT_THROW(distance(V("[a:1]"), V("[a:2]")), std::logic_error);
}

TEST(Latency, CatchUpMeansGreaterOrEqual) {
  const std::vector<VvSample> timeline{{0, {}}, {700, V("[b:4]")}, {900, V("[a:2,b:4]")}};
  // never exactly [a:1], but [a:2,b:4] covers it
  EXPECT_EQ(catch_up_latency(timeline, 100, V("[a:1]")), 800);
  EXPECT_EQ(catch_up_latency(timeline, 100, V("[b:1]")), 600);
  // already there before the update's time
  EXPECT_EQ(catch_up_latency(timeline, 1000, V("[b:4]")), 0);
  EXPECT_FALSE(catch_up_latency(timeline, 100, V("[c:1]")));
}

TEST(Latency, VectorAtPicksTheSampleInForce) {
  const std::vector<VvSample> timeline{{10, {}}, {20, V("[a:1]")}};
  EXPECT_EQ(vector_at(timeline, 5), nullptr);
  EXPECT_EQ(*vector_at(timeline, 10), VersionVector{});
  EXPECT_EQ(*vector_at(timeline, 25), V("[a:1]"));
}

// a updates at 1 s; b meets a at 5 s. Vectors cross at 5.05 s, a's state
// lands at 5.1 s, so b's latency is 4100 ms and a's is 0.
TEST(Summary, TwoReplicaClosedForm) {
  const auto r = run("0 ns a rep\n0 ns b rep\n1000 up a\n5000 ea a b\n");
  const auto rep = summarize(r.log);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].latency_min, 0);
  EXPECT_EQ(rep.rows[0].latency_max, 4100);
  ASSERT_TRUE(rep.mean_latency_ms);
  EXPECT_DOUBLE_EQ(*rep.mean_latency_ms, 2050.0);
  EXPECT_EQ(rep.rows[0].distance_max, 1u);
  EXPECT_DOUBLE_EQ(rep.mean_distance, 0.5);
  EXPECT_EQ(rep.final_distance.at("b"), 0u);
  EXPECT_EQ(rep.replica_transfer_hist.at(1), 1u);  // a sent its state once
}

TEST(Summary, UnreachedReplicasHaveUndefinedLatency) {
  const auto rep = summarize(run("0 ns a rep\n0 ns b rep\n1000 up a\n2000 up a\n").log);
  EXPECT_EQ(rep.latency_undefined, 2u);
  EXPECT_EQ(rep.latency_defined, 2u);
  EXPECT_EQ(rep.rows[1].latency_undefined, 1u);
  EXPECT_EQ(rep.final_distance.at("b"), 2u);
  EXPECT_DOUBLE_EQ(*rep.mean_latency_ms, 0.0);
}

TEST(Summary, LateReplicasAreSkippedUntilTheyStart) {
  const auto rep = summarize(run("0 ns a rep\n1000 up a\n2000 ns b rep\n").log);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].latency_undefined, 0u);
  EXPECT_EQ(rep.replica_count, 2u);
}

TEST(Summary, SameTimeUpdatesCountOnlyWhatIsMissing) {
  ConvergenceLog log;
  log.global = {{100, V("[a:1]")}, {100, V("[a:1,b:1]")}};
  log.replicas["a"] = {{0, {}}, {100, V("[a:1]")}};
  log.replicas["b"] = {{0, {}}, {100, V("[b:1]")}};
  const auto rep = summarize(log);
  EXPECT_EQ(rep.rows[0].distance_max, 1u);  // b lacks a:1
  EXPECT_EQ(rep.rows[1].distance_max, 1u);
}

TEST(Summary, EventLogRoundTripGivesTheSameReport) {
  Rng rng(3);
  std::ostringstream log;
  SimConfig cfg;
  const auto r = simulate(random_scenario(rng, 3, 4, 400), {}, cfg, &log);
  std::istringstream in(log.str());
  const auto reread = read_convergence_log(in);
  EXPECT_EQ(reread, r.log);
  EXPECT_EQ(report_json(summarize(reread)), report_json(summarize(r.log)));
  EXPECT_EQ(report_json(summarize(r.log)), report_json(summarize(r.log)));
}

TEST(Summary, RelayShare) {
  Report rep;
  EXPECT_DOUBLE_EQ(relay_share_at_most(rep, 1), 1.0);
  rep.relay_transfer_hist = {{0, 3}, {1, 5}, {2, 2}};
  EXPECT_DOUBLE_EQ(relay_share_at_most(rep, 1), 0.8);
  EXPECT_DOUBLE_EQ(relay_share_at_most(rep, 0), 0.3);
}

TEST(Report, EmptyLogWritesHeadersOnly) {
  const auto dir = std::filesystem::temp_directory_path() / "oppsync_metrics_empty";
  std::filesystem::remove_all(dir);
  write_report(summarize(ConvergenceLog{}), dir);
  EXPECT_EQ(slurp(dir / "latency.csv"), "t_ms,min_ms,max_ms,avg_ms,undefined\n");
  EXPECT_EQ(slurp(dir / "distance.csv"), "t_ms,min,max,avg\n");
  EXPECT_EQ(slurp(dir / "store_hist.csv"), "states,samples\n");
  EXPECT_EQ(slurp(dir / "transfer_hist.csv"), "role,states,syncs\n");
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(j["mean_latency_ms"].is_null());
  EXPECT_EQ(j["updates"], 0);
  std::filesystem::remove_all(dir);
}

TEST(Report, RowsMatchUpdates) {
  const auto dir = std::filesystem::temp_directory_path() / "oppsync_metrics_rows";
  std::filesystem::remove_all(dir);
  write_report(summarize(run("0 ns a rep\n0 ns b rep\n1000 up a\n5000 ea a b\n").log), dir);
  EXPECT_EQ(slurp(dir / "latency.csv"), "t_ms,min_ms,max_ms,avg_ms,undefined\n1000,0,4100,2050.000000,0\n");
  EXPECT_EQ(slurp(dir / "distance.csv"), "t_ms,min,max,avg\n1000,0,1,0.500000\n");
  std::filesystem::remove_all(dir);
}

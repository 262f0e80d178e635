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

#include <sstream>

#include "test_support.hpp"

using namespace oppsync;
using namespace oppsync::testing;

namespace {

SimConfig counter_config() {
  SimConfig cfg;
  cfg.payload = PayloadKind::counter;
  cfg.check_invariants = true;
  return cfg;
}

// Runs `trace` and returns the event log text.
std::string run_log(const std::string& trace, const SimConfig& cfg, SimResult* result = nullptr) {
  std::ostringstream log;
  auto r = simulate(parse_scenario(trace), {}, cfg, &log);
  if (result) *result = std::move(r);
  return log.str();
}

bool has_line(const std::string& log, const std::string& line) {
  std::istringstream in(log);
  for (std::string l; std::getline(in, l);) {
    if (l == line) return true;
  }
  return false;
}

}  // namespace

// An empty vector message is 5 bytes; [a:1] is 18 (1 tag + 4 count +
// 4 length + 1 id + 8 counter).

TEST(Simulator, DeliveryAfterBaseLatency) {
  const auto log = run_log("0 ns a rep\n0 ns b rep\n0 up a\n100 ea a b\n", counter_config());
  EXPECT_TRUE(has_line(log, "100 tx a b vv 18 150"));
  EXPECT_TRUE(has_line(log, "100 tx b a vv 5 150"));
  EXPECT_TRUE(has_line(log, "150 rx a b vv"));
  // a learns b is behind and pushes its state
  EXPECT_TRUE(has_line(log, "200 rx a b state"));
  EXPECT_TRUE(has_line(log, "200 V b [a:1]"));
}

TEST(Simulator, PerByteLatency) {
  SimConfig cfg = counter_config();
  cfg.latency_per_byte_ms = 1.0;
  const auto log = run_log("0 ns a rep\n0 ns b rep\n0 up a\n100 ea a b\n", cfg);
  EXPECT_TRUE(has_line(log, "100 tx a b vv 18 168"));
  EXPECT_TRUE(has_line(log, "100 tx b a vv 5 155"));
}

TEST(Simulator, LinkSendsOneMessageAtATime) {
  // The update at t=100 follows the contact: a's notice queues behind its vector.
  const auto log = run_log("0 ns a rep\n0 ns b rep\n100 ea a b\n100 up a\n", counter_config());
  EXPECT_TRUE(has_line(log, "100 tx a b vv 5 150"));
  std::istringstream in(log);
  bool found = false;
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("100 tx a b notice ", 0) == 0) found = l.ends_with(" 200");
  }
  EXPECT_TRUE(found) << log;
}

TEST(Simulator, MessagesDieWithTheirContact) {
  SimResult r;
  const auto log = run_log("0 ns a rep\n0 ns b rep\n0 up a\n100 ea a b\n120 ed a b\n", counter_config(), &r);
  EXPECT_EQ(r.stats.messages_dropped, 2u);
  EXPECT_EQ(r.stats.messages_delivered, 0u);
  EXPECT_TRUE(has_line(log, "150 drop a b vv"));
  EXPECT_EQ(r.log.replicas.at("b").back().vv, VersionVector{});
}

TEST(Simulator, ReconnectDoesNotReviveOldMessages) {
  SimResult r;
  const auto log =
      run_log("0 ns a rep\n0 ns b rep\n0 up a\n100 ea a b\n120 ed a b\n130 ea a b\n", counter_config(), &r);
  EXPECT_TRUE(has_line(log, "150 drop a b vv"));
  EXPECT_TRUE(has_line(log, "130 tx a b vv 18 180"));
  EXPECT_TRUE(has_line(log, "230 V b [a:1]"));
  EXPECT_EQ(r.stats.messages_dropped, 2u);
}

TEST(Simulator, RoleNoneNodesStaySilent) {
  SimResult r;
  run_log("0 ns a rep\n0 ns p none\n0 up a\n100 ea a p\n", counter_config(), &r);
  EXPECT_EQ(r.stats.messages_sent, 0u);
}

TEST(Simulator, SameInputsGiveIdenticalLogs) {
  Rng rng(5);
  const auto scenario = random_scenario(rng, 4, 6, 600);
  SimConfig cfg;
  cfg.seed = 9;
  std::ostringstream l1, l2;
  simulate(scenario, {}, cfg, &l1);
  simulate(scenario, {}, cfg, &l2);
  EXPECT_EQ(l1.str(), l2.str());
  EXPECT_GT(l1.str().size(), 1000u);
}

TEST(Simulator, RunTwiceIsAnError) {
  Simulator sim(counter_config());
  sim.run({});
  EXPECT_THROW(sim.run({}), std::logic_error);
}

TEST(RoleAssignment, RatioScheduleIsEvenAndStartsWithRelay) {
  std::vector<Role> third;
  for (std::size_t i = 0; i < 6; ++i) third.push_back(assign_role(1.0 / 3.0, i));
  EXPECT_EQ(third, (std::vector<Role>{Role::relay, Role::none, Role::none, Role::relay, Role::none, Role::none}));
  for (double ratio : {0.0, 0.1, 0.25, 0.5, 0.7, 1.0}) {
    std::size_t relays = 0;
    for (std::size_t i = 0; i < 1000; ++i) relays += assign_role(ratio, i) == Role::relay;
    EXPECT_EQ(relays, static_cast<std::size_t>(std::ceil(ratio * 1000 - 1e-9))) << ratio;
  }
}

TEST(RoleAssignment, RatioOverridesNonReplicaRoles) {
  SimConfig cfg = counter_config();
  cfg.roles = RoleAssignment::ratio(0.5);
  const auto log = run_log("0 ns a rep\n0 ns p0 rel\n0 ns p1 rel\n0 ns p2 none\n", cfg);
  EXPECT_TRUE(has_line(log, "0 ns a rep"));
  EXPECT_TRUE(has_line(log, "0 ns p0 rel"));
  EXPECT_TRUE(has_line(log, "0 ns p1 none"));
  EXPECT_TRUE(has_line(log, "0 ns p2 rel"));
}

TEST(Simulator, RejectsImpossibleScenarios) {
  const SimConfig cfg = counter_config();
  for (const char* bad : {
           "0 ns a rep\n0 ea a b\n",               // edge to unknown node
           "0 ns a rep\n0 ns a rep\n",             // started twice
           "0 ns x rel\n0 up x\n",                 // update on a relay
           "0 ns a rep\n0 ns b rep\n0 ed a b\n",   // edge not up
           "0 ns a rep\n0 ns b rep\n0 ea a b\n1 ea b a\n",  // edge already up
           "0 ns a rep\n5 nd a\n6 up a\n",         // dead node
           "0 ns a rep\n5 nd a\n6 ns a rep\n",     // ids are never reused
       }) {
    EXPECT_THROW(run_log(bad, cfg), ScenarioError) << bad;
  }
  Scenario unsorted{ScenarioEvent::node_add(5, "a", Role::replica), ScenarioEvent::node_add(1, "b", Role::replica)};
  EXPECT_THROW(simulate(unsorted, {}, cfg), ScenarioError);
}

TEST(Simulator, NodeDeathClosesItsContacts) {
  SimResult r;
  const auto log = run_log("0 ns a rep\n0 ns b rep\n0 up a\n100 ea a b\n110 nd b\n", counter_config(), &r);
  EXPECT_TRUE(has_line(log, "110 ed b a"));
  EXPECT_EQ(r.stats.messages_dropped, 2u);
}

TEST(Simulator, PeriodicPropagationWaitsForTicks) {
  SimConfig cfg = counter_config();
  cfg.protocol.propagation = Propagation::periodic;
  cfg.tick_period_ms = 1000;
  // x learns a's state at 150..200 and may only pass it to b on a tick.
  SimResult r;
  const auto log =
      run_log("0 ns a rep\n0 ns b rep\n0 ns x rel\n0 up a\n0 ea x b\n100 ea a x\n3000 ed a x\n", cfg, &r);
  const auto& b = r.log.replicas.at("b");
  ASSERT_EQ(b.back().vv, VersionVector::parse("[a:1]"));
  EXPECT_GE(b.back().t, 1000);
}

TEST(Simulator, BridgeShapeConverges) {
  ShapeConfig shape;
  shape.shape = Shape::bridge;
  shape.duration = 3600;
  shape.update_start = 60;
  shape.update_end = 1800;
  const auto gen = generate(shape);
  SimConfig cfg;
  cfg.check_invariants = true;
  const auto r = simulate(gen.contacts, gen.app, cfg);
  ASSERT_GT(r.stats.updates, 0u);
  for (const auto& [id, timeline] : r.log.replicas) EXPECT_EQ(timeline.back().vv, r.global) << id;
}

// Random contact churn with in-flight losses never breaks an invariant, and
// the event log passes the offline checker.

class SimulatorFuzz : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SimulatorFuzz, InvariantsHold) {
  Rng rng(GetParam());
  const auto scenario = random_scenario(rng, 4, 6, 800, 60);
  for (auto mode : {ProtocolConfig::enhanced(), ProtocolConfig::basic()}) {
    SimConfig cfg;
    cfg.protocol = mode;
    cfg.seed = GetParam();
    cfg.check_invariants = true;
    std::stringstream log;
    SimResult r;
    ASSERT_NO_THROW(r = simulate(scenario, {}, cfg, &log));
    EXPECT_GT(r.stats.messages_dropped, 0u);
    if (mode.store_guard) {
      const auto violations = check_event_log(log);
      EXPECT_TRUE(violations.empty()) << violations.front().invariant << " line " << violations.front().line
                                      << ": " << violations.front().detail;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SimulatorFuzz, ::testing::Range<std::uint64_t>(1, 21));

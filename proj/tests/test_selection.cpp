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

#include "selection_fixtures.hpp"
#include "test_support.hpp"

using namespace oppsync;
using namespace oppsync::testing;

namespace {

std::vector<std::string> names_of(const std::vector<std::size_t>& picks) {
  std::vector<std::string> out;
  for (auto i : picks) out.push_back("S" + std::to_string(i + 1));
  return out;
}

}  // namespace

TEST(SelectInflators, EightStateInstanceIsPairwiseConcurrent) {
  const auto store = eight_state_store();
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (std::size_t j = i + 1; j < store.size(); ++j) {
      EXPECT_TRUE(concurrent(store[i].vv, store[j].vv)) << i << " " << j;
    }
  }
}

TEST(SelectInflators, EightStateProblemSetup) {
  const auto p = make_selection_problem(eight_state_store(), eight_state_peer());
  EXPECT_EQ(p.candidates, (std::vector<std::size_t>{0, 1, 3, 4, 5}));
  EXPECT_EQ(p.target, VersionVector::parse("[a:18,d:14,e:9,g:25,i:25,j:10,k:11]"));
}

TEST(SelectInflators, SinglesPhaseMasksAsDocumented) {
  const auto store = eight_state_store();
  auto p = make_selection_problem(store, eight_state_peer());
  auto pool = p.candidates;
  const auto singles = get_single_inflators(store, pool, p.target);
  EXPECT_EQ(names_of(singles), (std::vector<std::string>{"S1", "S4"}));
  EXPECT_EQ(p.target, VersionVector::parse("[j:10,k:11]"));
  const auto rest = greedy_cover(store, pool, p.target);
  EXPECT_EQ(names_of(rest), (std::vector<std::string>{"S5"}));
  EXPECT_TRUE(p.target.empty());
}

TEST(SelectInflators, SinglesFirstGivesThreeRecords) {
  EXPECT_EQ(names_of(select_inflators(eight_state_store(), eight_state_peer())),
            (std::vector<std::string>{"S1", "S4", "S5"}));
}

TEST(SelectInflators, PureGreedyGivesFourRecordsStartingWithS2) {
  const auto picks = select_inflators(eight_state_store(), eight_state_peer(), {.singles_first = false});
  EXPECT_EQ(names_of(picks), (std::vector<std::string>{"S2", "S1", "S4", "S5"}));
}

TEST(SelectInflators, MinimumCoverOfTheInstanceIsThree) {
  EXPECT_EQ(brute_force_min_cover(eight_state_store(), eight_state_peer()), 3u);
}

TEST(SelectInflators, TrivialCases) {
  const auto only = std::vector<StateRecord>{counter_record(vv({{"a", 2}}))};
  EXPECT_EQ(select_inflators(only, vv({{"a", 1}})), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(select_inflators(only, vv({{"a", 2}})).empty());
  EXPECT_TRUE(select_inflators(std::vector<StateRecord>{}, VersionVector{}).empty());

  // every target reachable by two candidates: no singles, target untouched
  const std::vector<StateRecord> twins{counter_record(vv({{"a", 2}, {"b", 1}})),
                                       counter_record(vv({{"a", 2}, {"c", 1}}))};
  auto p = make_selection_problem(twins, vv({{"b", 1}, {"c", 1}}));
  auto pool = p.candidates;
  const auto before = p.target;
  EXPECT_TRUE(get_single_inflators(twins, pool, p.target).empty());
  EXPECT_EQ(p.target, before);
}

TEST(SelectInflators, GreedyFailsLoudlyOnUnreachableTarget) {
  const std::vector<StateRecord> store{counter_record(vv({{"a", 1}}))};
  std::vector<std::size_t> pool{0};
  VersionVector target = vv({{"b", 1}});
  EXPECT_THROW(greedy_cover(store, pool, target), std::logic_error);
}

// Greedy takes cand 0 on a three-way tie for {c6,e6}; cands 4 and 5, picked
// afterwards for d5 and f6, also reach c6 and e6.
TEST(SelectInflators, LaterPicksCanMakeAGreedyPickRedundant) {
  std::vector<StateRecord> store;
  for (const char* t : {"[a:4,b:6,c:6,d:3,e:6,f:3,g:5]", "[a:1,b:2,c:3,d:4,e:1,f:6,g:4]",
                        "[a:1,b:1,c:2,d:5,e:4,f:2,g:5]", "[a:5,b:6,c:4,d:1,e:5,f:3,g:6]",
                        "[a:5,b:3,c:6,d:5,f:5]", "[a:5,b:5,c:2,e:6,f:6,g:3]",
                        "[a:3,b:2,c:5,d:2,e:1,f:4,g:3]", "[a:1,b:6,c:1,d:5,e:5,f:2,g:2]"}) {
    store.push_back(counter_record(VersionVector::parse(t)));
  }
  const auto peer = VersionVector::parse("[a:3,b:1,c:3,d:2,e:2,f:4,g:4]");
  EXPECT_EQ(select_inflators(store, peer, {.singles_first = false}).size(), 4u);
  EXPECT_EQ(select_inflators(store, peer), (std::vector<std::size_t>{3, 5, 4}));
  EXPECT_EQ(brute_force_min_cover(store, peer), 3u);
}

TEST(SelectInflators, PruneKeepsAnIrredundantCover) {
  std::vector<StateRecord> store{counter_record(vv({{"a", 1}, {"b", 1}})), counter_record(vv({{"a", 1}})),
                                 counter_record(vv({{"b", 1}}))};
  std::vector<std::size_t> picks{0, 1, 2};
  prune_redundant(store, picks, vv({{"a", 1}, {"b", 1}}));
  EXPECT_EQ(picks, (std::vector<std::size_t>{0}));
}

// Random instances against the exhaustive oracle.

class SelectionOracle : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SelectionOracle, CoversExactlyIrredundantlyNearMinimum) {
  Rng rng(GetParam());
  for (int round = 0; round < 100; ++round) {
    const auto ids = replica_ids(1 + draw(rng, 10));
    const auto store = random_store(rng, ids, 1 + draw(rng, 8), 6);
    const auto peer = random_vv(rng, ids, 4);
    const auto picks = select_inflators(store, peer);
    const auto problem = make_selection_problem(store, peer);

    VersionVector joined = peer;
    std::vector<VersionVector> chosen;
    for (auto i : picks) {
      ASSERT_LT(i, store.size());
      EXPECT_TRUE(over(store[i].vv, peer));
      joined.join_with(store[i].vv);
      chosen.push_back(store[i].vv);
    }
    EXPECT_EQ(joined, join(peer, problem.candidate_join));
    EXPECT_EQ(picks.empty(), problem.candidates.empty());
    EXPECT_TRUE(is_irredundant(chosen, problem.target));
    const auto best = brute_force_min_cover(store, peer);
    EXPECT_GE(picks.size(), best);
    EXPECT_LE(picks.size(), problem.candidates.size());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SelectionOracle, ::testing::Range<std::uint64_t>(1, 11));

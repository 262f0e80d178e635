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
#include <span>
#include <stdexcept>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/**
 * Set-cover instance for choosing which stored states to send to a peer.
 *
 * Candidates are the stored states that are over the peer's vector. The
 * universe is the set of non-zero entries of `target`: each entry holds the
 * best counter any candidate offers for an id the peer lags on.
 */
struct SelectionProblem {
  std::vector<std::size_t> candidates;  // indices into the store
  VersionVector candidate_join;
  VersionVector target;
};

struct SelectionOptions {
  /// Pick the unique reachers of some target entry before running greedy,
  /// then drop greedy picks that later picks made redundant. When false the
  /// result is the plain greedy cover, redundant picks included.
  bool singles_first = true;
};

inline SelectionProblem make_selection_problem(std::span<const StateRecord> store,
                                               const VersionVector& peer) {
  SelectionProblem p;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (over(store[i].vv, peer)) {
      p.candidates.push_back(i);
      p.candidate_join.join_with(store[i].vv);
    }
  }
  for (const auto& [id, n] : p.candidate_join.entries()) {
    if (n > peer[id]) p.target.set(id, n);
  }
  return p;
}

namespace detail {

inline bool reaches(const VersionVector& vv, const ReplicaId& id, Counter target) {
  return vv[id] >= target;
}

/// Zeroes every target entry `vv` reaches.
inline void mask_out(VersionVector& target, const VersionVector& vv) {
  std::vector<ReplicaId> covered;
  for (const auto& [id, n] : target.entries()) {
    if (reaches(vv, id, n)) covered.push_back(id);
  }
  for (const auto& id : covered) target.set(id, 0);
}

inline std::size_t coverage(const VersionVector& target, const VersionVector& vv) {
  std::size_t n = 0;
  for (const auto& [id, c] : target.entries()) n += reaches(vv, id, c) ? 1 : 0;
  return n;
}

}  // namespace detail

/// Selects, in target-id order, every candidate that is the only one reaching
/// some still-uncovered target entry. Selected candidates leave `pool` and the
/// entries they reach are masked out of `target`.
inline std::vector<std::size_t> get_single_inflators(std::span<const StateRecord> store,
                                                     std::vector<std::size_t>& pool,
                                                     VersionVector& target) {
  std::vector<std::size_t> selected;
  std::vector<ReplicaId> ids;
  for (const auto& [id, n] : target.entries()) ids.push_back(id);
  for (const auto& id : ids) {
    const Counter want = target[id];
    if (want == 0) continue;  // masked by an earlier pick
    std::size_t reacher = 0;
    std::size_t count = 0;
    for (std::size_t pos = 0; pos < pool.size(); ++pos) {
      if (detail::reaches(store[pool[pos]].vv, id, want)) {
        reacher = pos;
        if (++count > 1) break;
      }
    }
    if (count != 1) continue;
    const std::size_t pick = pool[reacher];
    selected.push_back(pick);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(reacher));
    detail::mask_out(target, store[pick].vv);
  }
  return selected;
}

/// Greedy set cover: repeatedly take the candidate reaching the most remaining
/// target entries. Ties go to the larger total, then to the smaller rendering.
inline std::vector<std::size_t> greedy_cover(std::span<const StateRecord> store,
                                             std::vector<std::size_t>& pool,
                                             VersionVector& target) {
  std::vector<std::size_t> selected;
  while (!target.empty()) {
    std::size_t best_pos = pool.size();
    std::size_t best_cov = 0;
    for (std::size_t pos = 0; pos < pool.size(); ++pos) {
      const auto& vv = store[pool[pos]].vv;
      const std::size_t cov = detail::coverage(target, vv);
      if (cov == 0) continue;
      bool better = best_pos == pool.size() || cov > best_cov;
      if (!better && cov == best_cov) {
        const auto& cur = store[pool[best_pos]].vv;
        if (vv.total() != cur.total()) {
          better = vv.total() > cur.total();
        } else {
          better = vv.to_string() < cur.to_string();
        }
      }
      if (better) {
        best_pos = pos;
        best_cov = cov;
      }
    }
    if (best_pos == pool.size()) {
      throw std::logic_error("selection target has an entry no candidate reaches");
    }
    const std::size_t pick = pool[best_pos];
    selected.push_back(pick);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_pos));
    detail::mask_out(target, store[pick].vv);
  }
  return selected;
}

/// Drops picks whose target entries the other picks already reach, newest
/// first. Single inflators are the only reachers of some entry and always
/// survive.
inline void prune_redundant(std::span<const StateRecord> store, std::vector<std::size_t>& selected,
                            const VersionVector& target) {
  for (std::size_t k = selected.size(); k-- > 0;) {
    VersionVector others;
    for (std::size_t j = 0; j < selected.size(); ++j) {
      if (j != k) others.join_with(store[selected[j]].vv);
    }
    if (leq(target, others)) selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(k));
  }
}

/// Chooses a small subset of `store` whose join lets `peer` reach everything
/// the store can offer it. Returns store indices in pick order; empty iff no
/// stored state is over `peer`.
inline std::vector<std::size_t> select_inflators(std::span<const StateRecord> store,
                                                 const VersionVector& peer,
                                                 SelectionOptions opts = {}) {
  SelectionProblem p = make_selection_problem(store, peer);
  const VersionVector target = p.target;
  std::vector<std::size_t> pool = p.candidates;
  std::vector<std::size_t> selected;
  if (opts.singles_first) selected = get_single_inflators(store, pool, p.target);
  auto rest = greedy_cover(store, pool, p.target);
  selected.insert(selected.end(), rest.begin(), rest.end());
  if (opts.singles_first) prune_redundant(store, selected, target);
  return selected;
}

}  // namespace oppsync

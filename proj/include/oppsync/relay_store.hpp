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

#include <optional>
#include <string>
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/**
 * The set of mutually concurrent states a relay carries, plus their aggregate
 * vector. The relay never looks inside the blobs; every decision is taken on
 * version vectors alone.
 *
 * Invariants after every mutation:
 *  - stored vectors are pairwise concurrent;
 *  - vagg is the join of the stored vectors.
 * Together they bound the size by the number of replicas.
 */
class RelayStore {
 public:
  enum class Outcome { unchanged, inserted, replaced };

  const std::vector<StateRecord>& records() const { return records_; }
  const VersionVector& vagg() const { return vagg_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Adds `rec` unless an equal or dominating record is already stored, then
  /// purges every record `rec` dominates.
  Outcome insert(StateRecord rec) {
    for (const auto& s : records_) {
      if (s.vv == rec.vv || dominates(s.vv, rec.vv)) return Outcome::unchanged;
    }
    std::erase_if(records_, [&](const StateRecord& s) { return dominates(rec.vv, s.vv); });
    vagg_.join_with(rec.vv);
    records_.push_back(std::move(rec));
    return Outcome::inserted;
  }

  /// Drops everything and keeps `rec` alone.
  Outcome replace(StateRecord rec) {
    if (records_.size() == 1 && records_.front().vv == rec.vv) return Outcome::unchanged;
    records_.clear();
    vagg_ = rec.vv;
    records_.push_back(std::move(rec));
    return Outcome::replaced;
  }

  /// Places a replica's state without ever regressing the store: a state at or
  /// above vagg replaces everything, a state below vagg is dropped, and a state
  /// concurrent with vagg is inserted alongside the others.
  Outcome absorb_guarded(StateRecord rec) {
    switch (compare(rec.vv, vagg_)) {
      case Causality::equal:
      case Causality::after: return replace(std::move(rec));
      case Causality::before: return Outcome::unchanged;
      case Causality::concurrent: return insert(std::move(rec));
    }
    return Outcome::unchanged;
  }

  /// Describes the first violated invariant, if any.
  std::optional<std::string> violation(std::size_t replica_count) const {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      for (std::size_t j = i + 1; j < records_.size(); ++j) {
        if (!concurrent(records_[i].vv, records_[j].vv)) {
          return "pairwise-concurrency: " + records_[i].vv.to_string() + " vs " +
                 records_[j].vv.to_string();
        }
      }
    }
    if (records_.size() > replica_count) {
      return "store-bound: " + std::to_string(records_.size()) + " records for " +
             std::to_string(replica_count) + " replicas";
    }
    VersionVector j;
    for (const auto& r : records_) j.join_with(r.vv);
    if (j != vagg_) return "vagg-join: " + vagg_.to_string() + " != " + j.to_string();
    return std::nullopt;
  }

 private:
  std::vector<StateRecord> records_;
  VersionVector vagg_;
};

}  // namespace oppsync

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
#include <map>

#include "oppsync/crdt.hpp"
#include "oppsync/versioning.hpp"

namespace oppsync {

/// Grow-only counter: one contribution per replica, merged by pointwise max.
///
/// Blob layout: "GCT1" | u32 n | n × (str id, u64 count), ids ascending,
/// zero contributions omitted.
class GrowOnlyCounter final : public CrdtFacade {
 public:
  void increment(const ReplicaId& issuer, std::uint64_t by = 1) {
    if (by == 0) return;
    contributions_[issuer] += by;
    notify_update();
  }

  std::uint64_t value() const {
    std::uint64_t sum = 0;
    for (const auto& [id, n] : contributions_) sum += n;
    return sum;
  }

  std::uint64_t contribution(const ReplicaId& id) const {
    auto it = contributions_.find(id);
    return it == contributions_.end() ? 0 : it->second;
  }

  SerializedState serialized_state() const override {
    codec::Writer w;
    w.magic("GCT1");
    w.u32(static_cast<std::uint32_t>(contributions_.size()));
    for (const auto& [id, n] : contributions_) {
      w.str(id);
      w.u64(n);
    }
    return SerializedState(w.take());
  }

  void merge_serialized_state(const SerializedState& blob) override {
    merge(decode(blob));
  }

  void merge(const GrowOnlyCounter& other) {
    for (const auto& [id, n] : other.contributions_) {
      auto& mine = contributions_[id];
      mine = std::max(mine, n);
    }
  }

  static GrowOnlyCounter decode(const SerializedState& blob) {
    codec::Reader r(blob.bytes());
    r.expect_magic("GCT1");
    GrowOnlyCounter out;
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto id = r.str();
      auto count = r.u64();
      if (id.empty() || count == 0) throw DecodeError("invalid counter entry");
      if (!out.contributions_.empty() && out.contributions_.rbegin()->first >= id) {
        throw DecodeError("counter entries not in canonical order");
      }
      out.contributions_.emplace(std::move(id), count);
    }
    r.expect_end();
    return out;
  }

  friend bool operator==(const GrowOnlyCounter& a, const GrowOnlyCounter& b) {
    return a.contributions_ == b.contributions_;
  }

 private:
  std::map<ReplicaId, std::uint64_t> contributions_;
};

}  // namespace oppsync

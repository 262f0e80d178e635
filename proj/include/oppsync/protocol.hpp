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
#include <vector>

#include "oppsync/messages.hpp"
#include "oppsync/selection.hpp"

namespace oppsync {

/// How a node tells its current neighbors that its state inflated.
enum class Propagation {
  none,       // sync only when a neighbor is detected
  immediate,  // notify neighbors after every inflation
  periodic,   // notify neighbors on the next tick after an inflation
};

struct ProtocolConfig {
  /// Relays insert replica states through the regression guard instead of
  /// replacing the whole store.
  bool store_guard = true;
  Propagation propagation = Propagation::immediate;
  SelectionOptions selection;

  static ProtocolConfig basic() {
    ProtocolConfig c;
    c.store_guard = false;
    c.propagation = Propagation::none;
    return c;
  }
  static ProtocolConfig enhanced() { return {}; }
};

/// Orders records for transmission: biggest total first, then by rendering.
inline void sort_for_transmission(std::vector<StateRecord>& recs) {
  std::stable_sort(recs.begin(), recs.end(), [](const StateRecord& a, const StateRecord& b) {
    const auto ta = a.vv.total();
    const auto tb = b.vv.total();
    if (ta != tb) return ta > tb;
    return a.vv.to_string() < b.vv.to_string();
  });
}

}  // namespace oppsync

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
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace oppsync {

/// Identifier of a replica. Stable for the lifetime of a scenario.
using ReplicaId = std::string;

using Counter = std::uint64_t;

/// Outcome of comparing two version vectors under the causal partial order.
enum class Causality {
  equal,
  before,      // lhs is strictly dominated by rhs
  after,       // lhs strictly dominates rhs
  concurrent,  // each side has seen updates the other has not
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * A version vector maps replica identifiers to update counters.
 *
 * Absent entries are zero. Zero entries are never stored, so two vectors that
 * only differ by explicit zeros are the same value. Entries are kept sorted by
 * id, which gives a canonical text rendering `[a:5,b:2]`.
 */
class VersionVector {
 public:
  using Entries = std::map<ReplicaId, Counter, std::less<>>;

  VersionVector() = default;
  VersionVector(std::initializer_list<std::pair<const ReplicaId, Counter>> init) {
    for (const auto& [id, n] : init) set(id, n);
  }

  Counter operator[](std::string_view id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? 0 : it->second;
  }

  void set(const ReplicaId& id, Counter n) {
    if (n == 0) {
      entries_.erase(id);
    } else {
      entries_[id] = n;
    }
  }

  const Entries& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// Sum of all counters.
  Counter total() const {
    Counter sum = 0;
    for (const auto& [id, n] : entries_) sum += n;
    return sum;
  }

  VersionVector incremented(const ReplicaId& id) const {
    VersionVector out = *this;
    out.entries_[id] += 1;
    return out;
  }

  /// Pointwise max, in place.
  VersionVector& join_with(const VersionVector& other) {
    for (const auto& [id, n] : other.entries_) {
      auto& mine = entries_[id];
      mine = std::max(mine, n);
    }
    return *this;
  }

  friend bool operator==(const VersionVector&, const VersionVector&) = default;

  /// Text form `[a:5,b:2]`, sorted by id.
  std::string to_string() const {
    std::string out = "[";
    bool first = true;
    for (const auto& [id, n] : entries_) {
      if (!first) out += ',';
      first = false;
      out += id;
      out += ':';
      out += std::to_string(n);
    }
    out += ']';
    return out;
  }

  static VersionVector parse(std::string_view text);

  friend std::ostream& operator<<(std::ostream& os, const VersionVector& vv) { return os << vv.to_string(); }

 private:
  Entries entries_;
};

inline VersionVector increment(const VersionVector& vv, const ReplicaId& id) {
  return vv.incremented(id);
}

inline VersionVector join(const VersionVector& a, const VersionVector& b) {
  VersionVector out = a;
  out.join_with(b);
  return out;
}

/// True iff some entry of `a` is strictly greater than the same entry of `b`,
/// i.e. a state with context `a` could inflate one with context `b`.
inline bool over(const VersionVector& a, const VersionVector& b) {
  for (const auto& [id, n] : a.entries()) {
    if (n > b[id]) return true;
  }
  return false;
}

/// Pointwise `a <= b`.
inline bool leq(const VersionVector& a, const VersionVector& b) { return !over(a, b); }

/// Strict pointwise dominance: a >= b everywhere and a > b somewhere.
inline bool dominates(const VersionVector& a, const VersionVector& b) {
  return over(a, b) && !over(b, a);
}

inline bool concurrent(const VersionVector& a, const VersionVector& b) {
  return over(a, b) && over(b, a);
}

inline Counter total(const VersionVector& vv) { return vv.total(); }

inline Causality compare(const VersionVector& a, const VersionVector& b) {
  const bool ab = over(a, b);
  const bool ba = over(b, a);
  if (ab && ba) return Causality::concurrent;
  if (ab) return Causality::after;
  if (ba) return Causality::before;
  return Causality::equal;
}

inline VersionVector VersionVector::parse(std::string_view text) {
  auto fail = [&](const char* why) {
    throw ParseError(std::string("bad version vector '") + std::string(text) + "': " + why);
  };
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') fail("missing brackets");
  std::string_view body = text.substr(1, text.size() - 2);
  VersionVector out;
  while (!body.empty()) {
    auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    auto colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == item.size()) {
      fail("entry must be id:counter");
    }
    std::string_view digits = item.substr(colon + 1);
    Counter n = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') fail("counter is not a non-negative integer");
      const auto d = static_cast<Counter>(c - '0');
      if (n > (std::numeric_limits<Counter>::max() - d) / 10) fail("counter overflows 64 bits");
      n = n * 10 + d;
    }
    ReplicaId id(item.substr(0, colon));
    if (out.entries_.count(id) != 0) fail("duplicate id");
    out.entries_.emplace(std::move(id), n);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
    if (body.empty()) fail("trailing comma");
  }
  // explicit zeros are accepted on input but never kept
  std::erase_if(out.entries_, [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace oppsync

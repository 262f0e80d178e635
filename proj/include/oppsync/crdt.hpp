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
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oppsync {

/// Raised when a serialized state cannot be decoded.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Immutable byte blob produced by a CRDT. Copies share the same buffer.
 * Everything outside the CRDT module treats it as opaque.
 */
class SerializedState {
 public:
  SerializedState() : bytes_(std::make_shared<const std::vector<std::uint8_t>>()) {}
  explicit SerializedState(std::vector<std::uint8_t> bytes)
      : bytes_(std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes))) {}

  std::span<const std::uint8_t> bytes() const { return *bytes_; }
  std::size_t size() const { return bytes_->size(); }
  bool empty() const { return bytes_->empty(); }

  friend bool operator==(const SerializedState& a, const SerializedState& b) {
    return a.bytes_ == b.bytes_ || *a.bytes_ == *b.bytes_;
  }

 private:
  std::shared_ptr<const std::vector<std::uint8_t>> bytes_;
};

/// The three hooks the synchronization layer needs from a CRDT library.
class CrdtFacade {
 public:
  using UpdateListener = std::function<void()>;

  virtual ~CrdtFacade() = default;

  virtual SerializedState serialized_state() const = 0;

  /// Merges a serialized peer state into this one. Never shrinks the state.
  /// Throws DecodeError on a malformed blob, leaving the state untouched.
  virtual void merge_serialized_state(const SerializedState& blob) = 0;

  void set_update_listener(UpdateListener listener) { listener_ = std::move(listener); }

 protected:
  void notify_update() const {
    if (listener_) listener_();
  }

 private:
  UpdateListener listener_;
};

namespace codec {

// Little-endian, length-prefixed primitives used by the reference CRDT blobs.

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void expect_magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0) {
      throw DecodeError("unexpected blob type");
    }
    pos_ += m.size();
  }
  void expect_end() const {
    if (pos_ != in_.size()) throw DecodeError("trailing bytes in blob");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("truncated blob");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace codec
}  // namespace oppsync

// Copyright 2026 The Preictal Authors.
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
#include <span>
#include <string>
#include <vector>

#include "preictal/error.hpp"

namespace preictal::detail {

// All multi-byte values little-endian.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void f64_block(const double* p, std::size_t count) {
    u64(count);
    raw(p, count * 8);
  }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { std::uint32_t v; std::memcpy(&v, take(4), 4); return v; }
  std::uint64_t u64() { std::uint64_t v; std::memcpy(&v, take(8), 8); return v; }
  std::int32_t i32() { std::int32_t v; std::memcpy(&v, take(4), 4); return v; }
  std::int64_t i64() { std::int64_t v; std::memcpy(&v, take(8), 8); return v; }
  double f64() { double v; std::memcpy(&v, take(8), 8); return v; }
  std::string str() {
    const std::uint32_t n = u32();
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  std::vector<double> f64_block() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8) {
      throw Error(errc::corrupt_model, "block length exceeds input");
    }
    std::vector<double> v(n);
    std::memcpy(v.data(), take(n * 8), n * 8);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (n > remaining()) {
      throw Error(errc::corrupt_model, "unexpected end of model data");
    }
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace preictal::detail

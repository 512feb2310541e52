// Copyright 2026 The Reed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REED_BYTES_H_
#define REED_BYTES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.h"

namespace reed {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Digest = std::array<uint8_t, 32>;

inline ByteView AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

std::string ToHex(ByteView data);
Bytes FromHex(std::string_view hex);

// Fails with kInvalidArgument unless `hex` encodes exactly 32 bytes.
Digest DigestFromHex(std::string_view hex);

void XorInto(std::span<uint8_t> dst, ByteView src);

// Big-endian serialization helpers for the wire and on-disk formats.
class ByteWriter {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
  }
  void U32(uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<uint8_t>(v >> s));
  }
  void U64(uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<uint8_t>(v >> s));
  }
  void Raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
  // 4-byte length prefix followed by the data.
  void Blob(ByteView data) {
    U32(static_cast<uint32_t>(data.size()));
    Raw(data);
  }
  void Str16(std::string_view s) {
    U16(static_cast<uint16_t>(s.size()));
    Raw(AsBytes(s));
  }

  Bytes& bytes() { return out_; }
  Bytes Take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Reads fail with kMalformed on truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  uint8_t U8();
  uint16_t U16();
  uint32_t U32();
  uint64_t U64();
  ByteView Raw(size_t n);
  ByteView Blob() { return Raw(U32()); }
  std::string Str16();
  Digest Fixed32();
  ByteView Rest();

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void ExpectDone() const;

 private:
  ByteView data_;
  size_t pos_ = 0;
};

}  // namespace reed

#endif  // REED_BYTES_H_

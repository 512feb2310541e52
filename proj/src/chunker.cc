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

#include "chunker.h"

#include <algorithm>
#include <array>
#include <bit>

#include "primitives.h"

namespace reed {
namespace {

int Degree(uint64_t p) { return 63 - std::countl_zero(p); }

// Polynomial remainder over GF(2).
uint64_t PolyMod(uint64_t x, uint64_t p) {
  const int dp = Degree(p);
  while (x != 0 && Degree(x) >= dp) x ^= p << (Degree(x) - dp);
  return x;
}

uint64_t AppendByte(uint64_t hash, uint8_t b, uint64_t p) {
  return PolyMod(hash << 8 | b, p);
}

struct RabinTables {
  std::array<uint64_t, 256> out{};
  std::array<uint64_t, 256> mod{};
  int shift = 0;

  RabinTables() {
    const int k = Degree(kRabinPolynomial);
    shift = k - 8;
    for (int b = 0; b < 256; ++b) {
      uint64_t h = AppendByte(0, static_cast<uint8_t>(b), kRabinPolynomial);
      for (size_t i = 0; i + 1 < kRabinWindow; ++i) h = AppendByte(h, 0, kRabinPolynomial);
      out[b] = h;
      mod[b] = PolyMod(uint64_t(b) << k, kRabinPolynomial) | uint64_t(b) << k;
    }
  }
};

const RabinTables& Tables() {
  static const RabinTables tables;
  return tables;
}

}  // namespace

void ChunkingParams::Validate() const {
  if (mode == ChunkingMode::kFixed) {
    if (fixed_size == 0) Fail(ErrorCode::kInvalidArgument, "fixed chunk size must be >= 1");
    return;
  }
  if (min_size == 0 || !(min_size <= avg_size && avg_size <= max_size)) {
    Fail(ErrorCode::kInvalidArgument, "chunk sizes must satisfy 0 < min <= avg <= max");
  }
  if (min_size < kRabinWindow) {
    Fail(ErrorCode::kInvalidArgument, "minimum chunk size must cover the rolling window");
  }
}

uint64_t ChunkingParams::Mask() const {
  int bits = std::bit_width(avg_size) - 1;
  return (uint64_t{1} << bits) - 1;
}

uint64_t SegmentationParams::divisor() const {
  if (avg_chunk_size == 0) return 1;
  return std::max<uint64_t>(1, (avg_size + avg_chunk_size - 1) / avg_chunk_size);
}

RabinWindow::RabinWindow() { Reset(); }

void RabinWindow::Reset() {
  std::fill(std::begin(window_), std::end(window_), 0);
  pos_ = 0;
  digest_ = 0;
}

uint64_t RabinWindow::Slide(uint8_t b) {
  const RabinTables& t = Tables();
  uint8_t out = window_[pos_];
  window_[pos_] = b;
  pos_ = (pos_ + 1) % kRabinWindow;
  digest_ ^= t.out[out];
  uint64_t index = digest_ >> t.shift;
  digest_ = (digest_ << 8 | b) ^ t.mod[index];
  return digest_;
}

std::vector<ChunkSpan> FixedChunk(ByteView data, size_t size) {
  if (size == 0) Fail(ErrorCode::kInvalidArgument, "fixed chunk size must be >= 1");
  std::vector<ChunkSpan> out;
  out.reserve(data.size() / size + 1);
  for (size_t off = 0; off < data.size(); off += size) {
    out.push_back({off, std::min(size, data.size() - off)});
  }
  return out;
}

std::vector<ChunkSpan> RabinChunk(ByteView data, const ChunkingParams& params) {
  params.Validate();
  const uint64_t mask = params.Mask();
  std::vector<ChunkSpan> out;
  RabinWindow window;
  size_t start = 0;
  while (start < data.size()) {
    size_t remaining = data.size() - start;
    if (remaining <= params.min_size) {
      out.push_back({start, remaining});
      break;
    }
    // Bytes before min_size - window never influence a cut decision, so the
    // hash only starts a window's width ahead of the first eligible cut.
    window.Reset();
    size_t limit = std::min(remaining, params.max_size);
    size_t len = params.min_size - kRabinWindow;
    size_t cut = limit;
    for (; len < limit; ++len) {
      uint64_t h = window.Slide(data[start + len]);
      if (len + 1 >= params.min_size && (h & mask) == 0) {
        cut = len + 1;
        break;
      }
    }
    out.push_back({start, cut});
    start += cut;
  }
  return out;
}

std::vector<ChunkSpan> ChunkData(ByteView data, const ChunkingParams& params) {
  if (params.mode == ChunkingMode::kFixed) return FixedChunk(data, params.fixed_size);
  return RabinChunk(data, params);
}

Digest Fingerprint(ByteView chunk) { return Sha256(chunk); }

uint64_t FingerprintMod(const Digest& fp, uint64_t divisor) {
  unsigned __int128 r = 0;
  for (uint8_t b : fp) r = (r << 8 | b) % divisor;
  return static_cast<uint64_t>(r);
}

std::vector<Segment> SegmentChunks(std::span<const size_t> lengths,
                                   std::span<const Digest> fingerprints,
                                   const SegmentationParams& params) {
  if (lengths.size() != fingerprints.size()) {
    Fail(ErrorCode::kInvalidArgument, "length and fingerprint lists differ in size");
  }
  const uint64_t divisor = params.divisor();
  const size_t min_size = params.min_size();
  const size_t max_size = params.max_size();

  std::vector<Segment> out;
  Segment cur;
  for (size_t i = 0; i < lengths.size(); ++i) {
    if (cur.chunk_count == 0) {
      cur.first_chunk = i;
      cur.representative = fingerprints[i];
    } else if (fingerprints[i] < cur.representative) {
      cur.representative = fingerprints[i];
    }
    ++cur.chunk_count;
    cur.total_bytes += lengths[i];

    bool boundary = cur.total_bytes > max_size ||
                    (cur.total_bytes >= min_size &&
                     FingerprintMod(fingerprints[i], divisor) == divisor - 1);
    if (boundary) {
      out.push_back(cur);
      cur = Segment{};
    }
  }
  if (cur.chunk_count > 0) out.push_back(cur);
  return out;
}

}  // namespace reed

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

#ifndef REED_CHUNKER_H_
#define REED_CHUNKER_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bytes.h"

namespace reed {

// Bumped whenever the rolling-hash polynomial, window or cut rule changes;
// recorded in every file recipe so readers can tell which chunker produced it.
inline constexpr uint8_t kRabinChunkerVersion = 1;

// Degree-53 irreducible polynomial over GF(2).
inline constexpr uint64_t kRabinPolynomial = 0x3DA3358B4DC173ULL;
inline constexpr size_t kRabinWindow = 48;

enum class ChunkingMode : uint8_t { kFixed = 0, kRabin = 1 };

struct ChunkingParams {
  ChunkingMode mode = ChunkingMode::kRabin;
  size_t fixed_size = 4096;
  size_t min_size = 2048;
  size_t avg_size = 8192;
  size_t max_size = 16384;

  // Throws kInvalidArgument unless min <= avg <= max and sizes are non-zero.
  void Validate() const;
  // Boundary mask: the low floor(log2(avg)) bits of the rolling hash.
  uint64_t Mask() const;
};

// A chunk is a view into the caller's buffer: [offset, offset + length).
struct ChunkSpan {
  size_t offset = 0;
  size_t length = 0;

  bool operator==(const ChunkSpan&) const = default;
};

struct Chunk {
  ByteView data;
  Digest fingerprint;
};

struct SegmentationParams {
  size_t avg_size = 1 << 20;
  // Expected chunk size; together with avg_size fixes the divisor.
  size_t avg_chunk_size = 8192;

  size_t min_size() const { return avg_size / 2; }
  size_t max_size() const { return avg_size * 2; }
  // ceil(avg_size / avg_chunk_size), at least 1.
  uint64_t divisor() const;
};

struct Segment {
  size_t first_chunk = 0;  // index into the chunk list
  size_t chunk_count = 0;
  size_t total_bytes = 0;
  Digest representative{};  // minimum member fingerprint, big-endian order
};

std::vector<ChunkSpan> FixedChunk(ByteView data, size_t size);
std::vector<ChunkSpan> RabinChunk(ByteView data, const ChunkingParams& params);
std::vector<ChunkSpan> ChunkData(ByteView data, const ChunkingParams& params);

Digest Fingerprint(ByteView chunk);

// Fingerprint interpreted as a big-endian integer, reduced modulo `divisor`.
uint64_t FingerprintMod(const Digest& fp, uint64_t divisor);

// Groups consecutive chunks (given as length + fingerprint) into segments.
// A boundary follows a chunk when the running size exceeds max_size, or when
// the size has reached min_size and fingerprint mod divisor == divisor - 1.
std::vector<Segment> SegmentChunks(std::span<const size_t> lengths,
                                   std::span<const Digest> fingerprints,
                                   const SegmentationParams& params);

// Rolling Rabin fingerprint over a fixed 48-byte window.
class RabinWindow {
 public:
  RabinWindow();

  void Reset();
  // Slides `b` into the window and returns the updated digest.
  uint64_t Slide(uint8_t b);
  uint64_t digest() const { return digest_; }

 private:
  uint8_t window_[kRabinWindow];
  size_t pos_ = 0;
  uint64_t digest_ = 0;
};

}  // namespace reed

#endif  // REED_CHUNKER_H_

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

// Brute-force reference models shared by the unit tests and the acceptance
// binary. They deliberately avoid the library's segmentation code.

#ifndef REED_TESTS_ORACLES_H_
#define REED_TESTS_ORACLES_H_

#include <openssl/bn.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "bytes.h"
#include "chunker.h"
#include "client.h"
#include "primitives.h"
#include "trace.h"

namespace reed::testing {

inline uint64_t BnMod(const Digest& fp, uint64_t divisor) {
  BIGNUM* bn = BN_bin2bn(fp.data(), static_cast<int>(fp.size()), nullptr);
  uint64_t r = BN_mod_word(bn, divisor);
  BN_free(bn);
  return r;
}

// Segment end indices (exclusive) by a linear scan of the boundary rule.
inline std::vector<size_t> OracleSegmentEnds(const std::vector<size_t>& lengths,
                                             const std::vector<Digest>& fps, uint64_t divisor,
                                             size_t min_size, size_t max_size) {
  std::vector<size_t> ends;
  size_t total = 0;
  for (size_t i = 0; i < lengths.size(); ++i) {
    total += lengths[i];
    bool content = total >= min_size && BnMod(fps[i], divisor) == divisor - 1;
    if (total > max_size || content) {
      ends.push_back(i + 1);
      total = 0;
    }
  }
  if (!lengths.empty() && (ends.empty() || ends.back() != lengths.size())) {
    ends.push_back(lengths.size());
  }
  return ends;
}

// Counts ciphertext identities: a chunk is stored once per distinct
// (content, key) pair, and the key is a function of the segment's minimum
// fingerprint (or of the chunk itself in per-chunk mode).
class DedupOracle {
 public:
  DedupOracle(KeyingMode mode, SegmentationParams seg) : mode_(mode), seg_(seg) {}

  // Returns the physical bytes this snapshot adds.
  uint64_t Add(const TraceSnapshot& snapshot) {
    std::vector<size_t> lengths;
    std::vector<Digest> fps;
    for (const TraceRecord& r : snapshot.records) {
      Bytes chunk(r.size);
      for (size_t i = 0; i < chunk.size(); ++i) {
        chunk[i] = r.fingerprint[i % r.fingerprint.size()];
      }
      lengths.push_back(chunk.size());
      fps.push_back(Sha256(chunk));
    }
    std::vector<size_t> ends;
    if (mode_ == KeyingMode::kSimilarity) {
      uint64_t divisor = (seg_.avg_size + seg_.avg_chunk_size - 1) / seg_.avg_chunk_size;
      ends = OracleSegmentEnds(lengths, fps, std::max<uint64_t>(divisor, 1), seg_.avg_size / 2,
                               seg_.avg_size * 2);
    } else {
      for (size_t i = 0; i < lengths.size(); ++i) ends.push_back(i + 1);
    }
    uint64_t added = 0;
    size_t begin = 0;
    for (size_t end : ends) {
      Digest rep = *std::min_element(fps.begin() + begin, fps.begin() + end);
      for (size_t i = begin; i < end; ++i) {
        if (seen_.insert({fps[i], rep}).second) added += lengths[i];
      }
      begin = end;
    }
    physical_ += added;
    return added;
  }

  uint64_t physical() const { return physical_; }

 private:
  KeyingMode mode_;
  SegmentationParams seg_;
  std::set<std::pair<Digest, Digest>> seen_;
  uint64_t physical_ = 0;
};

// The three-segment A/D/A example: segments {A,B,C,E}, {D,F,G,H}, {A,B,C,D}
// of 1001-byte chunks. With avg segment 2000 and avg chunk 500 the divisor is
// 4 and the size cap (4000) closes every segment after its fourth chunk, so
// only the first three members need a residue other than 3. A is the
// smallest fingerprint overall and D the smallest of segment two.
struct AdaScenario {
  SegmentationParams segmentation{2000, 500};
  static constexpr uint32_t kChunkSize = 1001;
  TraceRecord a, b, c, d, e, f, g, h;
  TraceSnapshot snapshot;
};

inline AdaScenario MakeAdaScenario() {
  std::vector<std::pair<Digest, TraceRecord>> found;
  for (uint64_t counter = 1; found.size() < 8; ++counter) {
    TraceRecord r;
    for (int s = 40; s >= 0; s -= 8) r.fingerprint.push_back(static_cast<uint8_t>(counter >> s));
    r.size = AdaScenario::kChunkSize;
    Bytes chunk(r.size);
    for (size_t i = 0; i < chunk.size(); ++i) chunk[i] = r.fingerprint[i % r.fingerprint.size()];
    Digest fp = Sha256(chunk);
    if (BnMod(fp, 4) != 3) found.emplace_back(fp, std::move(r));
  }
  std::sort(found.begin(), found.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  AdaScenario s;
  s.a = found[0].second;
  s.d = found[1].second;
  s.b = found[2].second;
  s.c = found[3].second;
  s.e = found[4].second;
  s.f = found[5].second;
  s.g = found[6].second;
  s.h = found[7].second;
  s.snapshot.label = "ada";
  s.snapshot.records = {s.a, s.b, s.c, s.e, s.d, s.f, s.g, s.h, s.a, s.b, s.c, s.d};
  return s;
}

}  // namespace reed::testing

#endif  // REED_TESTS_ORACLES_H_

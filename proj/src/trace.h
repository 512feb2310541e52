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

// Fingerprint-trace replay for dedup measurements.
//
// A trace is a list of snapshots, each an ordered list of (fingerprint, size)
// records. Chunks are synthesized by repeating the fingerprint bytes, then
// pushed through the same segmentation, key generation, encryption and store
// paths that real uploads use.

#ifndef REED_TRACE_H_
#define REED_TRACE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "caont.h"
#include "chunker.h"
#include "client.h"
#include "keygen.h"
#include "store.h"

namespace reed {

inline constexpr uint32_t kMaxTraceChunkSize = 65536;

struct TraceRecord {
  Bytes fingerprint;
  uint32_t size = 0;
};

struct TraceSnapshot {
  std::string label;
  std::vector<TraceRecord> records;
};

using Trace = std::vector<TraceSnapshot>;

// Text form: `fp_hex<TAB>size` per line; a line starting with `#snapshot`
// opens a new snapshot, other `#` lines and blank lines are ignored. Throws
// kTraceParse with the offending line number.
Trace ParseTrace(std::istream& in);
Trace ParseTraceText(const std::string& text);
Trace LoadTrace(const std::filesystem::path& path);
void WriteTrace(std::ostream& out, const Trace& trace);

// Fingerprint bytes repeated and truncated to `size`.
Bytes SynthesizeChunk(ByteView fingerprint, size_t size);

struct GeneratorParams {
  uint64_t seed = 1;
  size_t snapshots = 1;
  size_t chunks = 1000;        // per snapshot
  double mutation_rate = 0.0;  // fraction of the previous snapshot replaced
  uint32_t min_chunk = 2048;
  uint32_t max_chunk = 16384;
  size_t fingerprint_bytes = 6;
  // Replacements come in runs of this many adjacent chunks, the way edits to
  // a file touch neighbouring chunks.
  size_t run_length = 32;
};

// Snapshot i+1 equals snapshot i except for exactly round(rate * chunks)
// positions, which get fresh fingerprints and sizes. Fingerprints never
// repeat across the trace unless copied from a previous snapshot.
Trace GenerateTrace(const GeneratorParams& params);

struct ReplayParams {
  KeyingMode mode = KeyingMode::kSimilarity;
  SegmentationParams segmentation;
  Scheme scheme = Scheme::kEnhanced;
  bool drop_zero_chunks = false;
  // Scratch location for the embedded store; a fresh temporary directory
  // (removed afterwards) when empty.
  std::filesystem::path work_dir;
};

struct SnapshotStats {
  std::string label;
  uint64_t chunks = 0;
  uint64_t segments = 0;
  uint64_t key_requests = 0;
  // Bytes this snapshot added.
  uint64_t logical = 0;
  uint64_t physical = 0;
  uint64_t stub = 0;
  // Running totals up to and including this snapshot.
  uint64_t total_logical = 0;
  uint64_t total_physical = 0;
  uint64_t total_stub = 0;

  double saving() const;  // cumulative
};

struct SavingsReport {
  KeyingMode mode = KeyingMode::kSimilarity;
  std::vector<SnapshotStats> snapshots;

  uint64_t logical() const { return snapshots.empty() ? 0 : snapshots.back().total_logical; }
  uint64_t physical() const { return snapshots.empty() ? 0 : snapshots.back().total_physical; }
  uint64_t stub() const { return snapshots.empty() ? 0 : snapshots.back().total_stub; }
  double saving() const { return snapshots.empty() ? 0.0 : snapshots.back().saving(); }

  // Header `snapshot logical physical stub saving`, cumulative values.
  void WriteTsv(std::ostream& out) const;
};

// Replays snapshots one at a time against an embedded store and key manager.
// Deterministic apart from key material, which does not affect sizes.
class TraceReplayer {
 public:
  explicit TraceReplayer(ReplayParams params);
  ~TraceReplayer();

  TraceReplayer(const TraceReplayer&) = delete;
  TraceReplayer& operator=(const TraceReplayer&) = delete;

  const SnapshotStats& Add(const TraceSnapshot& snapshot);

  const SavingsReport& report() const { return report_; }
  DedupStore& store() { return *store_; }

 private:
  ReplayParams params_;
  std::filesystem::path root_;
  bool owns_root_ = false;
  std::unique_ptr<DedupStore> store_;
  std::unique_ptr<KeyManager> manager_;
  std::unique_ptr<LocalKeyManagerSession> session_;
  SavingsReport report_;
};

SavingsReport Replay(const Trace& trace, const ReplayParams& params);

}  // namespace reed

#endif  // REED_TRACE_H_

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

#include "trace.h"

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace reed {
namespace {

using testing::AdaScenario;
using testing::DedupOracle;
using testing::MakeAdaScenario;

std::string ErrorText(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTraceParse);
    return e.what();
  }
  return "";
}

std::set<Bytes> Fingerprints(const TraceSnapshot& s) {
  std::set<Bytes> out;
  for (const auto& r : s.records) out.insert(r.fingerprint);
  return out;
}

TEST(Synthesize, RepeatsFingerprint) {
  Bytes fp{0xAB, 0xCD, 0xEF};
  EXPECT_EQ(ToHex(SynthesizeChunk(fp, 7)), "abcdefabcdefab");
  EXPECT_EQ(ToHex(SynthesizeChunk(fp, 2)), "abcd");
}

TEST(TraceParse, SnapshotsCommentsAndRecords) {
  Trace t = ParseTraceText(
      "# comment\n"
      "0a0b\t100\n"
      "#snapshot second\n"
      "\n"
      "ff\t65536\n"
      "ff\t1\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].records.size(), 1u);
  EXPECT_EQ(t[1].label, "second");
  EXPECT_EQ(t[1].records[0].size, 65536u);

  std::ostringstream out;
  WriteTrace(out, t);
  Trace back = ParseTraceText(out.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].records[1].fingerprint, Bytes{0xFF});
}

TEST(TraceParse, ErrorsNameTheLine) {
  EXPECT_NE(ErrorText([] { ParseTraceText("aa\t1\nzz\t5\n"); }).find("line 2"),
            std::string::npos);
  EXPECT_NE(ErrorText([] { ParseTraceText("aa\t0\n"); }).find("line 1"), std::string::npos);
  EXPECT_NE(ErrorText([] { ParseTraceText("\n\naa\t65537\n"); }).find("line 3"),
            std::string::npos);
  EXPECT_NE(ErrorText([] { ParseTraceText("aa 10\n"); }).find("line 1"), std::string::npos);
  EXPECT_NE(ErrorText([] { ParseTraceText("aa\tx\n"); }).find("line 1"), std::string::npos);
}

TEST(Generator, Deterministic) {
  GeneratorParams p;
  p.snapshots = 3;
  p.mutation_rate = 0.2;
  std::ostringstream a, b;
  WriteTrace(a, GenerateTrace(p));
  WriteTrace(b, GenerateTrace(p));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Generator, MutationRateLaws) {
  for (double rate : {0.0, 0.1, 0.37, 1.0}) {
    GeneratorParams p;
    p.snapshots = 4;
    p.chunks = 1000;
    p.mutation_rate = rate;
    Trace t = GenerateTrace(p);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(Fingerprints(t[0]).size(), 1000u);
    std::set<Bytes> earlier = Fingerprints(t[0]);
    for (size_t s = 1; s < t.size(); ++s) {
      ASSERT_EQ(t[s].records.size(), 1000u);
      size_t changed = 0, fresh = 0;
      for (size_t i = 0; i < 1000; ++i) {
        const auto& r = t[s].records[i];
        EXPECT_GE(r.size, p.min_chunk);
        EXPECT_LE(r.size, p.max_chunk);
        if (r.fingerprint != t[s - 1].records[i].fingerprint) ++changed;
        if (!earlier.count(r.fingerprint)) ++fresh;
      }
      size_t expected = static_cast<size_t>(std::llround(rate * 1000));
      EXPECT_EQ(changed, expected) << rate;
      EXPECT_EQ(fresh, expected) << rate;
      for (const auto& fp : Fingerprints(t[s])) earlier.insert(fp);
    }
  }
}

TEST(Generator, RejectsBadParameters) {
  GeneratorParams p;
  p.mutation_rate = 1.5;
  EXPECT_THROW(GenerateTrace(p), Error);
  p.mutation_rate = 0;
  p.max_chunk = 70000;
  EXPECT_THROW(GenerateTrace(p), Error);
}

ReplayParams Params(KeyingMode mode, size_t avg_segment = 64 << 10) {
  ReplayParams rp;
  rp.mode = mode;
  rp.segmentation = {avg_segment, 8192};
  return rp;
}

TEST(Replay, DuplicateSnapshotAddsOnlyStub) {
  GeneratorParams p;
  p.chunks = 300;
  Trace t = GenerateTrace(p);
  t.push_back(t[0]);
  for (KeyingMode mode : {KeyingMode::kSimilarity, KeyingMode::kPerChunk}) {
    SavingsReport r = Replay(t, Params(mode));
    ASSERT_EQ(r.snapshots.size(), 2u);
    EXPECT_EQ(r.snapshots[1].physical, 0u);
    EXPECT_EQ(r.snapshots[1].stub, 64u * 300 + 28);
    EXPECT_EQ(r.snapshots[1].logical, r.snapshots[0].logical);
    EXPECT_GT(r.snapshots[1].saving(), r.snapshots[0].saving());
  }
}

TEST(Replay, SavingIsMonotoneUnderDuplicates) {
  GeneratorParams p;
  p.chunks = 200;
  Trace one = GenerateTrace(p);
  Trace t;
  for (int i = 0; i < 5; ++i) t.push_back(one[0]);
  SavingsReport r = Replay(t, Params(KeyingMode::kSimilarity));
  for (size_t i = 1; i < r.snapshots.size(); ++i) {
    EXPECT_GT(r.snapshots[i].saving(), r.snapshots[i - 1].saving());
  }
}

TEST(Replay, StubTotalsAreModeIndependent) {
  GeneratorParams p;
  p.chunks = 400;
  p.snapshots = 3;
  p.mutation_rate = 0.25;
  Trace t = GenerateTrace(p);
  SavingsReport sim = Replay(t, Params(KeyingMode::kSimilarity));
  SavingsReport chunk = Replay(t, Params(KeyingMode::kPerChunk));
  EXPECT_EQ(sim.stub(), chunk.stub());
  EXPECT_EQ(sim.logical(), chunk.logical());
  EXPECT_GE(sim.physical(), chunk.physical());
  EXPECT_EQ(chunk.snapshots[0].key_requests, 400u);
  EXPECT_EQ(sim.snapshots[0].key_requests, sim.snapshots[0].segments);
}

TEST(Replay, ZeroChunksCanBeDropped) {
  Trace t = ParseTraceText("0000\t100\n0102\t100\n00\t50\n");
  ReplayParams rp = Params(KeyingMode::kPerChunk);
  EXPECT_EQ(Replay(t, rp).snapshots[0].chunks, 3u);
  rp.drop_zero_chunks = true;
  SavingsReport r = Replay(t, rp);
  EXPECT_EQ(r.snapshots[0].chunks, 1u);
  EXPECT_EQ(r.physical(), 100u);
}

TEST(Replay, MatchesBruteForceOracle) {
  uint64_t seed = 100;
  for (KeyingMode mode : {KeyingMode::kSimilarity, KeyingMode::kPerChunk}) {
    for (size_t chunks : {1u, 50u, 333u, 1000u}) {
      for (double rate : {0.0, 0.05, 0.5}) {
        GeneratorParams p;
        p.seed = ++seed;
        p.snapshots = 3;
        p.chunks = chunks;
        p.mutation_rate = rate;
        p.run_length = 1 + seed % 40;
        p.min_chunk = 512;
        p.max_chunk = 8192;
        Trace t = GenerateTrace(p);
        ReplayParams rp = Params(mode, 32 << 10);
        rp.segmentation.avg_chunk_size = 4096;
        TraceReplayer replayer(rp);
        DedupOracle oracle(mode, rp.segmentation);
        for (const auto& snap : t) {
          uint64_t expected = oracle.Add(snap);
          EXPECT_EQ(replayer.Add(snap).physical, expected)
              << "seed " << seed << " chunks " << chunks << " rate " << rate;
        }
      }
    }
  }
}

TEST(Replay, RepeatedFingerprintsWithinASnapshot) {
  // Hand-written trace with repeats and shared prefixes.
  Trace t = ParseTraceText(
      "aa\t3000\nbb\t3000\naa\t3000\naaaa\t3000\ncc\t100\nbb\t3000\n"
      "#snapshot\nbb\t3000\naa\t3000\ndd\t5000\n");
  for (KeyingMode mode : {KeyingMode::kSimilarity, KeyingMode::kPerChunk}) {
    ReplayParams rp = Params(mode, 8192);
    rp.segmentation.avg_chunk_size = 2048;
    TraceReplayer replayer(rp);
    DedupOracle oracle(mode, rp.segmentation);
    for (const auto& s : t) EXPECT_EQ(replayer.Add(s).physical, oracle.Add(s));
  }
}

TEST(Replay, AdaScenario) {
  AdaScenario s = MakeAdaScenario();
  constexpr uint64_t kSize = AdaScenario::kChunkSize;
  ReplayParams sim;
  sim.mode = KeyingMode::kSimilarity;
  sim.segmentation = s.segmentation;
  ASSERT_EQ(sim.segmentation.divisor(), 4u);
  TraceReplayer replayer(sim);
  const SnapshotStats& st = replayer.Add(s.snapshot);
  EXPECT_EQ(st.segments, 3u);
  EXPECT_EQ(st.key_requests, 3u);
  // A, B, C, E, F, G, H once; D under both k_D and k_A.
  EXPECT_EQ(st.physical, 9 * kSize);
  EXPECT_EQ(replayer.store().Stats().index_entries, 9u);

  ReplayParams chunk = sim;
  chunk.mode = KeyingMode::kPerChunk;
  EXPECT_EQ(Replay(Trace{s.snapshot}, chunk).physical(), 8 * kSize);

  DedupOracle oracle(KeyingMode::kSimilarity, s.segmentation);
  EXPECT_EQ(oracle.Add(s.snapshot), 9 * kSize);
}

TEST(Report, TsvIsCumulative) {
  SavingsReport r;
  SnapshotStats a;
  a.label = "s0";
  a.total_logical = 1000;
  a.total_physical = 400;
  a.total_stub = 100;
  r.snapshots.push_back(a);
  std::ostringstream out;
  r.WriteTsv(out);
  EXPECT_EQ(out.str(), "snapshot\tlogical\tphysical\tstub\tsaving\ns0\t1000\t400\t100\t0.500000\n");
}

}  // namespace
}  // namespace reed

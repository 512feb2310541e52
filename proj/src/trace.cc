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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "primitives.h"
#include "wire.h"

namespace reed {
namespace {

[[noreturn]] void ParseFail(size_t line, const std::string& msg) {
  Fail(ErrorCode::kTraceParse, "line " + std::to_string(line) + ": " + msg);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool AllZero(ByteView b) {
  return std::all_of(b.begin(), b.end(), [](uint8_t v) { return v == 0; });
}

std::filesystem::path MakeScratchDir() {
  std::random_device rd;
  auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::ostringstream name;
    name << "reed-trace-" << std::hex << rd() << rd();
    auto p = base / name.str();
    if (std::filesystem::create_directory(p)) return p;
  }
  Fail(ErrorCode::kStorage, "cannot create scratch directory");
}

}  // namespace

Trace ParseTrace(std::istream& in) {
  Trace trace;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("#snapshot")) {
      trace.push_back({std::string(Trim(line.substr(9))), {}});
      continue;
    }
    if (line.front() == '#') continue;

    size_t tab = line.find('\t');
    if (tab == std::string_view::npos) ParseFail(line_no, "expected fp_hex<TAB>size");
    std::string_view hex = Trim(line.substr(0, tab));
    std::string_view size_text = Trim(line.substr(tab + 1));
    TraceRecord rec;
    try {
      rec.fingerprint = FromHex(hex);
    } catch (const Error&) {
      ParseFail(line_no, "bad fingerprint hex '" + std::string(hex) + "'");
    }
    if (rec.fingerprint.empty()) ParseFail(line_no, "empty fingerprint");
    uint64_t size = 0;
    auto [ptr, ec] = std::from_chars(size_text.data(), size_text.data() + size_text.size(), size);
    if (ec != std::errc() || ptr != size_text.data() + size_text.size()) {
      ParseFail(line_no, "bad chunk size '" + std::string(size_text) + "'");
    }
    if (size < 1 || size > kMaxTraceChunkSize) {
      ParseFail(line_no, "chunk size " + std::to_string(size) + " outside [1, 65536]");
    }
    rec.size = static_cast<uint32_t>(size);
    if (trace.empty()) trace.push_back({"", {}});
    trace.back().records.push_back(std::move(rec));
  }
  return trace;
}

Trace ParseTraceText(const std::string& text) {
  std::istringstream in(text);
  return ParseTrace(in);
}

Trace LoadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open trace " + path.string());
  return ParseTrace(in);
}

void WriteTrace(std::ostream& out, const Trace& trace) {
  for (size_t i = 0; i < trace.size(); ++i) {
    out << "#snapshot";
    if (!trace[i].label.empty()) out << ' ' << trace[i].label;
    out << '\n';
    for (const TraceRecord& r : trace[i].records) {
      out << ToHex(r.fingerprint) << '\t' << r.size << '\n';
    }
  }
}

Bytes SynthesizeChunk(ByteView fingerprint, size_t size) {
  if (fingerprint.empty()) Fail(ErrorCode::kInvalidArgument, "empty trace fingerprint");
  Bytes out(size);
  for (size_t i = 0; i < size; ++i) out[i] = fingerprint[i % fingerprint.size()];
  return out;
}

Trace GenerateTrace(const GeneratorParams& p) {
  if (!(p.mutation_rate >= 0.0 && p.mutation_rate <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "mutation rate must be in [0, 1]");
  }
  if (p.min_chunk < 1 || p.max_chunk < p.min_chunk || p.max_chunk > kMaxTraceChunkSize) {
    Fail(ErrorCode::kInvalidArgument, "chunk size bounds must satisfy 1 <= min <= max <= 65536");
  }
  if (p.fingerprint_bytes < 1 || p.fingerprint_bytes > 32) {
    Fail(ErrorCode::kInvalidArgument, "fingerprint width must be in [1, 32] bytes");
  }
  std::mt19937_64 rng(p.seed);
  std::unordered_set<std::string> used;
  auto fresh = [&]() {
    TraceRecord r;
    r.fingerprint.resize(p.fingerprint_bytes);
    do {
      for (uint8_t& b : r.fingerprint) b = static_cast<uint8_t>(rng());
    } while (AllZero(r.fingerprint) ||
             !used.insert(std::string(r.fingerprint.begin(), r.fingerprint.end())).second);
    r.size = p.min_chunk + static_cast<uint32_t>(rng() % (p.max_chunk - p.min_chunk + 1));
    return r;
  };

  Trace trace;
  if (p.snapshots == 0) return trace;
  trace.reserve(p.snapshots);
  TraceSnapshot first{"0", {}};
  for (size_t i = 0; i < p.chunks; ++i) first.records.push_back(fresh());
  trace.push_back(std::move(first));

  const size_t mutations = static_cast<size_t>(std::llround(p.mutation_rate * static_cast<double>(p.chunks)));
  const size_t run = std::max<size_t>(1, p.run_length);
  for (size_t s = 1; s < p.snapshots; ++s) {
    TraceSnapshot next = trace.back();
    next.label = std::to_string(s);
    std::vector<bool> hit(p.chunks, false);
    size_t done = 0;
    if (mutations == p.chunks) {
      std::fill(hit.begin(), hit.end(), true);
      done = mutations;
    }
    while (done < mutations) {
      size_t start = static_cast<size_t>(rng() % p.chunks);
      for (size_t i = start; i < p.chunks && i < start + run && done < mutations; ++i) {
        if (!hit[i]) {
          hit[i] = true;
          ++done;
        }
      }
    }
    for (size_t i = 0; i < p.chunks; ++i) {
      if (hit[i]) next.records[i] = fresh();
    }
    trace.push_back(std::move(next));
  }
  return trace;
}

double SnapshotStats::saving() const {
  if (total_logical == 0) return 0.0;
  return 1.0 - static_cast<double>(total_physical + total_stub) / static_cast<double>(total_logical);
}

void SavingsReport::WriteTsv(std::ostream& out) const {
  out << "snapshot\tlogical\tphysical\tstub\tsaving\n";
  for (size_t i = 0; i < snapshots.size(); ++i) {
    const SnapshotStats& s = snapshots[i];
    out << (s.label.empty() ? std::to_string(i) : s.label) << '\t' << s.total_logical << '\t'
        << s.total_physical << '\t' << s.total_stub << '\t' << std::fixed << std::setprecision(6)
        << s.saving() << '\n';
  }
}

TraceReplayer::TraceReplayer(ReplayParams params) : params_(std::move(params)) {
  report_.mode = params_.mode;
  if (params_.work_dir.empty()) {
    root_ = MakeScratchDir();
    owns_root_ = true;
  } else {
    root_ = params_.work_dir;
    std::filesystem::create_directories(root_);
  }
  StoreConfig config;
  config.data_root = root_ / "data";
  config.key_root = root_ / "keys";
  config.fsync = false;
  store_ = std::make_unique<DedupStore>(config);
  RateLimiter::Config unlimited{1e15, 1e15};
  manager_ = std::make_unique<KeyManager>(RsaKey::Generate(kManagerKeyBits), unlimited);
  session_ = std::make_unique<LocalKeyManagerSession>(*manager_, "trace");
}

TraceReplayer::~TraceReplayer() {
  store_.reset();
  if (owns_root_) {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
  }
}

const SnapshotStats& TraceReplayer::Add(const TraceSnapshot& snapshot) {
  std::vector<Bytes> chunks;
  chunks.reserve(snapshot.records.size());
  for (const TraceRecord& r : snapshot.records) {
    if (params_.drop_zero_chunks && AllZero(r.fingerprint)) continue;
    chunks.push_back(SynthesizeChunk(r.fingerprint, r.size));
  }
  std::vector<size_t> lengths;
  std::vector<Digest> fps;
  lengths.reserve(chunks.size());
  fps.reserve(chunks.size());
  for (const Bytes& c : chunks) {
    lengths.push_back(c.size());
    fps.push_back(Fingerprint(c));
  }

  std::vector<Segment> segments;
  if (params_.mode == KeyingMode::kSimilarity) {
    segments = SegmentChunks(lengths, fps, params_.segmentation);
  } else {
    for (size_t i = 0; i < chunks.size(); ++i) segments.push_back({i, 1, lengths[i], fps[i]});
  }
  std::vector<Digest> reps;
  reps.reserve(segments.size());
  for (const Segment& s : segments) reps.push_back(s.representative);
  KeyGenerator keygen(*session_);
  std::vector<MleKey> keys = keygen.DeriveKeys(reps);

  StoreStats before = store_->Stats();
  Bytes stubs;
  stubs.reserve(chunks.size() * kStubSize);
  std::vector<Bytes> trimmed;
  std::vector<Digest> trimmed_fps;
  size_t pending = 0;
  auto flush = [&] {
    std::vector<PackageRef> refs;
    for (size_t i = 0; i < trimmed.size(); ++i) refs.push_back({trimmed_fps[i], trimmed[i]});
    if (!refs.empty()) store_->PutPackages(refs);
    trimmed.clear();
    trimmed_fps.clear();
    pending = 0;
  };
  for (size_t s = 0; s < segments.size(); ++s) {
    for (size_t i = segments[s].first_chunk; i < segments[s].first_chunk + segments[s].chunk_count; ++i) {
      SplitPackage p = EncryptChunk(params_.scheme, chunks[i], keys[s]);
      stubs.insert(stubs.end(), p.stub.begin(), p.stub.end());
      if (pending + p.trimmed.size() > kMaxPackageBatchBytes) flush();
      pending += p.trimmed.size();
      trimmed_fps.push_back(Sha256(p.trimmed));
      trimmed.push_back(std::move(p.trimmed));
    }
  }
  flush();

  const size_t index = report_.snapshots.size();
  std::string id_seed = "trace snapshot " + std::to_string(index);
  Digest snapshot_id = Sha256(AsBytes(id_seed));
  store_->PutStub(snapshot_id, 0, EncryptStubFile(ByteView(stubs), RandomKey()));
  StoreStats after = store_->Stats();

  SnapshotStats st;
  st.label = snapshot.label.empty() ? std::to_string(index) : snapshot.label;
  st.chunks = chunks.size();
  st.segments = segments.size();
  st.key_requests = keygen.requests();
  st.logical = after.logical_bytes - before.logical_bytes;
  st.physical = after.physical_bytes - before.physical_bytes;
  st.stub = after.stub_bytes - before.stub_bytes;
  st.total_logical = after.logical_bytes;
  st.total_physical = after.physical_bytes;
  st.total_stub = after.stub_bytes;
  report_.snapshots.push_back(st);
  return report_.snapshots.back();
}

SavingsReport Replay(const Trace& trace, const ReplayParams& params) {
  TraceReplayer replayer(params);
  for (const TraceSnapshot& s : trace) replayer.Add(s);
  return replayer.report();
}

}  // namespace reed

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

#include "client.h"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <optional>
#include <thread>

#include "bounded_queue.h"
#include "primitives.h"
#include "wire.h"

namespace reed {
namespace {

constexpr uint32_t kRecipeMagic = 0x52435031;  // "RCP1"

struct ChunkedFile {
  std::vector<ChunkSpan> spans;
  std::vector<size_t> lengths;
  std::vector<Digest> fingerprints;
  std::vector<Segment> segments;
};

ChunkedFile Prepare(ByteView data, const ClientOptions& opt) {
  ChunkedFile f;
  f.spans = ChunkData(data, opt.chunking);
  f.lengths.reserve(f.spans.size());
  f.fingerprints.reserve(f.spans.size());
  for (const ChunkSpan& s : f.spans) {
    f.lengths.push_back(s.length);
    f.fingerprints.push_back(Fingerprint(data.subspan(s.offset, s.length)));
  }
  if (opt.keying == KeyingMode::kSimilarity) {
    f.segments = SegmentChunks(f.lengths, f.fingerprints, opt.segmentation);
  } else {
    f.segments.reserve(f.spans.size());
    for (size_t i = 0; i < f.spans.size(); ++i) {
      f.segments.push_back(Segment{i, 1, f.lengths[i], f.fingerprints[i]});
    }
  }
  return f;
}

struct EncryptedSegment {
  std::vector<Bytes> trimmed;
  std::vector<Digest> trimmed_fps;
  std::vector<Bytes> stubs;
};

EncryptedSegment EncryptSegment(ByteView data, const ChunkedFile& f, size_t seg_index,
                                const MleKey& key, Scheme scheme) {
  const Segment& seg = f.segments[seg_index];
  EncryptedSegment out;
  out.trimmed.reserve(seg.chunk_count);
  out.trimmed_fps.reserve(seg.chunk_count);
  out.stubs.reserve(seg.chunk_count);
  for (size_t i = seg.first_chunk; i < seg.first_chunk + seg.chunk_count; ++i) {
    SplitPackage p = EncryptChunk(scheme, data.subspan(f.spans[i].offset, f.spans[i].length), key);
    out.trimmed_fps.push_back(Sha256(p.trimmed));
    out.trimmed.push_back(std::move(p.trimmed));
    out.stubs.push_back(std::move(p.stub));
  }
  return out;
}

// Collects encrypted segments in file order and ships their trimmed packages
// in PUT_PACKAGES batches of at most kMaxPackageBatchBytes.
class PackageSender {
 public:
  PackageSender(StoreSession& store, size_t chunk_count) : store_(store) {
    stubs_.reserve(chunk_count * kStubSize);
    recipe_fps_.reserve(chunk_count);
  }

  void Add(EncryptedSegment seg) {
    for (size_t i = 0; i < seg.trimmed.size(); ++i) {
      if (!pending_.empty() && pending_bytes_ + seg.trimmed[i].size() > kMaxPackageBatchBytes) {
        Flush();
      }
      pending_bytes_ += seg.trimmed[i].size();
      pending_fps_.push_back(seg.trimmed_fps[i]);
      pending_.push_back(std::move(seg.trimmed[i]));
      recipe_fps_.push_back(seg.trimmed_fps[i]);
      stubs_.insert(stubs_.end(), seg.stubs[i].begin(), seg.stubs[i].end());
    }
  }

  void Flush() {
    if (pending_.empty()) return;
    std::vector<PackageRef> refs;
    refs.reserve(pending_.size());
    for (size_t i = 0; i < pending_.size(); ++i) refs.push_back({pending_fps_[i], pending_[i]});
    stored_ += store_.PutPackages(refs);
    pending_.clear();
    pending_fps_.clear();
    pending_bytes_ = 0;
  }

  uint64_t stored() const { return stored_; }
  const Bytes& stubs() const { return stubs_; }
  const std::vector<Digest>& recipe_fps() const { return recipe_fps_; }

 private:
  StoreSession& store_;
  std::vector<Bytes> pending_;
  std::vector<Digest> pending_fps_;
  size_t pending_bytes_ = 0;
  uint64_t stored_ = 0;
  Bytes stubs_;
  std::vector<Digest> recipe_fps_;
};

// Key generation runs on the calling thread and feeds a bounded work queue;
// `workers` threads encrypt segments; one sender thread ships them in order.
void RunPipelined(ByteView data, const ChunkedFile& f, KeyGenerator& keygen,
                  const ClientOptions& opt, PackageSender& sender) {
  const size_t n = f.segments.size();
  const size_t workers = std::max<size_t>(1, opt.workers);
  const size_t window = 4 * workers;

  BoundedQueue<std::pair<size_t, MleKey>> work(2 * workers);
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::optional<EncryptedSegment>> done(n);
  size_t next_to_send = 0;
  std::exception_ptr error;

  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lock(mu);
      if (!error) error = e;
    }
    work.Close();
    cv.notify_all();
  };

  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (auto item = work.Pop()) {
        try {
          {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return error || item->first < next_to_send + window; });
            if (error) return;
          }
          EncryptedSegment enc = EncryptSegment(data, f, item->first, item->second, opt.scheme);
          std::lock_guard lock(mu);
          done[item->first] = std::move(enc);
          cv.notify_all();
        } catch (...) {
          fail(std::current_exception());
          return;
        }
      }
    });
  }

  std::thread send_thread([&] {
    try {
      for (size_t i = 0; i < n; ++i) {
        EncryptedSegment seg;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return error || done[i].has_value(); });
          if (error) return;
          seg = std::move(*done[i]);
          done[i].reset();
          ++next_to_send;
          cv.notify_all();
        }
        sender.Add(std::move(seg));
      }
      sender.Flush();
    } catch (...) {
      fail(std::current_exception());
    }
  });

  try {
    std::vector<Digest> reps;
    for (size_t off = 0; off < n; off += opt.keygen_batch) {
      size_t count = std::min(opt.keygen_batch, n - off);
      reps.clear();
      for (size_t i = off; i < off + count; ++i) reps.push_back(f.segments[i].representative);
      std::vector<MleKey> keys = keygen.DeriveKeys(reps);
      for (size_t i = 0; i < count; ++i) {
        if (!work.Push({off + i, keys[i]})) break;
      }
      std::lock_guard lock(mu);
      if (error) break;
    }
  } catch (...) {
    fail(std::current_exception());
  }
  work.Close();
  for (std::thread& t : pool) t.join();
  send_thread.join();
  if (error) std::rethrow_exception(error);
}

void RunSerial(ByteView data, const ChunkedFile& f, KeyGenerator& keygen,
               const ClientOptions& opt, PackageSender& sender) {
  std::vector<Digest> reps;
  reps.reserve(f.segments.size());
  for (const Segment& s : f.segments) reps.push_back(s.representative);
  std::vector<MleKey> keys = keygen.DeriveKeys(reps);
  for (size_t i = 0; i < f.segments.size(); ++i) {
    sender.Add(EncryptSegment(data, f, i, keys[i], opt.scheme));
  }
  sender.Flush();
}

// Runs fn(begin, end) over [0, n) split across up to `workers` threads.
template <typename Fn>
void ParallelFor(size_t n, size_t workers, Fn fn) {
  workers = std::clamp<size_t>(workers, 1, std::max<size_t>(1, n));
  if (workers == 1) {
    fn(size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  size_t per = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = std::min(n, w * per);
    size_t end = std::min(n, begin + per);
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Bytes FileRecipe::Serialize() const {
  ByteWriter w;
  w.U32(kRecipeMagic);
  w.U8(static_cast<uint8_t>(scheme));
  w.U8(static_cast<uint8_t>(chunking));
  w.U8(chunker_version);
  w.U8(static_cast<uint8_t>(keying));
  w.Raw(file_id);
  w.Str16(pathname);
  w.U64(file_size);
  w.U32(static_cast<uint32_t>(entries.size()));
  w.U32(key_state_version);
  for (const RecipeEntry& e : entries) {
    w.Raw(e.fingerprint);
    w.U32(e.length);
    w.U32(e.segment);
  }
  return w.Take();
}

FileRecipe FileRecipe::Parse(ByteView data) {
  ByteReader r(data);
  if (r.U32() != kRecipeMagic) Fail(ErrorCode::kMalformed, "not a file recipe");
  FileRecipe rec;
  uint8_t scheme = r.U8();
  uint8_t chunking = r.U8();
  rec.chunker_version = r.U8();
  uint8_t keying = r.U8();
  if (scheme > 1 || chunking > 1 || keying > 1) Fail(ErrorCode::kMalformed, "unknown recipe mode");
  rec.scheme = static_cast<Scheme>(scheme);
  rec.chunking = static_cast<ChunkingMode>(chunking);
  rec.keying = static_cast<KeyingMode>(keying);
  rec.file_id = r.Fixed32();
  rec.pathname = r.Str16();
  rec.file_size = r.U64();
  uint32_t count = r.U32();
  rec.key_state_version = r.U32();
  if (static_cast<uint64_t>(count) * 40 != r.remaining()) {
    Fail(ErrorCode::kMalformed, "recipe entry count mismatch");
  }
  rec.entries.reserve(count);
  uint64_t total = 0;
  for (uint32_t i = 0; i < count; ++i) {
    RecipeEntry e;
    e.fingerprint = r.Fixed32();
    e.length = r.U32();
    e.segment = r.U32();
    total += e.length;
    rec.entries.push_back(e);
  }
  if (total != rec.file_size) Fail(ErrorCode::kMalformed, "recipe chunk lengths do not sum to file size");
  return rec;
}

Digest MakeFileId(const std::string& owner, const std::string& pathname) {
  std::string normal = std::filesystem::path(pathname).lexically_normal().generic_string();
  Bytes buf(owner.begin(), owner.end());
  buf.push_back(0);
  buf.insert(buf.end(), normal.begin(), normal.end());
  return Sha256(buf);
}

Client::Client(ClientIdentity identity, StoreSession& store, KeyManagerSession& manager,
               ClientOptions options)
    : identity_(std::move(identity)), store_(store), manager_(manager), options_(options) {
  options_.chunking.Validate();
  if (options_.keying == KeyingMode::kSimilarity && options_.scheme == Scheme::kBasic &&
      !options_.allow_basic_with_similarity) {
    Fail(ErrorCode::kInvalidArgument,
         "the basic scheme is not safe with segment-level keys; use the enhanced scheme");
  }
  if (options_.keygen_batch == 0 || options_.keygen_batch > kMaxKeygenBatch) {
    Fail(ErrorCode::kInvalidArgument, "keygen batch size must be in [1, 256]");
  }
}

void Client::Register() { store_.PutUser(identity_.user_id, identity_.PublicRecord().Serialize()); }

UploadReport Client::Upload(ByteView data, const std::string& pathname, const Policy& policy) {
  if (policy.users.empty()) Fail(ErrorCode::kPolicyEmpty, "policy must name at least one user");
  UploadReport report;
  report.file_id = MakeFileId(identity_.user_id, pathname);
  try {
    store_.GetState(report.file_id);
    Fail(ErrorCode::kVersionConflict, "file " + pathname + " already exists; use rekey");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFound) throw;
  }

  // Wrap first so an unknown policy member fails before any data moves.
  StoreUserDirectory directory(store_);
  KeyState state = KrInit(identity_.user_id, identity_.derivation.public_key());
  Bytes wrapped = WrapState(state, policy, directory).Serialize();

  ChunkedFile f = Prepare(data, options_);
  KeyGenerator keygen(manager_, options_.keygen_batch);
  PackageSender sender(store_, f.spans.size());
  if (options_.pipelined) {
    RunPipelined(data, f, keygen, options_, sender);
  } else {
    RunSerial(data, f, keygen, options_, sender);
  }

  FileRecipe recipe;
  recipe.file_id = report.file_id;
  recipe.pathname = pathname;
  recipe.file_size = data.size();
  recipe.scheme = options_.scheme;
  recipe.chunking = options_.chunking.mode;
  recipe.keying = options_.keying;
  recipe.key_state_version = state.version;
  recipe.entries.reserve(f.spans.size());
  for (size_t s = 0; s < f.segments.size(); ++s) {
    const Segment& seg = f.segments[s];
    for (size_t i = seg.first_chunk; i < seg.first_chunk + seg.chunk_count; ++i) {
      recipe.entries.push_back({sender.recipe_fps()[i], static_cast<uint32_t>(f.lengths[i]),
                                static_cast<uint32_t>(s)});
    }
  }

  Bytes stub_file = EncryptStubFile(ByteView(sender.stubs()), DeriveFileKey(state));
  store_.PutStub(report.file_id, state.version, stub_file);
  store_.PutRecipe(report.file_id, recipe.Serialize());
  store_.PutState(report.file_id, std::nullopt, state.version, wrapped);

  report.bytes = data.size();
  report.chunks = f.spans.size();
  report.segments = f.segments.size();
  report.key_requests = keygen.requests();
  report.key_round_trips = keygen.round_trips();
  report.packages_stored = sender.stored();
  report.stub_file_bytes = stub_file.size();
  return report;
}

UploadReport Client::UploadFile(const std::filesystem::path& path, const Policy& policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "cannot read " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Upload(data, path.string(), policy);
}

Bytes Client::Download(const Digest& file_id) {
  FileRecipe recipe = FileRecipe::Parse(store_.GetRecipe(file_id));
  if (recipe.file_id != file_id) Fail(ErrorCode::kIntegrityViolation, "recipe belongs to another file");

  KeyState state = UnwrapState(WrappedKeyState::Parse(store_.GetState(file_id).data),
                               identity_.user_id, identity_.access);
  VersionedBlob stub_blob = store_.GetStub(file_id, state.version);
  StoreUserDirectory directory(store_);
  RsaPublicKey owner_public = directory.Lookup(state.owner).derivation_public;
  KeyState era = KrUnwindTo(state, stub_blob.version, owner_public);
  Bytes stubs;
  try {
    stubs = DecryptStubFile(stub_blob.data, DeriveFileKey(era));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kAuthenticationFailure) {
      Fail(ErrorCode::kIntegrityViolation, "stub file failed authentication");
    }
    throw;
  }
  const size_t n = recipe.entries.size();
  if (stubs.size() != n * kStubSize) Fail(ErrorCode::kIntegrityViolation, "stub file size mismatch");

  std::vector<Bytes> packages;
  packages.reserve(n);
  for (size_t off = 0; off < n;) {
    std::vector<Digest> batch;
    size_t bytes = 0;
    while (off < n && (batch.empty() || bytes + recipe.entries[off].length <= kMaxPackageBatchBytes)) {
      bytes += recipe.entries[off].length;
      batch.push_back(recipe.entries[off++].fingerprint);
    }
    for (Bytes& p : store_.GetPackages(batch)) packages.push_back(std::move(p));
  }

  Bytes out(recipe.file_size);
  std::vector<uint64_t> offsets(n + 1, 0);
  for (size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + recipe.entries[i].length;

  ParallelFor(n, options_.workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      if (Sha256(packages[i]) != recipe.entries[i].fingerprint) {
        Fail(ErrorCode::kIntegrityViolation, "trimmed package " + std::to_string(i) + " was altered");
      }
      Bytes chunk = DecryptChunk(recipe.scheme, packages[i],
                                 ByteView(stubs).subspan(i * kStubSize, kStubSize));
      if (chunk.size() != recipe.entries[i].length) {
        Fail(ErrorCode::kIntegrityViolation, "chunk " + std::to_string(i) + " has the wrong length");
      }
      std::copy(chunk.begin(), chunk.end(), out.begin() + static_cast<std::ptrdiff_t>(offsets[i]));
    }
  });
  return out;
}

void Client::DownloadFile(const Digest& file_id, const std::filesystem::path& out_path) {
  Bytes data = Download(file_id);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kStorage, "cannot write " + out_path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) Fail(ErrorCode::kStorage, "short write to " + out_path.string());
}

RekeyResult Client::Rekey(const Digest& file_id, const Policy& policy, RevocationMode mode) {
  StoreUserDirectory directory(store_);
  return reed::Rekey(store_, directory, file_id, policy, mode, identity_);
}

}  // namespace reed

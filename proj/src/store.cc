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

#include "store.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "primitives.h"

namespace reed {
namespace fs = std::filesystem;
namespace {

constexpr size_t kIndexRecordSize = 32 + 4 + 4 + 4;
constexpr std::string_view kContainerExt = ".ctr";

[[noreturn]] void FailErrno(const std::string& what) {
  Fail(ErrorCode::kStorage, what + ": " + std::strerror(errno));
}

void WriteAll(int fd, ByteView data, const std::string& what) {
  size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      FailErrno(what);
    }
    done += static_cast<size_t>(n);
  }
}

void SyncFd(int fd, bool enabled, const std::string& what) {
  if (enabled && ::fsync(fd) != 0) FailErrno(what);
}

void SyncDir(const fs::path& dir, bool enabled) {
  if (!enabled) return;
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

// Write to a temporary sibling, sync, then rename over the target.
void WriteFileAtomic(const fs::path& path, ByteView data, bool sync) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) FailErrno("open " + tmp.string());
  try {
    WriteAll(fd, data, "write " + tmp.string());
    SyncFd(fd, sync, "fsync " + tmp.string());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) FailErrno("rename " + path.string());
  SyncDir(path.parent_path(), sync);
}

Bytes ReadFile(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, what + " not found");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string VersionSuffix(uint32_t version) { return ".v" + std::to_string(version); }

// Parses "<prefix>.v<N>" and returns N, or -1.
int64_t ParseVersioned(const std::string& name, const std::string& prefix) {
  std::string head = prefix + ".v";
  if (name.size() <= head.size() || name.compare(0, head.size(), head) != 0) return -1;
  std::string digits = name.substr(head.size());
  if (!std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 10) return -1;
  return std::stoll(digits);
}

}  // namespace

DedupStore::DedupStore(StoreConfig config) : config_(std::move(config)) {
  if (config_.data_root.empty() || config_.key_root.empty()) {
    Fail(ErrorCode::kInvalidArgument, "data and key roots are required");
  }
  if (config_.container_size == 0 || config_.container_size > UINT32_MAX) {
    Fail(ErrorCode::kInvalidArgument, "container size out of range");
  }
  std::error_code ec;
  for (const fs::path& dir : {config_.data_root / "containers", config_.data_root / "recipes",
                              config_.data_root / "stubs", config_.key_root / "states",
                              config_.key_root / "users"}) {
    fs::create_directories(dir, ec);
    if (ec) Fail(ErrorCode::kStorage, "cannot create " + dir.string() + ": " + ec.message());
  }
  if (fs::equivalent(config_.data_root, config_.key_root)) {
    Fail(ErrorCode::kInvalidArgument, "data and key stores must be separate directories");
  }
  LoadIndex();
  LoadCounters();
}

DedupStore::~DedupStore() {
  if (container_fd_ >= 0) ::close(container_fd_);
  if (index_fd_ >= 0) ::close(index_fd_);
}

fs::path DedupStore::ContainerPath(uint32_t id) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%08u", id);
  fs::path p = config_.data_root / "containers" / name;
  p += kContainerExt;
  return p;
}

void DedupStore::LoadIndex() {
  const fs::path log_path = config_.data_root / "index.log";
  Bytes log;
  if (fs::exists(log_path)) log = ReadFile(log_path, "index log");
  // A torn trailing record from an interrupted append is dropped.
  size_t whole = log.size() - log.size() % kIndexRecordSize;
  if (whole != log.size()) fs::resize_file(log_path, whole);

  ByteReader r(ByteView(log).first(whole));
  while (!r.done()) {
    Digest fp = r.Fixed32();
    Location loc{r.U32(), r.U32(), r.U32()};
    if (index_.emplace(fp, loc).second) physical_bytes_ += loc.length;
  }

  uint32_t max_id = 0;
  bool any = false;
  for (const auto& entry : fs::directory_iterator(config_.data_root / "containers")) {
    if (entry.path().extension() != kContainerExt) continue;
    uint32_t id = static_cast<uint32_t>(std::stoul(entry.path().stem().string()));
    if (entry.file_size() > 0) ++containers_;
    max_id = std::max(max_id, id);
    any = true;
  }
  // Earlier containers are sealed; appends always go to a fresh one.
  open_container_ = any ? max_id + 1 : 0;
  open_size_ = 0;

  index_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (index_fd_ < 0) FailErrno("open index log");
}

void DedupStore::LoadCounters() {
  const fs::path logical = config_.data_root / "logical";
  if (fs::exists(logical)) {
    Bytes raw = ReadFile(logical, "logical counter");
    ByteReader r(raw);
    logical_bytes_ = r.U64();
  }
  for (const auto& entry : fs::directory_iterator(config_.data_root / "stubs")) {
    if (entry.path().extension() != ".tmp") stub_bytes_ += entry.file_size();
  }
}

void DedupStore::PersistLogical() {
  ByteWriter w;
  w.U64(logical_bytes_);
  WriteFileAtomic(config_.data_root / "logical", w.bytes(), config_.fsync);
}

void DedupStore::SealAndRotate() {
  if (container_fd_ >= 0) {
    SyncFd(container_fd_, config_.fsync, "fsync container");
    ::close(container_fd_);
    container_fd_ = -1;
    ++open_container_;
  }
  open_size_ = 0;
}

std::vector<bool> DedupStore::DedupQuery(std::span<const Digest> fingerprints) {
  std::shared_lock lock(index_mu_);
  std::vector<bool> out(fingerprints.size());
  for (size_t i = 0; i < fingerprints.size(); ++i) out[i] = index_.contains(fingerprints[i]);
  return out;
}

uint32_t DedupStore::PutPackages(std::span<const PackageRef> items) {
  for (const PackageRef& item : items) {
    if (item.data.empty() || item.data.size() > UINT32_MAX) {
      Fail(ErrorCode::kInvalidArgument, "package size out of range");
    }
    if (Sha256(item.data) != item.fingerprint) {
      Fail(ErrorCode::kFingerprintMismatch,
           "package does not hash to " + ToHex(item.fingerprint));
    }
  }

  std::lock_guard ingest(ingest_mu_);
  std::vector<std::pair<Digest, Location>> fresh;
  std::unordered_set<Digest, DigestHash> in_batch;
  ByteWriter log;
  uint64_t batch_logical = 0;
  {
    std::shared_lock read(index_mu_);
    for (const PackageRef& item : items) {
      batch_logical += item.data.size();
      if (index_.contains(item.fingerprint) || !in_batch.insert(item.fingerprint).second) continue;

      if (open_size_ > 0 && open_size_ + item.data.size() > config_.container_size) {
        SealAndRotate();
      }
      if (container_fd_ < 0) {
        fs::path path = ContainerPath(open_container_);
        container_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (container_fd_ < 0) FailErrno("open " + path.string());
      }
      WriteAll(container_fd_, item.data, "append container");
      Location loc{open_container_, static_cast<uint32_t>(open_size_),
                   static_cast<uint32_t>(item.data.size())};
      if (open_size_ == 0) ++containers_;
      open_size_ += item.data.size();
      fresh.emplace_back(item.fingerprint, loc);
      log.Raw(item.fingerprint);
      log.U32(loc.container);
      log.U32(loc.offset);
      log.U32(loc.length);
    }
  }

  if (container_fd_ >= 0) SyncFd(container_fd_, config_.fsync, "fsync container");
  if (!fresh.empty()) {
    WriteAll(index_fd_, log.bytes(), "append index log");
    SyncFd(index_fd_, config_.fsync, "fsync index log");
  }
  {
    std::unique_lock write(index_mu_);
    for (const auto& [fp, loc] : fresh) {
      index_.emplace(fp, loc);
      physical_bytes_ += loc.length;
    }
    logical_bytes_ += batch_logical;
  }
  PersistLogical();
  if (open_size_ >= config_.container_size) SealAndRotate();
  return static_cast<uint32_t>(fresh.size());
}

std::vector<Bytes> DedupStore::GetPackages(std::span<const Digest> fingerprints) {
  std::vector<Location> locs(fingerprints.size());
  {
    std::shared_lock lock(index_mu_);
    for (size_t i = 0; i < fingerprints.size(); ++i) {
      auto it = index_.find(fingerprints[i]);
      if (it == index_.end()) {
        Fail(ErrorCode::kNotFound, "package " + ToHex(fingerprints[i]) + " not found");
      }
      locs[i] = it->second;
    }
  }
  // Visit containers in order so each is opened once.
  std::vector<size_t> order(fingerprints.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::tie(locs[a].container, locs[a].offset) < std::tie(locs[b].container, locs[b].offset);
  });

  std::vector<Bytes> out(fingerprints.size());
  int fd = -1;
  uint32_t fd_container = 0;
  auto close_fd = [&] {
    if (fd >= 0) ::close(fd);
    fd = -1;
  };
  try {
    for (size_t i : order) {
      const Location& loc = locs[i];
      if (fd < 0 || fd_container != loc.container) {
        close_fd();
        fs::path path = ContainerPath(loc.container);
        fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd < 0) FailErrno("open " + path.string());
        fd_container = loc.container;
      }
      Bytes buf(loc.length);
      size_t done = 0;
      while (done < buf.size()) {
        ssize_t n = ::pread(fd, buf.data() + done, buf.size() - done,
                            static_cast<off_t>(loc.offset + done));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) Fail(ErrorCode::kStorage, "short read from container");
        done += static_cast<size_t>(n);
      }
      out[i] = std::move(buf);
    }
  } catch (...) {
    close_fd();
    throw;
  }
  close_fd();
  return out;
}

void DedupStore::PutRecipe(const Digest& file_id, ByteView recipe) {
  WriteFileAtomic(config_.data_root / "recipes" / ToHex(file_id), recipe, config_.fsync);
}

Bytes DedupStore::GetRecipe(const Digest& file_id) {
  return ReadFile(config_.data_root / "recipes" / ToHex(file_id), "recipe");
}

void DedupStore::PutStub(const Digest& file_id, uint32_t version, ByteView stub_file) {
  std::lock_guard lock(blob_mu_);
  fs::path path = config_.data_root / "stubs" / (ToHex(file_id) + VersionSuffix(version));
  std::error_code ec;
  uint64_t old = fs::exists(path) ? fs::file_size(path, ec) : 0;
  WriteFileAtomic(path, stub_file, config_.fsync);
  stub_bytes_ = stub_bytes_ - old + stub_file.size();
}

VersionedBlob DedupStore::GetStub(const Digest& file_id, uint32_t max_version) {
  const std::string prefix = ToHex(file_id);
  int64_t best = -1;
  for (const auto& entry : fs::directory_iterator(config_.data_root / "stubs")) {
    int64_t v = ParseVersioned(entry.path().filename().string(), prefix);
    if (v >= 0 && v <= max_version) best = std::max(best, v);
  }
  if (best < 0) Fail(ErrorCode::kNotFound, "stub file for " + prefix + " not found");
  VersionedBlob out;
  out.version = static_cast<uint32_t>(best);
  out.data = ReadFile(config_.data_root / "stubs" / (prefix + VersionSuffix(out.version)),
                      "stub file");
  return out;
}

void DedupStore::PutState(const Digest& file_id, std::optional<uint32_t> expected,
                          uint32_t version, ByteView wrapped_state) {
  std::lock_guard lock(blob_mu_);
  const std::string prefix = ToHex(file_id);
  const fs::path pointer = config_.key_root / "states" / (prefix + ".current");
  std::optional<uint32_t> current;
  if (fs::exists(pointer)) {
    Bytes raw = ReadFile(pointer, "state pointer");
    ByteReader r(raw);
    current = r.U32();
  }
  if (current != expected) {
    Fail(ErrorCode::kVersionConflict,
         "key state of " + prefix + " is at version " +
             (current ? std::to_string(*current) : std::string("none")));
  }
  if (current && version <= *current) {
    Fail(ErrorCode::kVersionConflict, "new key-state version must advance");
  }
  WriteFileAtomic(config_.key_root / "states" / (prefix + VersionSuffix(version)), wrapped_state,
                  config_.fsync);
  ByteWriter w;
  w.U32(version);
  WriteFileAtomic(pointer, w.bytes(), config_.fsync);
}

VersionedBlob DedupStore::GetState(const Digest& file_id) {
  const std::string prefix = ToHex(file_id);
  Bytes raw = ReadFile(config_.key_root / "states" / (prefix + ".current"), "key state");
  ByteReader r(raw);
  VersionedBlob out;
  out.version = r.U32();
  out.data = ReadFile(config_.key_root / "states" / (prefix + VersionSuffix(out.version)),
                      "key state");
  return out;
}

void DedupStore::PutUser(const std::string& user_id, ByteView record) {
  if (user_id.empty()) Fail(ErrorCode::kInvalidArgument, "user id must not be empty");
  WriteFileAtomic(config_.key_root / "users" / ToHex(AsBytes(user_id)), record, config_.fsync);
}

Bytes DedupStore::GetUser(const std::string& user_id) {
  if (user_id.empty()) Fail(ErrorCode::kNotFound, "user record not found");
  return ReadFile(config_.key_root / "users" / ToHex(AsBytes(user_id)), "user " + user_id);
}

StoreStats DedupStore::Stats() {
  StoreStats s;
  {
    std::shared_lock lock(index_mu_);
    s.logical_bytes = logical_bytes_;
    s.physical_bytes = physical_bytes_;
    s.index_entries = index_.size();
    s.containers = containers_;
  }
  std::lock_guard lock(blob_mu_);
  s.stub_bytes = stub_bytes_;
  return s;
}

Digest DedupStore::ContainerDigest() {
  std::lock_guard ingest(ingest_mu_);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config_.data_root / "containers")) {
    if (entry.path().extension() == kContainerExt) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Bytes all;
  for (const fs::path& p : files) {
    std::string name = p.filename().string();
    all.insert(all.end(), name.begin(), name.end());
    Bytes data = ReadFile(p, "container");
    all.insert(all.end(), data.begin(), data.end());
  }
  return Sha256(all);
}

}  // namespace reed

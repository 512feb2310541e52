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

#ifndef REED_STORE_H_
#define REED_STORE_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "store_session.h"

namespace reed {

inline constexpr uint64_t kDefaultContainerSize = 4u << 20;

struct StoreConfig {
  std::filesystem::path data_root;  // containers, index, recipes, stub files
  std::filesystem::path key_root;   // wrapped key states, user records
  uint64_t container_size = kDefaultContainerSize;
  bool fsync = true;
};

struct DigestHash {
  size_t operator()(const Digest& d) const {
    size_t h;
    std::memcpy(&h, d.data(), sizeof(h));
    return h;
  }
};

// The deduplicating server store. Unique trimmed packages are appended to
// fixed-capacity containers and located through a fingerprint index that is
// persisted as an append-only log and rebuilt in memory on open. Everything
// else is an id-addressed blob; key material lives under key_root only.
class DedupStore : public StoreSession {
 public:
  explicit DedupStore(StoreConfig config);
  ~DedupStore() override;

  DedupStore(const DedupStore&) = delete;
  DedupStore& operator=(const DedupStore&) = delete;

  std::vector<bool> DedupQuery(std::span<const Digest> fingerprints) override;
  // Verifies SHA-256(data) == fingerprint for the whole batch before storing
  // anything; throws kFingerprintMismatch otherwise.
  uint32_t PutPackages(std::span<const PackageRef> items) override;
  std::vector<Bytes> GetPackages(std::span<const Digest> fingerprints) override;

  void PutRecipe(const Digest& file_id, ByteView recipe) override;
  Bytes GetRecipe(const Digest& file_id) override;
  void PutStub(const Digest& file_id, uint32_t version, ByteView stub_file) override;
  VersionedBlob GetStub(const Digest& file_id, uint32_t max_version) override;
  void PutState(const Digest& file_id, std::optional<uint32_t> expected, uint32_t version,
                ByteView wrapped_state) override;
  VersionedBlob GetState(const Digest& file_id) override;
  void PutUser(const std::string& user_id, ByteView record) override;
  Bytes GetUser(const std::string& user_id) override;
  StoreStats Stats() override;

  const StoreConfig& config() const { return config_; }

  // SHA-256 over every container file in id order; used to show that
  // operations such as rekeying leave deduplicated data untouched.
  Digest ContainerDigest();

 private:
  struct Location {
    uint32_t container = 0;
    uint32_t offset = 0;
    uint32_t length = 0;
  };

  void LoadIndex();
  void LoadCounters();
  void PersistLogical();
  std::filesystem::path ContainerPath(uint32_t id) const;
  void SealAndRotate();

  StoreConfig config_;

  // Ingest path: container append, index log append, in-memory insert.
  std::mutex ingest_mu_;
  int index_fd_ = -1;
  int container_fd_ = -1;
  uint32_t open_container_ = 0;
  uint64_t open_size_ = 0;

  mutable std::shared_mutex index_mu_;
  std::unordered_map<Digest, Location, DigestHash> index_;
  uint64_t physical_bytes_ = 0;
  uint64_t logical_bytes_ = 0;
  uint64_t containers_ = 0;

  std::mutex blob_mu_;
  uint64_t stub_bytes_ = 0;
};

}  // namespace reed

#endif  // REED_STORE_H_

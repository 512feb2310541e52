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

#ifndef REED_STORE_SESSION_H_
#define REED_STORE_SESSION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytes.h"

namespace reed {

struct StoreStats {
  uint64_t logical_bytes = 0;   // trimmed-package bytes received, duplicates included
  uint64_t physical_bytes = 0;  // unique trimmed-package bytes in containers
  uint64_t stub_bytes = 0;      // encrypted stub files, all versions
  uint64_t containers = 0;
  uint64_t index_entries = 0;

  // 1 - (physical + stub) / logical; 0 for an empty store.
  double saving() const {
    if (logical_bytes == 0) return 0.0;
    return 1.0 - static_cast<double>(physical_bytes + stub_bytes) /
                     static_cast<double>(logical_bytes);
  }
  bool operator==(const StoreStats&) const = default;
};

struct PackageRef {
  Digest fingerprint;
  ByteView data;
};

struct VersionedBlob {
  uint32_t version = 0;
  Bytes data;
};

// Everything a client can ask of the dedup server. Implemented in-process by
// DedupStore and over the wire by RemoteStoreSession.
class StoreSession {
 public:
  virtual ~StoreSession() = default;

  virtual std::vector<bool> DedupQuery(std::span<const Digest> fingerprints) = 0;
  // Returns the number of packages that were not already stored.
  virtual uint32_t PutPackages(std::span<const PackageRef> items) = 0;
  virtual std::vector<Bytes> GetPackages(std::span<const Digest> fingerprints) = 0;

  virtual void PutRecipe(const Digest& file_id, ByteView recipe) = 0;
  virtual Bytes GetRecipe(const Digest& file_id) = 0;

  virtual void PutStub(const Digest& file_id, uint32_t version, ByteView stub_file) = 0;
  // Newest stub file whose version is <= max_version.
  virtual VersionedBlob GetStub(const Digest& file_id, uint32_t max_version) = 0;

  // Compare-and-set on the file's current key-state version. `expected` empty
  // means the file must not have a state yet.
  virtual void PutState(const Digest& file_id, std::optional<uint32_t> expected,
                        uint32_t version, ByteView wrapped_state) = 0;
  virtual VersionedBlob GetState(const Digest& file_id) = 0;

  virtual void PutUser(const std::string& user_id, ByteView record) = 0;
  virtual Bytes GetUser(const std::string& user_id) = 0;

  virtual StoreStats Stats() = 0;
};

}  // namespace reed

#endif  // REED_STORE_SESSION_H_

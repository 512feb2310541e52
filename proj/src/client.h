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

#ifndef REED_CLIENT_H_
#define REED_CLIENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "caont.h"
#include "chunker.h"
#include "keygen.h"
#include "rekeying.h"
#include "store_session.h"

namespace reed {

enum class KeyingMode : uint8_t { kPerChunk = 0, kSimilarity = 1 };

struct RecipeEntry {
  Digest fingerprint;  // of the trimmed package
  uint32_t length = 0;
  uint32_t segment = 0;
};

struct FileRecipe {
  Digest file_id{};
  std::string pathname;
  uint64_t file_size = 0;
  Scheme scheme = Scheme::kEnhanced;
  ChunkingMode chunking = ChunkingMode::kRabin;
  uint8_t chunker_version = kRabinChunkerVersion;
  KeyingMode keying = KeyingMode::kSimilarity;
  uint32_t key_state_version = 0;  // version that encrypted the first stub file
  std::vector<RecipeEntry> entries;

  Bytes Serialize() const;
  // Throws kMalformed, including when entry lengths do not sum to file_size.
  static FileRecipe Parse(ByteView data);
};

struct ClientOptions {
  ChunkingParams chunking;
  SegmentationParams segmentation;
  KeyingMode keying = KeyingMode::kSimilarity;
  Scheme scheme = Scheme::kEnhanced;
  // Basic packages under a shared segment key XOR to the plaintext XOR, so
  // that combination is refused unless explicitly allowed.
  bool allow_basic_with_similarity = false;
  size_t workers = 2;
  bool pipelined = true;
  size_t keygen_batch = kMaxKeygenBatch;
};

struct UploadReport {
  Digest file_id{};
  uint64_t bytes = 0;
  uint64_t chunks = 0;
  uint64_t segments = 0;
  uint64_t key_requests = 0;   // fingerprints sent to the key manager
  uint64_t key_round_trips = 0;
  uint64_t packages_stored = 0;  // packages the server did not have yet
  uint64_t stub_file_bytes = 0;
};

// SHA-256(owner || 0x00 || pathname with redundant separators removed).
Digest MakeFileId(const std::string& owner, const std::string& pathname);

class Client {
 public:
  Client(ClientIdentity identity, StoreSession& store, KeyManagerSession& manager,
         ClientOptions options = {});

  const ClientIdentity& identity() const { return identity_; }
  const ClientOptions& options() const { return options_; }

  // Publishes this user's public access and derivation keys.
  void Register();

  UploadReport Upload(ByteView data, const std::string& pathname, const Policy& policy);
  UploadReport UploadFile(const std::filesystem::path& path, const Policy& policy);

  // Aborts with kIntegrityViolation if any chunk fails verification.
  Bytes Download(const Digest& file_id);
  void DownloadFile(const Digest& file_id, const std::filesystem::path& out);

  RekeyResult Rekey(const Digest& file_id, const Policy& policy, RevocationMode mode);

 private:
  ClientIdentity identity_;
  StoreSession& store_;
  KeyManagerSession& manager_;
  ClientOptions options_;
};

}  // namespace reed

#endif  // REED_CLIENT_H_

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

#ifndef REED_CAONT_H_
#define REED_CAONT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bytes.h"

namespace reed {

inline constexpr size_t kStubSize = 64;
inline constexpr size_t kCanarySize = 32;
inline constexpr size_t kTailSize = 32;

using MleKey = Digest;
using FileKey = Digest;

enum class Scheme : uint8_t { kBasic = 0, kEnhanced = 1 };

const char* SchemeName(Scheme scheme);

struct SplitPackage {
  Bytes trimmed;
  Bytes stub;
};

// G(K) = AES-256(K) over the all-zero block in counter mode.
Bytes Mask(const Digest& key, size_t length);

// XOR of consecutive 32-byte pieces; a ragged final piece is zero-extended.
Digest SelfXor(ByteView data);

// Deterministic MLE layer of the enhanced scheme (zero-nonce AES-256-CTR).
Bytes MleEncrypt(ByteView chunk, const MleKey& key);
Bytes MleDecrypt(ByteView ciphertext, const MleKey& key);

// Splits at |package| - stub_size; throws kPackageTooSmall if nothing would
// remain for the trimmed part.
SplitPackage SplitPackageAt(Bytes package, size_t stub_size = kStubSize);
Bytes JoinPackage(ByteView trimmed, ByteView stub);

// Basic scheme: C = (M || canary) ^ G(K_M), t = K_M ^ H(C).
SplitPackage BasicEncrypt(ByteView chunk, const MleKey& key);
// Throws kIntegrityViolation if the recovered canary is not all zero.
Bytes BasicDecrypt(ByteView trimmed, ByteView stub);

// Enhanced scheme: C1 = MLE(M), h = H(C1 || K_M), C2 = (C1 || K_M) ^ G(h),
// t = SelfXor(C2) ^ h.
SplitPackage EnhancedEncrypt(ByteView chunk, const MleKey& key);
// Throws kIntegrityViolation if H(C1 || K_M) != h.
Bytes EnhancedDecrypt(ByteView trimmed, ByteView stub);

SplitPackage EncryptChunk(Scheme scheme, ByteView chunk, const MleKey& key);
Bytes DecryptChunk(Scheme scheme, ByteView trimmed, ByteView stub);

// Stub files: 12-byte nonce || AES-256-GCM(concatenated stubs) || 16-byte tag.
Bytes EncryptStubFile(std::span<const Bytes> stubs, const FileKey& key);
Bytes EncryptStubFile(ByteView concatenated_stubs, const FileKey& key);
// Throws kAuthenticationFailure on a wrong key or tampered blob.
Bytes DecryptStubFile(ByteView blob, const FileKey& key);

}  // namespace reed

#endif  // REED_CAONT_H_

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

// Thin RAII wrappers over the OpenSSL primitives used throughout: SHA-256,
// AES-256 counter-mode keystreams, AES-256-GCM and the system CSPRNG.

#ifndef REED_PRIMITIVES_H_
#define REED_PRIMITIVES_H_

#include <cstddef>
#include <span>

#include "bytes.h"

namespace reed {

inline constexpr size_t kKeySize = 32;
inline constexpr size_t kGcmNonceSize = 12;
inline constexpr size_t kGcmTagSize = 16;

Digest Sha256(ByteView data);
Digest Sha256(ByteView a, ByteView b);

// XORs the AES-256-CTR keystream (zero IV, counter starting at 0) into `data`.
// Applying it twice is the identity.
void AesCtrXor(const Digest& key, std::span<uint8_t> data);

// nonce || ciphertext || tag
Bytes GcmSeal(const Digest& key, ByteView plaintext, ByteView aad = {});
// Fails with kAuthenticationFailure on a wrong key or tampered input.
Bytes GcmOpen(const Digest& key, ByteView sealed, ByteView aad = {});

void RandomFill(std::span<uint8_t> out);
Digest RandomKey();

}  // namespace reed

#endif  // REED_PRIMITIVES_H_

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

#include "caont.h"

#include <algorithm>

#include "primitives.h"

namespace reed {

const char* SchemeName(Scheme scheme) {
  return scheme == Scheme::kBasic ? "basic" : "enhanced";
}

Bytes Mask(const Digest& key, size_t length) {
  Bytes out(length, 0);
  AesCtrXor(key, out);
  return out;
}

Digest SelfXor(ByteView data) {
  Digest acc{};
  for (size_t off = 0; off < data.size(); off += acc.size()) {
    XorInto(acc, data.subspan(off, std::min(acc.size(), data.size() - off)));
  }
  return acc;
}

Bytes MleEncrypt(ByteView chunk, const MleKey& key) {
  Bytes out(chunk.begin(), chunk.end());
  AesCtrXor(key, out);
  return out;
}

Bytes MleDecrypt(ByteView ciphertext, const MleKey& key) { return MleEncrypt(ciphertext, key); }

SplitPackage SplitPackageAt(Bytes package, size_t stub_size) {
  if (package.size() <= stub_size) {
    Fail(ErrorCode::kPackageTooSmall, "package must be larger than the stub");
  }
  SplitPackage out;
  out.stub.assign(package.end() - static_cast<std::ptrdiff_t>(stub_size), package.end());
  package.resize(package.size() - stub_size);
  out.trimmed = std::move(package);
  return out;
}

Bytes JoinPackage(ByteView trimmed, ByteView stub) {
  Bytes out;
  out.reserve(trimmed.size() + stub.size());
  out.insert(out.end(), trimmed.begin(), trimmed.end());
  out.insert(out.end(), stub.begin(), stub.end());
  return out;
}

SplitPackage BasicEncrypt(ByteView chunk, const MleKey& key) {
  if (chunk.empty()) Fail(ErrorCode::kInvalidArgument, "chunk must not be empty");
  // package = (M || canary) ^ G(K) || K ^ H(C)
  Bytes package(chunk.size() + kCanarySize + kTailSize, 0);
  std::copy(chunk.begin(), chunk.end(), package.begin());
  std::span<uint8_t> head(package.data(), chunk.size() + kCanarySize);
  AesCtrXor(key, head);
  Digest tail = Sha256(head);
  XorInto(tail, key);
  std::copy(tail.begin(), tail.end(), package.begin() + static_cast<std::ptrdiff_t>(head.size()));
  return SplitPackageAt(std::move(package));
}

Bytes BasicDecrypt(ByteView trimmed, ByteView stub) {
  if (trimmed.size() + stub.size() < 1 + kCanarySize + kTailSize) {
    Fail(ErrorCode::kIntegrityViolation, "package shorter than canary and tail");
  }
  Bytes package = JoinPackage(trimmed, stub);
  std::span<uint8_t> head(package.data(), package.size() - kTailSize);
  Digest key = Sha256(head);
  XorInto(key, std::span(package).last(kTailSize));
  AesCtrXor(key, head);
  auto canary = head.last(kCanarySize);
  if (!std::all_of(canary.begin(), canary.end(), [](uint8_t b) { return b == 0; })) {
    Fail(ErrorCode::kIntegrityViolation, "canary mismatch");
  }
  package.resize(head.size() - kCanarySize);
  return package;
}

SplitPackage EnhancedEncrypt(ByteView chunk, const MleKey& key) {
  if (chunk.empty()) Fail(ErrorCode::kInvalidArgument, "chunk must not be empty");
  // Y = C1 || K_M, laid out in place; the tail slot follows.
  Bytes package(chunk.size() + kKeySize + kTailSize, 0);
  std::copy(chunk.begin(), chunk.end(), package.begin());
  AesCtrXor(key, std::span(package.data(), chunk.size()));
  std::copy(key.begin(), key.end(), package.begin() + static_cast<std::ptrdiff_t>(chunk.size()));

  std::span<uint8_t> head(package.data(), chunk.size() + kKeySize);
  Digest h = Sha256(head);
  AesCtrXor(h, head);
  Digest tail = SelfXor(head);
  XorInto(tail, h);
  std::copy(tail.begin(), tail.end(), package.begin() + static_cast<std::ptrdiff_t>(head.size()));
  return SplitPackageAt(std::move(package));
}

Bytes EnhancedDecrypt(ByteView trimmed, ByteView stub) {
  if (trimmed.size() + stub.size() < 1 + kKeySize + kTailSize) {
    Fail(ErrorCode::kIntegrityViolation, "package shorter than key and tail");
  }
  Bytes package = JoinPackage(trimmed, stub);
  std::span<uint8_t> head(package.data(), package.size() - kTailSize);
  Digest h = SelfXor(head);
  XorInto(h, std::span(package).last(kTailSize));
  AesCtrXor(h, head);
  if (Sha256(head) != h) Fail(ErrorCode::kIntegrityViolation, "hash key mismatch");

  MleKey key;
  std::copy(head.end() - kKeySize, head.end(), key.begin());
  package.resize(head.size() - kKeySize);
  AesCtrXor(key, package);
  return package;
}

SplitPackage EncryptChunk(Scheme scheme, ByteView chunk, const MleKey& key) {
  return scheme == Scheme::kBasic ? BasicEncrypt(chunk, key) : EnhancedEncrypt(chunk, key);
}

Bytes DecryptChunk(Scheme scheme, ByteView trimmed, ByteView stub) {
  return scheme == Scheme::kBasic ? BasicDecrypt(trimmed, stub) : EnhancedDecrypt(trimmed, stub);
}

Bytes EncryptStubFile(std::span<const Bytes> stubs, const FileKey& key) {
  Bytes joined;
  joined.reserve(stubs.size() * kStubSize);
  for (const Bytes& s : stubs) joined.insert(joined.end(), s.begin(), s.end());
  return EncryptStubFile(joined, key);
}

Bytes EncryptStubFile(ByteView concatenated_stubs, const FileKey& key) {
  return GcmSeal(key, concatenated_stubs);
}

Bytes DecryptStubFile(ByteView blob, const FileKey& key) { return GcmOpen(key, blob); }

}  // namespace reed

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

#include "primitives.h"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <memory>

namespace reed {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

CipherCtx NewCipherCtx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) Fail(ErrorCode::kInternal, "EVP_CIPHER_CTX_new failed");
  return ctx;
}

void Check(int rc, const char* what) {
  if (rc != 1) Fail(ErrorCode::kInternal, what);
}

}  // namespace

Digest Sha256(ByteView data) { return Sha256(data, {}); }

Digest Sha256(ByteView a, ByteView b) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx) Fail(ErrorCode::kInternal, "EVP_MD_CTX_new failed");
  Digest out;
  unsigned int len = 0;
  Check(EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr), "sha256 init");
  Check(EVP_DigestUpdate(ctx.get(), a.data(), a.size()), "sha256 update");
  Check(EVP_DigestUpdate(ctx.get(), b.data(), b.size()), "sha256 update");
  Check(EVP_DigestFinal_ex(ctx.get(), out.data(), &len), "sha256 final");
  return out;
}

void AesCtrXor(const Digest& key, std::span<uint8_t> data) {
  static constexpr uint8_t kZeroIv[16] = {};
  CipherCtx ctx = NewCipherCtx();
  Check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ctr(), nullptr, key.data(), kZeroIv),
        "aes-ctr init");
  // OpenSSL's EVP_*Update takes int lengths.
  size_t done = 0;
  while (done < data.size()) {
    int n = static_cast<int>(std::min<size_t>(data.size() - done, 1 << 30));
    int out_len = 0;
    Check(EVP_EncryptUpdate(ctx.get(), data.data() + done, &out_len, data.data() + done, n),
          "aes-ctr update");
    done += static_cast<size_t>(n);
  }
}

Bytes GcmSeal(const Digest& key, ByteView plaintext, ByteView aad) {
  Bytes out(kGcmNonceSize + plaintext.size() + kGcmTagSize);
  RandomFill(std::span(out).first(kGcmNonceSize));
  CipherCtx ctx = NewCipherCtx();
  Check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr),
        "gcm init");
  Check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), out.data()), "gcm key");
  int len = 0;
  if (!aad.empty()) {
    Check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "gcm aad");
  }
  uint8_t* ct = out.data() + kGcmNonceSize;
  if (!plaintext.empty()) {
    Check(EVP_EncryptUpdate(ctx.get(), ct, &len, plaintext.data(),
                            static_cast<int>(plaintext.size())),
          "gcm update");
  }
  Check(EVP_EncryptFinal_ex(ctx.get(), ct + plaintext.size(), &len), "gcm final");
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                            ct + plaintext.size()),
        "gcm tag");
  return out;
}

Bytes GcmOpen(const Digest& key, ByteView sealed, ByteView aad) {
  if (sealed.size() < kGcmNonceSize + kGcmTagSize) {
    Fail(ErrorCode::kAuthenticationFailure, "sealed blob too short");
  }
  size_t ct_len = sealed.size() - kGcmNonceSize - kGcmTagSize;
  ByteView nonce = sealed.first(kGcmNonceSize);
  ByteView ct = sealed.subspan(kGcmNonceSize, ct_len);
  Bytes tag(sealed.end() - kGcmTagSize, sealed.end());
  Bytes out(ct_len);

  CipherCtx ctx = NewCipherCtx();
  Check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr),
        "gcm init");
  Check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "gcm key");
  int len = 0;
  if (!aad.empty()) {
    Check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "gcm aad");
  }
  if (ct_len > 0) {
    Check(EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct.data(), static_cast<int>(ct_len)),
          "gcm update");
  }
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()),
        "gcm set tag");
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + ct_len, &len) != 1) {
    Fail(ErrorCode::kAuthenticationFailure, "authentication tag mismatch");
  }
  return out;
}

void RandomFill(std::span<uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    Fail(ErrorCode::kInternal, "RAND_bytes failed");
  }
}

Digest RandomKey() {
  Digest k;
  RandomFill(k);
  return k;
}

}  // namespace reed

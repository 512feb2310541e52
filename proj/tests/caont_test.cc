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

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <gtest/gtest.h>

#include "primitives.h"
#include "test_util.h"

namespace reed {
namespace {

using testing::RandomBytes;

// AES-256 over counter blocks 0, 1, 2, ... (128-bit big-endian), one block at
// a time through ECB.
Bytes OracleMask(const Digest& key, size_t length) {
  Bytes out;
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), nullptr, key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  for (uint64_t counter = 0; out.size() < length; ++counter) {
    uint8_t block[16] = {};
    for (int i = 0; i < 8; ++i) block[15 - i] = static_cast<uint8_t>(counter >> (8 * i));
    uint8_t enc[16];
    int n = 0;
    EVP_EncryptUpdate(ctx, enc, &n, block, 16);
    out.insert(out.end(), enc, enc + 16);
  }
  EVP_CIPHER_CTX_free(ctx);
  out.resize(length);
  return out;
}

Digest OracleSha(ByteView data) {
  Digest d;
  SHA256(data.data(), data.size(), d.data());
  return d;
}

Digest KeyFrom(uint64_t seed) {
  Bytes b = RandomBytes(seed, 32);
  Digest d;
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

const Scheme kSchemes[] = {Scheme::kBasic, Scheme::kEnhanced};

TEST(Mask, MatchesCounterBlockOracle) {
  Digest key = KeyFrom(1);
  for (size_t len : {0u, 1u, 15u, 16u, 17u, 100u, 4096u}) {
    EXPECT_EQ(Mask(key, len), OracleMask(key, len)) << len;
  }
}

TEST(SelfXor, RaggedPieceIsZeroExtended) {
  Bytes data(70);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 7 + 1);
  Digest expect{};
  for (size_t i = 0; i < data.size(); ++i) expect[i % 32] ^= data[i];
  EXPECT_EQ(SelfXor(data), expect);
  EXPECT_EQ(SelfXor({}), Digest{});
}

TEST(BasicScheme, PackageLayout) {
  Bytes m = RandomBytes(2, 1000);
  Digest key = KeyFrom(3);
  SplitPackage p = BasicEncrypt(m, key);
  ASSERT_EQ(p.trimmed.size(), m.size());
  ASSERT_EQ(p.stub.size(), kStubSize);

  Bytes x = m;
  x.resize(m.size() + kCanarySize, 0);
  Bytes g = OracleMask(key, x.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] ^= g[i];
  Digest t = OracleSha(x);
  for (size_t i = 0; i < 32; ++i) t[i] ^= key[i];
  Bytes expect = x;
  expect.insert(expect.end(), t.begin(), t.end());
  EXPECT_EQ(JoinPackage(p.trimmed, p.stub), expect);
}

TEST(EnhancedScheme, PackageLayout) {
  Bytes m = RandomBytes(4, 777);
  Digest key = KeyFrom(5);
  SplitPackage p = EnhancedEncrypt(m, key);
  ASSERT_EQ(p.trimmed.size(), m.size());

  Bytes y = m;
  Bytes g1 = OracleMask(key, m.size());
  for (size_t i = 0; i < m.size(); ++i) y[i] ^= g1[i];
  y.insert(y.end(), key.begin(), key.end());
  Digest h = OracleSha(y);
  Bytes g2 = OracleMask(h, y.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] ^= g2[i];
  Digest t = h;
  for (size_t i = 0; i < y.size(); ++i) t[i % 32] ^= y[i];
  Bytes expect = y;
  expect.insert(expect.end(), t.begin(), t.end());
  EXPECT_EQ(JoinPackage(p.trimmed, p.stub), expect);
}

TEST(Caont, RoundTripAndSizeLaw) {
  std::mt19937_64 rng(6);
  for (Scheme s : kSchemes) {
    for (size_t len : {1u, 2u, 31u, 32u, 33u, 63u, 64u, 65u, 128u, 4096u, 8192u, 16384u}) {
      Bytes m = RandomBytes(rng(), len);
      Digest key = KeyFrom(rng());
      SplitPackage p = EncryptChunk(s, m, key);
      EXPECT_EQ(p.trimmed.size(), len);
      EXPECT_EQ(p.stub.size(), kStubSize);
      EXPECT_EQ(DecryptChunk(s, p.trimmed, p.stub), m) << SchemeName(s) << " " << len;
    }
  }
}

TEST(Caont, ConvergentUnderSameKey) {
  Bytes m = RandomBytes(7, 5000);
  Digest key = KeyFrom(8);
  for (Scheme s : kSchemes) {
    auto a = EncryptChunk(s, m, key);
    auto b = EncryptChunk(s, m, key);
    EXPECT_EQ(a.trimmed, b.trimmed);
    EXPECT_EQ(a.stub, b.stub);
    auto c = EncryptChunk(s, m, KeyFrom(9));
    EXPECT_NE(a.trimmed, c.trimmed);
  }
}

TEST(Caont, EmptyChunkRejected) {
  for (Scheme s : kSchemes) EXPECT_THROW(EncryptChunk(s, {}, KeyFrom(1)), Error);
}

TEST(Caont, ShortPackageIsIntegrityViolation) {
  Bytes stub(kStubSize, 0);
  for (Scheme s : kSchemes) {
    try {
      DecryptChunk(s, {}, stub);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIntegrityViolation);
    }
  }
}

TEST(SplitPackageAt, NeedsMoreThanStub) {
  try {
    SplitPackageAt(Bytes(64));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPackageTooSmall);
  }
  auto p = SplitPackageAt(Bytes(65));
  EXPECT_EQ(p.trimmed.size(), 1u);
}

ErrorCode DecryptCode(Scheme s, const Bytes& trimmed, const Bytes& stub) {
  try {
    DecryptChunk(s, trimmed, stub);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(Caont, EveryBitFlipDetected) {
  std::mt19937_64 rng(10);
  for (Scheme s : kSchemes) {
    for (int trial = 0; trial < 4; ++trial) {
      Bytes m = RandomBytes(rng(), 1 + rng() % 96);
      SplitPackage p = EncryptChunk(s, m, KeyFrom(rng()));
      Bytes all = JoinPackage(p.trimmed, p.stub);
      for (size_t bit = 0; bit < all.size() * 8; ++bit) {
        Bytes f = all;
        f[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
        auto sp = SplitPackageAt(f);
        ASSERT_EQ(DecryptCode(s, sp.trimmed, sp.stub), ErrorCode::kIntegrityViolation)
            << SchemeName(s) << " bit " << bit;
      }
    }
  }
}

TEST(EnhancedScheme, EvenPieceFlipLeavesSelfXorButIsCaught) {
  Bytes m = RandomBytes(11, 100);
  SplitPackage p = EnhancedEncrypt(m, KeyFrom(12));
  Bytes head = JoinPackage(p.trimmed, p.stub);
  head.resize(head.size() - kTailSize);
  Bytes flipped = JoinPackage(p.trimmed, p.stub);
  flipped[5] ^= 0x10;
  flipped[32 + 5] ^= 0x10;
  Bytes fhead(flipped.begin(), flipped.end() - kTailSize);
  ASSERT_EQ(SelfXor(head), SelfXor(fhead));
  auto sp = SplitPackageAt(flipped);
  EXPECT_EQ(DecryptCode(Scheme::kEnhanced, sp.trimmed, sp.stub), ErrorCode::kIntegrityViolation);
}

TEST(BasicScheme, SharedKeyLeaksPlaintextXor) {
  Digest key = KeyFrom(13);
  Bytes m1 = RandomBytes(14, 512), m2 = RandomBytes(15, 512);
  auto p1 = BasicEncrypt(m1, key);
  auto p2 = BasicEncrypt(m2, key);
  for (size_t i = 0; i < m1.size(); ++i) {
    ASSERT_EQ(p1.trimmed[i] ^ p2.trimmed[i], m1[i] ^ m2[i]);
  }
  auto e1 = EnhancedEncrypt(m1, key);
  auto e2 = EnhancedEncrypt(m2, key);
  size_t same = 0;
  for (size_t i = 0; i < m1.size(); ++i) same += (e1.trimmed[i] ^ e2.trimmed[i]) == (m1[i] ^ m2[i]);
  EXPECT_LT(same, m1.size() / 8);
}

TEST(StubFile, LayoutAndAuthentication) {
  std::vector<Bytes> stubs;
  for (int i = 0; i < 10; ++i) stubs.push_back(RandomBytes(100 + i, kStubSize));
  Digest fk = KeyFrom(16);
  Bytes blob = EncryptStubFile(stubs, fk);
  EXPECT_EQ(blob.size(), kGcmNonceSize + 10 * kStubSize + kGcmTagSize);
  Bytes plain = DecryptStubFile(blob, fk);
  ASSERT_EQ(plain.size(), 10 * kStubSize);
  EXPECT_TRUE(std::equal(stubs[3].begin(), stubs[3].end(), plain.begin() + 3 * kStubSize));

  try {
    DecryptStubFile(blob, KeyFrom(17));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthenticationFailure);
  }
  blob[20] ^= 1;
  EXPECT_THROW(DecryptStubFile(blob, fk), Error);
}

TEST(StubFile, FreshNoncePerEncryption) {
  Bytes stubs(3 * kStubSize, 0xAB);
  Digest fk = KeyFrom(18);
  EXPECT_NE(EncryptStubFile(stubs, fk), EncryptStubFile(stubs, fk));
}

}  // namespace
}  // namespace reed

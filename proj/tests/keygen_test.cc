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

#include "keygen.h"

#include <openssl/bn.h>
#include <openssl/sha.h>

#include <gtest/gtest.h>

#include "test_util.h"

namespace reed {
namespace {

using testing::RandomBytes;

// A single 1024-bit manager key shared by the suite.
const RsaKey& ManagerKey() {
  static const RsaKey key = RsaKey::Generate(kManagerKeyBits);
  return key;
}

Digest RandomDigest(uint64_t seed) {
  Bytes b = RandomBytes(seed, 32);
  Digest d;
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

// SHA-256 of fp^d mod N at modulus width, by plain BN_mod_exp.
MleKey OracleKey(const Digest& fp, const RsaKey& key) {
  BN_CTX* ctx = BN_CTX_new();
  BIGNUM* x = BN_bin2bn(fp.data(), 32, nullptr);
  BIGNUM* s = BN_new();
  BN_mod_exp(s, x, key.private_exponent().get(), key.public_key().n.get(), ctx);
  Bytes buf(key.public_key().modulus_bytes());
  BN_bn2binpad(s, buf.data(), static_cast<int>(buf.size()));
  MleKey out;
  SHA256(buf.data(), buf.size(), out.data());
  BN_free(s);
  BN_free(x);
  BN_CTX_free(ctx);
  return out;
}

MleKey RunProtocol(const Digest& fp, const RsaKey& key) {
  BlindedRequest req = Blind(fp, key.public_key());
  BigNum signed_value = SignBlinded(req.value, key);
  return Unblind(signed_value, req, key.public_key());
}

TEST(Oprf, MatchesDirectExponentiation) {
  for (uint64_t i = 0; i < 20; ++i) {
    Digest fp = RandomDigest(i);
    EXPECT_EQ(RunProtocol(fp, ManagerKey()), OracleKey(fp, ManagerKey()));
  }
}

TEST(Oprf, IndependentBlindingsAgree) {
  Digest fp = RandomDigest(99);
  BlindedRequest a = Blind(fp, ManagerKey().public_key());
  BlindedRequest b = Blind(fp, ManagerKey().public_key());
  EXPECT_FALSE(a.value == b.value);
  EXPECT_FALSE(a.value == BigNum::FromBytes(fp));
  EXPECT_EQ(Unblind(SignBlinded(a.value, ManagerKey()), a, ManagerKey().public_key()),
            Unblind(SignBlinded(b.value, ManagerKey()), b, ManagerKey().public_key()));
}

TEST(Oprf, FixedBlindingFactor) {
  Digest fp = RandomDigest(5);
  BigNum r(3);
  BlindedRequest req = Blind(fp, ManagerKey().public_key(), &r);
  const auto& pub = ManagerKey().public_key();
  BigNum expect = BigNum::FromBytes(fp).ModMul(r.ModExp(pub.e, pub.n), pub.n);
  EXPECT_TRUE(req.value == expect);
}

TEST(Oprf, ZeroFingerprintRejected) {
  try {
    Blind(Digest{}, ManagerKey().public_key());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroFingerprint);
  }
}

TEST(Oprf, SignRejectsOutOfRange) {
  for (const BigNum& v : {BigNum(uint64_t{0}), ManagerKey().public_key().n}) {
    try {
      SignBlinded(v, ManagerKey());
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidOperand);
    }
  }
}

TEST(Oprf, TamperedSignatureRejected) {
  Digest fp = RandomDigest(6);
  BlindedRequest req = Blind(fp, ManagerKey().public_key());
  BigNum s = SignBlinded(req.value, ManagerKey());
  BigNum bad = s.ModMul(BigNum(2), ManagerKey().public_key().n);
  try {
    Unblind(bad, req, ManagerKey().public_key());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSignatureInvalid);
  }
}

TEST(Oprf, DifferentManagerKeysGiveDifferentKeys) {
  RsaKey other = RsaKey::Generate(kManagerKeyBits);
  Digest fp = RandomDigest(7);
  EXPECT_NE(RunProtocol(fp, ManagerKey()), RunProtocol(fp, other));
}

TEST(RsaKey, PemRoundTripAndCrt) {
  RsaKey copy = RsaKey::FromPrivatePem(ManagerKey().ToPrivatePem());
  EXPECT_TRUE(copy.public_key() == ManagerKey().public_key());
  BigNum x = BigNum::FromBytes(RandomBytes(8, 64));
  EXPECT_TRUE(copy.PrivateOp(x) == x.ModExp(ManagerKey().private_exponent(), ManagerKey().public_key().n));
  EXPECT_TRUE(copy.PublicOp(copy.PrivateOp(x)) == x);
  RsaKey pub_only = RsaKey::FromPublic(ManagerKey().public_key());
  EXPECT_FALSE(pub_only.has_private());
  EXPECT_THROW(pub_only.PrivateOp(x), Error);
}

TEST(RateLimiter, TokenBucket) {
  RateLimiter limiter({10, 5});
  auto t0 = RateLimiter::Clock::time_point{} + std::chrono::hours(1);
  EXPECT_TRUE(limiter.TryAcquire("a", 8, t0));
  EXPECT_FALSE(limiter.TryAcquire("a", 3, t0));  // all or nothing
  EXPECT_DOUBLE_EQ(limiter.Tokens("a", t0), 2);
  EXPECT_TRUE(limiter.TryAcquire("b", 10, t0));  // separate bucket
  EXPECT_TRUE(limiter.TryAcquire("a", 3, t0 + std::chrono::milliseconds(200)));
  EXPECT_DOUBLE_EQ(limiter.Tokens("a", t0 + std::chrono::seconds(100)), 10);
  EXPECT_FALSE(limiter.TryAcquire("a", 11, t0 + std::chrono::seconds(100)));
}

std::vector<Bytes> BlindedValues(size_t n, const RsaPublicKey& pub) {
  std::vector<Bytes> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(Blind(RandomDigest(1000 + i), pub).value.ToBytes(pub.modulus_bytes()));
  }
  return out;
}

TEST(KeyManager, BatchCapAndRateLimit) {
  KeyManager manager(ManagerKey(), {300, 1e-9});
  auto big = BlindedValues(kMaxKeygenBatch + 1, manager.public_key());
  try {
    manager.SignBatch("c", big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  auto batch = BlindedValues(200, manager.public_key());
  EXPECT_EQ(manager.SignBatch("c", batch).size(), 200u);
  try {
    manager.SignBatch("c", batch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRateLimited);
  }
  EXPECT_EQ(manager.SignBatch("other", batch).size(), 200u);
  EXPECT_EQ(manager.signatures_issued(), 400u);
}

TEST(KeyGenerator, BatchesRequests) {
  KeyManager manager(ManagerKey());
  LocalKeyManagerSession session(manager, "c");
  KeyGenerator gen(session, 256);
  std::vector<Digest> fps;
  for (uint64_t i = 0; i < 600; ++i) fps.push_back(RandomDigest(i + 5000));
  auto keys = gen.DeriveKeys(fps);
  ASSERT_EQ(keys.size(), 600u);
  EXPECT_EQ(gen.requests(), 600u);
  EXPECT_EQ(gen.round_trips(), 3u);
  EXPECT_EQ(keys[17], OracleKey(fps[17], ManagerKey()));
  EXPECT_EQ(keys[599], OracleKey(fps[599], ManagerKey()));
}

}  // namespace
}  // namespace reed

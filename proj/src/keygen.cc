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

#include <algorithm>

#include "primitives.h"

namespace reed {

BlindedRequest Blind(const Digest& fp, const RsaPublicKey& pub, const BigNum* fixed_r) {
  BlindedRequest req;
  req.fingerprint = fp;
  BigNum m = BigNum::FromBytes(fp);
  if (m.is_zero()) Fail(ErrorCode::kZeroFingerprint, "fingerprint is zero");
  if (!(m < pub.n)) Fail(ErrorCode::kInvalidOperand, "fingerprint exceeds modulus");

  BigNum r;
  if (fixed_r != nullptr) {
    r = *fixed_r;
  } else {
    // r uniform in [2, N-1] and coprime to N.
    do {
      r = BigNum::RandomBelow(pub.n);
    } while (r.is_zero() || r.is_one() || !r.Gcd(pub.n).is_one());
  }
  req.r_inverse = r.ModInverse(pub.n);
  req.value = r.ModExp(pub.e, pub.n).ModMul(m, pub.n);
  return req;
}

BigNum SignBlinded(const BigNum& blinded, const RsaKey& manager_key) {
  const BigNum& n = manager_key.public_key().n;
  if (blinded.is_zero() || !(blinded < n)) {
    Fail(ErrorCode::kInvalidOperand, "blinded value outside [1, N-1]");
  }
  return manager_key.PrivateOp(blinded);
}

MleKey Unblind(const BigNum& signed_value, const BlindedRequest& request,
               const RsaPublicKey& pub) {
  if (signed_value.is_zero() || !(signed_value < pub.n)) {
    Fail(ErrorCode::kSignatureInvalid, "signed value outside [1, N-1]");
  }
  BigNum s = signed_value.ModMul(request.r_inverse, pub.n);
  if (!(s.ModExp(pub.e, pub.n) == BigNum::FromBytes(request.fingerprint))) {
    Fail(ErrorCode::kSignatureInvalid, "key manager signature does not verify");
  }
  return Sha256(s.ToBytes(pub.modulus_bytes()));
}

RateLimiter::Bucket& RateLimiter::Refill(const std::string& client, Clock::time_point now) {
  auto [it, inserted] = buckets_.try_emplace(client, Bucket{config_.capacity, now});
  Bucket& b = it->second;
  if (!inserted && now > b.last) {
    double elapsed = std::chrono::duration<double>(now - b.last).count();
    b.tokens = std::min(config_.capacity, b.tokens + elapsed * config_.refill_per_second);
    b.last = now;
  }
  return b;
}

bool RateLimiter::TryAcquire(const std::string& client, double count, Clock::time_point now) {
  std::lock_guard lock(mu_);
  Bucket& b = Refill(client, now);
  if (b.tokens < count) return false;
  b.tokens -= count;
  return true;
}

double RateLimiter::Tokens(const std::string& client, Clock::time_point now) {
  std::lock_guard lock(mu_);
  return Refill(client, now).tokens;
}

KeyManager::KeyManager(RsaKey key, RateLimiter::Config limits)
    : key_(std::move(key)), limiter_(limits) {
  if (!key_.has_private()) Fail(ErrorCode::kInvalidArgument, "key manager needs a private key");
}

std::vector<Bytes> KeyManager::SignBatch(const std::string& client,
                                         std::span<const Bytes> blinded) {
  if (blinded.size() > kMaxKeygenBatch) {
    Fail(ErrorCode::kInvalidArgument, "keygen batch exceeds 256 values");
  }
  if (!limiter_.TryAcquire(client, static_cast<double>(blinded.size()))) {
    Fail(ErrorCode::kRateLimited, "key generation rate limit exceeded for " + client);
  }
  const size_t width = key_.public_key().modulus_bytes();
  std::vector<Bytes> out;
  out.reserve(blinded.size());
  for (const Bytes& v : blinded) {
    out.push_back(SignBlinded(BigNum::FromBytes(v), key_).ToBytes(width));
  }
  signatures_ += blinded.size();
  ++batches_;
  return out;
}

KeyGenerator::KeyGenerator(KeyManagerSession& session, size_t batch_size)
    : session_(session), pub_(session.PublicKey()), batch_size_(batch_size) {
  if (batch_size_ == 0 || batch_size_ > kMaxKeygenBatch) {
    Fail(ErrorCode::kInvalidArgument, "keygen batch size must be in [1, 256]");
  }
}

std::vector<MleKey> KeyGenerator::DeriveKeys(std::span<const Digest> fingerprints) {
  const size_t width = pub_.modulus_bytes();
  std::vector<MleKey> keys;
  keys.reserve(fingerprints.size());
  for (size_t off = 0; off < fingerprints.size(); off += batch_size_) {
    auto batch = fingerprints.subspan(off, std::min(batch_size_, fingerprints.size() - off));
    std::vector<BlindedRequest> requests;
    std::vector<Bytes> wire;
    requests.reserve(batch.size());
    wire.reserve(batch.size());
    for (const Digest& fp : batch) {
      requests.push_back(Blind(fp, pub_));
      wire.push_back(requests.back().value.ToBytes(width));
    }
    std::vector<Bytes> signed_values = session_.SignBatch(wire);
    if (signed_values.size() != requests.size()) {
      Fail(ErrorCode::kSignatureInvalid, "key manager returned a short batch");
    }
    requests_ += batch.size();
    ++round_trips_;
    for (size_t i = 0; i < requests.size(); ++i) {
      keys.push_back(Unblind(BigNum::FromBytes(signed_values[i]), requests[i], pub_));
    }
  }
  return keys;
}

MleKey KeyGenerator::DeriveKey(const Digest& fingerprint) {
  return DeriveKeys(std::span(&fingerprint, 1)).front();
}

}  // namespace reed

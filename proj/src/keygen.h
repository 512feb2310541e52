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

// Server-aided MLE key generation over blinded RSA signatures.
//
// The client blinds a fingerprint as fp * r^e mod N, the key manager signs the
// blinded value with d, and the client multiplies by r^-1, checks s^e == fp
// and hashes s into the MLE key. The manager never sees fp, yet every client
// ends up with the same key for the same fingerprint.

#ifndef REED_KEYGEN_H_
#define REED_KEYGEN_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "bytes.h"
#include "caont.h"
#include "rsa.h"

namespace reed {

inline constexpr int kManagerKeyBits = 1024;
inline constexpr size_t kMaxKeygenBatch = 256;

struct BlindedRequest {
  Digest fingerprint{};
  BigNum value;      // fp * r^e mod N, the only thing sent to the manager
  BigNum r_inverse;  // stays with the client
};

// `fixed_r` is a test hook; production callers draw r from the CSPRNG.
// Throws kZeroFingerprint for the all-zero digest.
BlindedRequest Blind(const Digest& fp, const RsaPublicKey& pub, const BigNum* fixed_r = nullptr);

// blinded^d mod N. Throws kInvalidOperand unless blinded is in [1, N-1].
BigNum SignBlinded(const BigNum& blinded, const RsaKey& manager_key);

// Removes the blinding, verifies s^e == fp (kSignatureInvalid otherwise) and
// returns SHA-256 of s encoded at the modulus width.
MleKey Unblind(const BigNum& signed_value, const BlindedRequest& request,
               const RsaPublicKey& pub);

// Per-client token bucket.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  struct Config {
    double capacity = 10000;
    double refill_per_second = 10000;
  };

  RateLimiter() : RateLimiter(Config{}) {}
  explicit RateLimiter(Config config) : config_(config) {}

  // Takes `count` tokens all-or-nothing; false means the request is rejected.
  bool TryAcquire(const std::string& client, double count, Clock::time_point now = Clock::now());
  double Tokens(const std::string& client, Clock::time_point now = Clock::now());
  const Config& config() const { return config_; }

 private:
  struct Bucket {
    double tokens;
    Clock::time_point last;
  };
  Bucket& Refill(const std::string& client, Clock::time_point now);

  Config config_;
  std::mutex mu_;
  std::map<std::string, Bucket> buckets_;
};

// The key manager: a system-wide RSA key pair plus admission control.
class KeyManager {
 public:
  explicit KeyManager(RsaKey key, RateLimiter::Config limits = {});

  const RsaPublicKey& public_key() const { return key_.public_key(); }

  // Element-wise signatures of fixed-width big-endian blinded values, in
  // order. Throws kInvalidArgument above kMaxKeygenBatch, kRateLimited when
  // the client's bucket cannot cover the whole batch.
  std::vector<Bytes> SignBatch(const std::string& client, std::span<const Bytes> blinded);

  uint64_t signatures_issued() const { return signatures_.load(); }
  uint64_t batches_served() const { return batches_.load(); }

 private:
  RsaKey key_;
  RateLimiter limiter_;
  std::atomic<uint64_t> signatures_{0};
  std::atomic<uint64_t> batches_{0};
};

// Client's view of a key manager, local or remote.
class KeyManagerSession {
 public:
  virtual ~KeyManagerSession() = default;
  virtual RsaPublicKey PublicKey() = 0;
  virtual std::vector<Bytes> SignBatch(std::span<const Bytes> blinded) = 0;
};

class LocalKeyManagerSession : public KeyManagerSession {
 public:
  LocalKeyManagerSession(KeyManager& manager, std::string client_id)
      : manager_(manager), client_id_(std::move(client_id)) {}

  RsaPublicKey PublicKey() override { return manager_.public_key(); }
  std::vector<Bytes> SignBatch(std::span<const Bytes> blinded) override {
    return manager_.SignBatch(client_id_, blinded);
  }

 private:
  KeyManager& manager_;
  std::string client_id_;
};

// Runs the blind / sign / unblind protocol for a list of fingerprints,
// batching up to `batch_size` values per round trip.
class KeyGenerator {
 public:
  explicit KeyGenerator(KeyManagerSession& session, size_t batch_size = kMaxKeygenBatch);

  std::vector<MleKey> DeriveKeys(std::span<const Digest> fingerprints);
  MleKey DeriveKey(const Digest& fingerprint);

  // Fingerprints sent for signing so far.
  uint64_t requests() const { return requests_; }
  uint64_t round_trips() const { return round_trips_; }

 private:
  KeyManagerSession& session_;
  RsaPublicKey pub_;
  size_t batch_size_;
  uint64_t requests_ = 0;
  uint64_t round_trips_ = 0;
};

}  // namespace reed

#endif  // REED_KEYGEN_H_

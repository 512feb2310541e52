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

// Per-file key states, key regression and OR-policy access control.
//
// A key state is wound forward with the owner's private derivation key
// (value^d mod N) and unwound with the public one (value^e mod N), so holding
// the current state grants every earlier state but no later one. States are
// distributed to the users of a policy by enveloping: a fresh content key
// seals the state, and that content key is encapsulated once per authorized
// user under their X25519 access key.

#ifndef REED_REKEYING_H_
#define REED_REKEYING_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bytes.h"
#include "caont.h"
#include "rsa.h"
#include "store_session.h"

namespace reed {

inline constexpr int kDerivationKeyBits = 1024;

struct KeyState {
  uint32_t version = 0;
  BigNum value;
  size_t width = 0;  // modulus width of the owner's derivation key, in bytes
  std::string owner;

  bool operator==(const KeyState& o) const {
    return version == o.version && value == o.value && width == o.width && owner == o.owner;
  }
};

KeyState KrInit(const std::string& owner, const RsaPublicKey& derivation_public);
// Throws kNotOwner when `owner_key` lacks the private half.
KeyState KrWind(const KeyState& state, const RsaKey& owner_key);
// Throws kAtInitialState at version 0.
KeyState KrUnwind(const KeyState& state, const RsaPublicKey& derivation_public);
// Unwinds until `version`; throws kInvalidArgument if that is in the future.
KeyState KrUnwindTo(const KeyState& state, uint32_t version,
                    const RsaPublicKey& derivation_public);

// SHA-256(value at fixed width || 4-byte big-endian version).
FileKey DeriveFileKey(const KeyState& state);

class AccessKeyPair {
 public:
  static AccessKeyPair Generate();
  static AccessKeyPair FromPrivate(ByteView private_key);

  const Bytes& public_key() const { return public_; }
  const Bytes& private_key() const { return private_; }

 private:
  Bytes private_;
  Bytes public_;
};

// Public material a user registers with the key store.
struct UserRecord {
  Bytes access_public;
  RsaPublicKey derivation_public;

  Bytes Serialize() const;
  static UserRecord Parse(ByteView data);
};

class UserDirectory {
 public:
  virtual ~UserDirectory() = default;
  // Throws kUnknownUser for unregistered users.
  virtual UserRecord Lookup(const std::string& user_id) = 0;
};

class StoreUserDirectory : public UserDirectory {
 public:
  explicit StoreUserDirectory(StoreSession& store) : store_(store) {}
  UserRecord Lookup(const std::string& user_id) override;

 private:
  StoreSession& store_;
};

class MapUserDirectory : public UserDirectory {
 public:
  void Add(const std::string& user_id, UserRecord record) { users_[user_id] = std::move(record); }
  UserRecord Lookup(const std::string& user_id) override;

 private:
  std::map<std::string, UserRecord> users_;
};

// Sorted, de-duplicated set of user ids joined by OR.
struct Policy {
  std::vector<std::string> users;

  // Throws kPolicyEmpty when no user is given.
  static Policy Of(std::vector<std::string> users);
  bool Allows(const std::string& user_id) const;
};

struct WrappedKeyState {
  struct Encapsulation {
    std::string user_id;
    Bytes data;  // ephemeral X25519 public key || GCM-sealed content key
  };

  uint32_t version = 0;
  std::vector<Encapsulation> encapsulations;
  Bytes sealed_state;  // nonce || ciphertext || tag

  Policy policy() const;
  // version(4) || count(4) || per user (id, encapsulation) length-prefixed ||
  // nonce || state ciphertext || tag
  Bytes Serialize() const;
  static WrappedKeyState Parse(ByteView data);
};

// Throws kUnknownUser when a policy member is not in the directory.
WrappedKeyState WrapState(const KeyState& state, const Policy& policy, UserDirectory& directory);
// Throws kAccessDenied when the user is not in the policy or any
// authentication check fails.
KeyState UnwrapState(const WrappedKeyState& wrapped, const std::string& user_id,
                     const AccessKeyPair& access_key);

struct ClientIdentity {
  std::string user_id;
  AccessKeyPair access;
  RsaKey derivation;

  static ClientIdentity Generate(const std::string& user_id,
                                 int derivation_bits = kDerivationKeyBits);
  UserRecord PublicRecord() const;

  std::string ToJson() const;
  static ClientIdentity FromJson(const std::string& json);
};

enum class RevocationMode : uint8_t { kLazy = 0, kActive = 1 };

struct RekeyResult {
  uint32_t new_version = 0;
  uint64_t stub_bytes_moved = 0;   // downloaded + uploaded stub-file bytes
  uint64_t state_bytes_moved = 0;  // uploaded wrapped-state bytes
};

// Winds the file's key state once, re-wraps it under `new_policy` and, in
// active mode, re-encrypts the stub file under the new file key. Trimmed
// packages are never touched.
RekeyResult Rekey(StoreSession& store, UserDirectory& directory, const Digest& file_id,
                  const Policy& new_policy, RevocationMode mode,
                  const ClientIdentity& identity);

}  // namespace reed

#endif  // REED_REKEYING_H_

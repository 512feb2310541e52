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

#include "rekeying.h"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <algorithm>
#include <memory>

#include "json.hpp"
#include "primitives.h"

namespace reed {
namespace {

constexpr size_t kX25519KeySize = 32;
constexpr std::string_view kWrapInfo = "reed access-key wrap v1";

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct KdfDeleter {
  void operator()(EVP_KDF* k) const { EVP_KDF_free(k); }
};
struct KdfCtxDeleter {
  void operator()(EVP_KDF_CTX* k) const { EVP_KDF_CTX_free(k); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

Pkey X25519Private(ByteView priv) {
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, priv.data(), priv.size()));
  if (!key) Fail(ErrorCode::kInvalidArgument, "invalid X25519 private key");
  return key;
}

Pkey X25519Public(ByteView pub) {
  Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, pub.data(), pub.size()));
  if (!key) Fail(ErrorCode::kAccessDenied, "invalid X25519 public key");
  return key;
}

Bytes RawPublic(EVP_PKEY* key) {
  Bytes out(kX25519KeySize);
  size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != kX25519KeySize) {
    Fail(ErrorCode::kInternal, "EVP_PKEY_get_raw_public_key failed");
  }
  return out;
}

Bytes SharedSecret(EVP_PKEY* priv, EVP_PKEY* peer) {
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(EVP_PKEY_CTX_new(priv, nullptr));
  Bytes out(kX25519KeySize);
  size_t len = out.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer) != 1 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1) {
    Fail(ErrorCode::kAccessDenied, "X25519 key agreement failed");
  }
  return out;
}

// HKDF-SHA256(shared, salt = ephemeral || recipient, info = kWrapInfo).
Digest WrapKey(ByteView shared, ByteView ephemeral_pub, ByteView recipient_pub) {
  Bytes salt(ephemeral_pub.begin(), ephemeral_pub.end());
  salt.insert(salt.end(), recipient_pub.begin(), recipient_pub.end());
  std::unique_ptr<EVP_KDF, KdfDeleter> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr));
  if (!kdf) Fail(ErrorCode::kInternal, "HKDF unavailable");
  std::unique_ptr<EVP_KDF_CTX, KdfCtxDeleter> ctx(EVP_KDF_CTX_new(kdf.get()));
  char digest[] = "SHA256";
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, const_cast<uint8_t*>(shared.data()),
                                        shared.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SALT, salt.data(), salt.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO,
                                        const_cast<char*>(kWrapInfo.data()), kWrapInfo.size()),
      OSSL_PARAM_construct_end(),
  };
  Digest out;
  if (!ctx || EVP_KDF_derive(ctx.get(), out.data(), out.size(), params) != 1) {
    Fail(ErrorCode::kInternal, "HKDF derive failed");
  }
  return out;
}

// Authenticated data for the sealed state: everything in the header.
Bytes StateAad(const WrappedKeyState& w) {
  ByteWriter h;
  h.U32(w.version);
  h.U32(static_cast<uint32_t>(w.encapsulations.size()));
  for (const auto& e : w.encapsulations) h.Blob(AsBytes(e.user_id));
  return h.Take();
}

Bytes SerializeState(const KeyState& s) {
  ByteWriter w;
  w.Str16(s.owner);
  w.U32(s.version);
  w.Blob(s.value.ToBytes(s.width));
  return w.Take();
}

KeyState ParseState(ByteView data) {
  ByteReader r(data);
  KeyState s;
  s.owner = r.Str16();
  s.version = r.U32();
  ByteView value = r.Blob();
  s.width = value.size();
  s.value = BigNum::FromBytes(value);
  r.ExpectDone();
  return s;
}

}  // namespace

KeyState KrInit(const std::string& owner, const RsaPublicKey& derivation_public) {
  KeyState s;
  s.owner = owner;
  s.width = derivation_public.modulus_bytes();
  do {
    s.value = BigNum::RandomBelow(derivation_public.n);
  } while (s.value.is_zero() || s.value.is_one() || !s.value.Gcd(derivation_public.n).is_one());
  return s;
}

KeyState KrWind(const KeyState& state, const RsaKey& owner_key) {
  if (!owner_key.has_private()) Fail(ErrorCode::kNotOwner, "winding needs the private derivation key");
  KeyState next = state;
  next.value = owner_key.PrivateOp(state.value);
  next.version = state.version + 1;
  return next;
}

KeyState KrUnwind(const KeyState& state, const RsaPublicKey& derivation_public) {
  if (state.version == 0) Fail(ErrorCode::kAtInitialState, "key state is already at version 0");
  KeyState prev = state;
  prev.value = state.value.ModExp(derivation_public.e, derivation_public.n);
  prev.version = state.version - 1;
  return prev;
}

KeyState KrUnwindTo(const KeyState& state, uint32_t version,
                    const RsaPublicKey& derivation_public) {
  if (version > state.version) {
    Fail(ErrorCode::kInvalidArgument, "cannot unwind to a future version");
  }
  KeyState s = state;
  while (s.version > version) s = KrUnwind(s, derivation_public);
  return s;
}

FileKey DeriveFileKey(const KeyState& state) {
  ByteWriter version;
  version.U32(state.version);
  return Sha256(state.value.ToBytes(state.width), version.bytes());
}

AccessKeyPair AccessKeyPair::Generate() {
  Bytes priv(kX25519KeySize);
  RandomFill(priv);
  return FromPrivate(priv);
}

AccessKeyPair AccessKeyPair::FromPrivate(ByteView private_key) {
  if (private_key.size() != kX25519KeySize) {
    Fail(ErrorCode::kInvalidArgument, "access key must be 32 bytes");
  }
  AccessKeyPair kp;
  kp.private_.assign(private_key.begin(), private_key.end());
  kp.public_ = RawPublic(X25519Private(private_key).get());
  return kp;
}

Bytes UserRecord::Serialize() const {
  ByteWriter w;
  w.Blob(access_public);
  w.Blob(derivation_public.Serialize());
  return w.Take();
}

UserRecord UserRecord::Parse(ByteView data) {
  ByteReader r(data);
  UserRecord rec;
  ByteView access = r.Blob();
  rec.access_public.assign(access.begin(), access.end());
  rec.derivation_public = RsaPublicKey::Parse(r.Blob());
  r.ExpectDone();
  if (rec.access_public.size() != kX25519KeySize) {
    Fail(ErrorCode::kMalformed, "access public key must be 32 bytes");
  }
  return rec;
}

UserRecord StoreUserDirectory::Lookup(const std::string& user_id) {
  try {
    return UserRecord::Parse(store_.GetUser(user_id));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) Fail(ErrorCode::kUnknownUser, "unknown user " + user_id);
    throw;
  }
}

UserRecord MapUserDirectory::Lookup(const std::string& user_id) {
  auto it = users_.find(user_id);
  if (it == users_.end()) Fail(ErrorCode::kUnknownUser, "unknown user " + user_id);
  return it->second;
}

Policy Policy::Of(std::vector<std::string> users) {
  std::erase_if(users, [](const std::string& u) { return u.empty(); });
  if (users.empty()) Fail(ErrorCode::kPolicyEmpty, "policy must name at least one user");
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  return Policy{std::move(users)};
}

bool Policy::Allows(const std::string& user_id) const {
  return std::binary_search(users.begin(), users.end(), user_id);
}

Policy WrappedKeyState::policy() const {
  std::vector<std::string> ids;
  for (const auto& e : encapsulations) ids.push_back(e.user_id);
  return Policy::Of(std::move(ids));
}

Bytes WrappedKeyState::Serialize() const {
  ByteWriter w;
  w.U32(version);
  w.U32(static_cast<uint32_t>(encapsulations.size()));
  for (const auto& e : encapsulations) {
    w.Blob(AsBytes(e.user_id));
    w.Blob(e.data);
  }
  w.Raw(sealed_state);
  return w.Take();
}

WrappedKeyState WrappedKeyState::Parse(ByteView data) {
  ByteReader r(data);
  WrappedKeyState w;
  w.version = r.U32();
  uint32_t count = r.U32();
  if (count > r.remaining()) Fail(ErrorCode::kMalformed, "implausible encapsulation count");
  for (uint32_t i = 0; i < count; ++i) {
    ByteView id = r.Blob();
    ByteView encap = r.Blob();
    w.encapsulations.push_back({std::string(id.begin(), id.end()), Bytes(encap.begin(), encap.end())});
  }
  ByteView rest = r.Rest();
  w.sealed_state.assign(rest.begin(), rest.end());
  return w;
}

WrappedKeyState WrapState(const KeyState& state, const Policy& policy, UserDirectory& directory) {
  if (policy.users.empty()) Fail(ErrorCode::kPolicyEmpty, "policy must name at least one user");
  const Digest content_key = RandomKey();

  WrappedKeyState w;
  w.version = state.version;
  for (const std::string& user : policy.users) {
    UserRecord rec = directory.Lookup(user);
    Pkey recipient = X25519Public(rec.access_public);
    AccessKeyPair ephemeral = AccessKeyPair::Generate();
    Bytes shared = SharedSecret(X25519Private(ephemeral.private_key()).get(), recipient.get());
    Digest kek = WrapKey(shared, ephemeral.public_key(), rec.access_public);

    Bytes encap = ephemeral.public_key();
    Bytes sealed = GcmSeal(kek, content_key, AsBytes(user));
    encap.insert(encap.end(), sealed.begin(), sealed.end());
    w.encapsulations.push_back({user, std::move(encap)});
  }
  w.sealed_state = GcmSeal(content_key, SerializeState(state), StateAad(w));
  return w;
}

KeyState UnwrapState(const WrappedKeyState& wrapped, const std::string& user_id,
                     const AccessKeyPair& access_key) {
  auto it = std::find_if(wrapped.encapsulations.begin(), wrapped.encapsulations.end(),
                         [&](const auto& e) { return e.user_id == user_id; });
  if (it == wrapped.encapsulations.end()) {
    Fail(ErrorCode::kAccessDenied, "user " + user_id + " is not in the file's policy");
  }
  try {
    ByteView encap = it->data;
    if (encap.size() < kX25519KeySize) Fail(ErrorCode::kAccessDenied, "short encapsulation");
    ByteView ephemeral_pub = encap.first(kX25519KeySize);
    Bytes shared = SharedSecret(X25519Private(access_key.private_key()).get(),
                                X25519Public(ephemeral_pub).get());
    Digest kek = WrapKey(shared, ephemeral_pub, access_key.public_key());
    Bytes content = GcmOpen(kek, encap.subspan(kX25519KeySize), AsBytes(user_id));
    if (content.size() != kKeySize) Fail(ErrorCode::kAccessDenied, "bad content key size");
    Digest content_key;
    std::copy(content.begin(), content.end(), content_key.begin());
    KeyState state = ParseState(GcmOpen(content_key, wrapped.sealed_state, StateAad(wrapped)));
    if (state.version != wrapped.version) Fail(ErrorCode::kAccessDenied, "state version mismatch");
    return state;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kAccessDenied) throw;
    Fail(ErrorCode::kAccessDenied, std::string("cannot unwrap key state: ") + e.what());
  }
}

ClientIdentity ClientIdentity::Generate(const std::string& user_id, int derivation_bits) {
  if (user_id.empty()) Fail(ErrorCode::kInvalidArgument, "user id must not be empty");
  return ClientIdentity{user_id, AccessKeyPair::Generate(), RsaKey::Generate(derivation_bits)};
}

UserRecord ClientIdentity::PublicRecord() const {
  return UserRecord{access.public_key(), derivation.public_key()};
}

std::string ClientIdentity::ToJson() const {
  nlohmann::json j;
  j["user_id"] = user_id;
  j["access_private"] = ToHex(access.private_key());
  j["derivation_private_pem"] = derivation.ToPrivatePem();
  return j.dump(2);
}

ClientIdentity ClientIdentity::FromJson(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
    return ClientIdentity{j.at("user_id").get<std::string>(),
                          AccessKeyPair::FromPrivate(FromHex(j.at("access_private").get<std::string>())),
                          RsaKey::FromPrivatePem(j.at("derivation_private_pem").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("malformed identity file: ") + e.what());
  }
}

RekeyResult Rekey(StoreSession& store, UserDirectory& directory, const Digest& file_id,
                  const Policy& new_policy, RevocationMode mode,
                  const ClientIdentity& identity) {
  VersionedBlob current = store.GetState(file_id);
  KeyState state = UnwrapState(WrappedKeyState::Parse(current.data), identity.user_id,
                               identity.access);
  if (state.owner != identity.user_id || !identity.derivation.has_private() ||
      state.width != identity.derivation.public_key().modulus_bytes()) {
    Fail(ErrorCode::kNotOwner, "only the file owner can rekey");
  }
  KeyState next = KrWind(state, identity.derivation);
  if (!(KrUnwind(next, identity.derivation.public_key()).value == state.value)) {
    Fail(ErrorCode::kNotOwner, "derivation key does not match the file's key chain");
  }

  RekeyResult result;
  result.new_version = next.version;
  if (mode == RevocationMode::kActive) {
    VersionedBlob stub = store.GetStub(file_id, state.version);
    KeyState era = KrUnwindTo(state, stub.version, identity.derivation.public_key());
    Bytes stubs = DecryptStubFile(stub.data, DeriveFileKey(era));
    Bytes reencrypted = EncryptStubFile(ByteView(stubs), DeriveFileKey(next));
    store.PutStub(file_id, next.version, reencrypted);
    result.stub_bytes_moved = stub.data.size() + reencrypted.size();
  }
  Bytes wrapped = WrapState(next, new_policy, directory).Serialize();
  store.PutState(file_id, current.version, next.version, wrapped);
  result.state_bytes_moved = wrapped.size();
  return result;
}

}  // namespace reed

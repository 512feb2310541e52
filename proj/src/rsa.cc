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

#include "rsa.h"

#include <openssl/core_names.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>

namespace reed {
namespace {

BN_CTX* Ctx() {
  struct CtxHolder {
    BN_CTX* ctx = BN_CTX_new();
    ~CtxHolder() { BN_CTX_free(ctx); }
  };
  thread_local CtxHolder holder;
  if (!holder.ctx) Fail(ErrorCode::kInternal, "BN_CTX_new failed");
  return holder.ctx;
}

void Check(int rc, const char* what) {
  if (rc != 1) Fail(ErrorCode::kInternal, what);
}

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct BioDeleter {
  void operator()(BIO* b) const { BIO_free(b); }
};

}  // namespace

BigNum::BigNum() : bn_(BN_new()) {
  if (!bn_) Fail(ErrorCode::kInternal, "BN_new failed");
}

BigNum::BigNum(uint64_t v) : BigNum() { Check(BN_set_word(bn_.get(), v), "BN_set_word"); }

BigNum::BigNum(const BigNum& other) : bn_(BN_dup(other.get())) {
  if (!bn_) Fail(ErrorCode::kInternal, "BN_dup failed");
}

BigNum& BigNum::operator=(const BigNum& other) {
  if (this != &other) {
    if (!BN_copy(bn_.get(), other.get())) Fail(ErrorCode::kInternal, "BN_copy failed");
  }
  return *this;
}

BigNum BigNum::FromBytes(ByteView big_endian) {
  BIGNUM* bn = BN_bin2bn(big_endian.data(), static_cast<int>(big_endian.size()), nullptr);
  if (!bn) Fail(ErrorCode::kInternal, "BN_bin2bn failed");
  return BigNum(bn);
}

BigNum BigNum::RandomBelow(const BigNum& bound) {
  BigNum out;
  Check(BN_rand_range(out.get(), bound.get()), "BN_rand_range");
  return out;
}

Bytes BigNum::ToBytes(size_t width) const {
  if (num_bytes() > width) Fail(ErrorCode::kInvalidOperand, "integer wider than encoding");
  Bytes out(width);
  Check(BN_bn2binpad(get(), out.data(), static_cast<int>(width)) == static_cast<int>(width),
        "BN_bn2binpad");
  return out;
}

Bytes BigNum::ToBytes() const { return ToBytes(num_bytes()); }

size_t BigNum::num_bytes() const { return static_cast<size_t>(BN_num_bytes(get())); }
bool BigNum::is_zero() const { return BN_is_zero(get()); }
bool BigNum::is_one() const { return BN_is_one(get()); }

BigNum BigNum::ModExp(const BigNum& exponent, const BigNum& modulus) const {
  BigNum out;
  Check(BN_mod_exp(out.get(), get(), exponent.get(), modulus.get(), Ctx()), "BN_mod_exp");
  return out;
}

BigNum BigNum::ModMul(const BigNum& other, const BigNum& modulus) const {
  BigNum out;
  Check(BN_mod_mul(out.get(), get(), other.get(), modulus.get(), Ctx()), "BN_mod_mul");
  return out;
}

BigNum BigNum::ModInverse(const BigNum& modulus) const {
  BigNum out;
  if (!BN_mod_inverse(out.get(), get(), modulus.get(), Ctx())) {
    Fail(ErrorCode::kInvalidOperand, "value not invertible modulo n");
  }
  return out;
}

BigNum BigNum::Gcd(const BigNum& other) const {
  BigNum out;
  Check(BN_gcd(out.get(), get(), other.get(), Ctx()), "BN_gcd");
  return out;
}

int BigNum::Compare(const BigNum& other) const { return BN_cmp(get(), other.get()); }

Bytes RsaPublicKey::Serialize() const {
  ByteWriter w;
  w.Blob(n.ToBytes());
  w.Blob(e.ToBytes());
  return w.Take();
}

RsaPublicKey RsaPublicKey::Parse(ByteView data) {
  ByteReader r(data);
  RsaPublicKey pub;
  pub.n = BigNum::FromBytes(r.Blob());
  pub.e = BigNum::FromBytes(r.Blob());
  r.ExpectDone();
  if (pub.n.is_zero() || pub.e.is_zero()) Fail(ErrorCode::kMalformed, "degenerate RSA key");
  return pub;
}

RsaKey RsaKey::Generate(int bits) {
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr));
  if (!ctx) Fail(ErrorCode::kInternal, "EVP_PKEY_CTX_new_id failed");
  Check(EVP_PKEY_keygen_init(ctx.get()), "keygen init");
  Check(EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), bits), "keygen bits");
  EVP_PKEY* raw = nullptr;
  Check(EVP_PKEY_keygen(ctx.get(), &raw), "keygen");
  std::unique_ptr<EVP_PKEY, PkeyDeleter> pkey(raw);
  return FromPkey(pkey.get());
}

RsaKey RsaKey::FromPrivatePem(const std::string& pem) {
  std::unique_ptr<BIO, BioDeleter> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  if (!bio) Fail(ErrorCode::kInternal, "BIO_new_mem_buf failed");
  std::unique_ptr<EVP_PKEY, PkeyDeleter> pkey(
      PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
  if (!pkey || EVP_PKEY_get_base_id(pkey.get()) != EVP_PKEY_RSA) {
    Fail(ErrorCode::kInvalidArgument, "not an RSA private key in PEM form");
  }
  return FromPkey(pkey.get());
}

RsaKey RsaKey::FromPublic(RsaPublicKey pub) {
  RsaKey key;
  key.pub_ = std::move(pub);
  return key;
}

RsaKey RsaKey::FromPkey(EVP_PKEY* pkey) {
  auto param = [pkey](const char* name) {
    BIGNUM* bn = nullptr;
    if (EVP_PKEY_get_bn_param(pkey, name, &bn) != 1) {
      Fail(ErrorCode::kInternal, std::string("missing RSA parameter ") + name);
    }
    return BigNum::Adopt(bn);
  };
  RsaKey key;
  key.pub_.n = param(OSSL_PKEY_PARAM_RSA_N);
  key.pub_.e = param(OSSL_PKEY_PARAM_RSA_E);
  key.d_ = param(OSSL_PKEY_PARAM_RSA_D);
  key.p_ = param(OSSL_PKEY_PARAM_RSA_FACTOR1);
  key.q_ = param(OSSL_PKEY_PARAM_RSA_FACTOR2);
  key.dp_ = param(OSSL_PKEY_PARAM_RSA_EXPONENT1);
  key.dq_ = param(OSSL_PKEY_PARAM_RSA_EXPONENT2);
  key.qinv_ = param(OSSL_PKEY_PARAM_RSA_COEFFICIENT1);
  key.has_private_ = true;

  std::unique_ptr<BIO, BioDeleter> bio(BIO_new(BIO_s_mem()));
  Check(PEM_write_bio_PrivateKey(bio.get(), pkey, nullptr, nullptr, 0, nullptr, nullptr),
        "PEM_write_bio_PrivateKey");
  char* data = nullptr;
  long len = BIO_get_mem_data(bio.get(), &data);
  key.pem_.assign(data, static_cast<size_t>(len));
  return key;
}

const BigNum& RsaKey::private_exponent() const {
  if (!has_private_) Fail(ErrorCode::kNotOwner, "private RSA key unavailable");
  return d_;
}

BigNum RsaKey::PrivateOp(const BigNum& x) const {
  if (!has_private_) Fail(ErrorCode::kNotOwner, "private RSA key unavailable");
  // Garner: m1 = x^dp mod p, m2 = x^dq mod q, h = qinv (m1 - m2) mod p,
  // result = m2 + h q.
  BigNum m1 = x.ModExp(dp_, p_);
  BigNum m2 = x.ModExp(dq_, q_);
  BigNum diff;
  Check(BN_mod_sub(diff.get(), m1.get(), m2.get(), p_.get(), Ctx()), "BN_mod_sub");
  BigNum h = diff.ModMul(qinv_, p_);
  BigNum hq;
  Check(BN_mul(hq.get(), h.get(), q_.get(), Ctx()), "BN_mul");
  BigNum out;
  Check(BN_add(out.get(), hq.get(), m2.get()), "BN_add");
  return out;
}

std::string RsaKey::ToPrivatePem() const {
  if (!has_private_) Fail(ErrorCode::kNotOwner, "private RSA key unavailable");
  return pem_;
}

}  // namespace reed

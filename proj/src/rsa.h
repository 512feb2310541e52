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

#ifndef REED_RSA_H_
#define REED_RSA_H_

#include <openssl/bn.h>
#include <openssl/evp.h>

#include <memory>
#include <string>

#include "bytes.h"

namespace reed {

// Value-semantic wrapper around an OpenSSL BIGNUM.
class BigNum {
 public:
  BigNum();
  explicit BigNum(uint64_t v);
  BigNum(const BigNum& other);
  BigNum& operator=(const BigNum& other);
  BigNum(BigNum&&) noexcept = default;
  BigNum& operator=(BigNum&&) noexcept = default;

  static BigNum FromBytes(ByteView big_endian);
  // Takes ownership of `owned`.
  static BigNum Adopt(BIGNUM* owned) { return BigNum(owned); }
  // Uniform in [0, bound).
  static BigNum RandomBelow(const BigNum& bound);

  // Left-pads with zeros; fails if the value does not fit.
  Bytes ToBytes(size_t width) const;
  Bytes ToBytes() const;
  size_t num_bytes() const;
  bool is_zero() const;
  bool is_one() const;

  BigNum ModExp(const BigNum& exponent, const BigNum& modulus) const;
  BigNum ModMul(const BigNum& other, const BigNum& modulus) const;
  // Throws kInvalidOperand if no inverse exists.
  BigNum ModInverse(const BigNum& modulus) const;
  BigNum Gcd(const BigNum& other) const;

  int Compare(const BigNum& other) const;
  bool operator==(const BigNum& other) const { return Compare(other) == 0; }
  bool operator<(const BigNum& other) const { return Compare(other) < 0; }

  const BIGNUM* get() const { return bn_.get(); }
  BIGNUM* get() { return bn_.get(); }

 private:
  struct Deleter {
    void operator()(BIGNUM* bn) const { BN_clear_free(bn); }
  };
  explicit BigNum(BIGNUM* owned) : bn_(owned) {}
  std::unique_ptr<BIGNUM, Deleter> bn_;
};

struct RsaPublicKey {
  BigNum n;
  BigNum e;

  size_t modulus_bytes() const { return n.num_bytes(); }
  Bytes Serialize() const;
  static RsaPublicKey Parse(ByteView data);
  bool operator==(const RsaPublicKey&) const = default;
};

// RSA key that may or may not hold the private half. The private operation
// uses the CRT parameters.
class RsaKey {
 public:
  static RsaKey Generate(int bits);
  static RsaKey FromPrivatePem(const std::string& pem);
  static RsaKey FromPublic(RsaPublicKey pub);

  bool has_private() const { return has_private_; }
  const RsaPublicKey& public_key() const { return pub_; }
  // Throws kNotOwner when the private half is absent.
  const BigNum& private_exponent() const;

  BigNum PublicOp(const BigNum& x) const { return x.ModExp(pub_.e, pub_.n); }
  // x^d mod n; throws kNotOwner when the private half is absent.
  BigNum PrivateOp(const BigNum& x) const;

  std::string ToPrivatePem() const;

 private:
  RsaKey() = default;
  static RsaKey FromPkey(EVP_PKEY* pkey);

  RsaPublicKey pub_;
  bool has_private_ = false;
  BigNum d_, p_, q_, dp_, dq_, qinv_;
  std::string pem_;
};

}  // namespace reed

#endif  // REED_RSA_H_

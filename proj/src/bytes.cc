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

#include "bytes.h"

#include <algorithm>

namespace reed {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kAccessDenied: return "access denied";
    case ErrorCode::kIntegrityViolation: return "integrity violation";
    case ErrorCode::kTransport: return "transport error";
    case ErrorCode::kRateLimited: return "rate limited";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kFingerprintMismatch: return "fingerprint mismatch";
    case ErrorCode::kVersionConflict: return "version conflict";
    case ErrorCode::kPackageTooSmall: return "package too small";
    case ErrorCode::kAuthenticationFailure: return "authentication failure";
    case ErrorCode::kSignatureInvalid: return "signature invalid";
    case ErrorCode::kZeroFingerprint: return "zero fingerprint";
    case ErrorCode::kInvalidOperand: return "invalid operand";
    case ErrorCode::kNotOwner: return "not owner";
    case ErrorCode::kAtInitialState: return "at initial state";
    case ErrorCode::kUnknownUser: return "unknown user";
    case ErrorCode::kPolicyEmpty: return "policy empty";
    case ErrorCode::kTraceParse: return "trace parse error";
    case ErrorCode::kStorage: return "storage error";
    case ErrorCode::kMalformed: return "malformed message";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

std::string ToHex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes FromHex(std::string_view hex) {
  if (hex.size() % 2 != 0) Fail(ErrorCode::kInvalidArgument, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = HexValue(hex[2 * i]);
    int lo = HexValue(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) Fail(ErrorCode::kInvalidArgument, "invalid hex digit");
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

Digest DigestFromHex(std::string_view hex) {
  Bytes raw = FromHex(hex);
  if (raw.size() != 32) Fail(ErrorCode::kInvalidArgument, "expected 64 hex digits");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

void XorInto(std::span<uint8_t> dst, ByteView src) {
  size_t n = std::min(dst.size(), src.size());
  for (size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

ByteView ByteReader::Raw(size_t n) {
  if (n > remaining()) Fail(ErrorCode::kMalformed, "truncated input");
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

uint8_t ByteReader::U8() { return Raw(1)[0]; }

uint16_t ByteReader::U16() {
  ByteView b = Raw(2);
  return static_cast<uint16_t>(b[0] << 8 | b[1]);
}

uint32_t ByteReader::U32() {
  ByteView b = Raw(4);
  return uint32_t{b[0]} << 24 | uint32_t{b[1]} << 16 | uint32_t{b[2]} << 8 | b[3];
}

uint64_t ByteReader::U64() {
  uint64_t hi = U32();
  return hi << 32 | U32();
}

std::string ByteReader::Str16() {
  ByteView b = Raw(U16());
  return std::string(b.begin(), b.end());
}

Digest ByteReader::Fixed32() {
  ByteView b = Raw(32);
  Digest d;
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

ByteView ByteReader::Rest() { return Raw(remaining()); }

void ByteReader::ExpectDone() const {
  if (!done()) Fail(ErrorCode::kMalformed, "trailing bytes");
}

}  // namespace reed

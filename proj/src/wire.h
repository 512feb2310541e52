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

// Binary wire protocol shared by the dedup server and the key manager.
//
//   frame = payload length (4, big-endian) || type (1) || payload
//
// Responses use the request type with the high bit set; failures come back
// as a 0x7F frame carrying a 2-byte error code and a message.

#ifndef REED_WIRE_H_
#define REED_WIRE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bytes.h"
#include "keygen.h"
#include "store_session.h"

namespace reed {

enum class MsgType : uint8_t {
  kDedupQuery = 0x01,
  kPutPackages = 0x02,
  kGetPackages = 0x03,
  kRecipe = 0x04,
  kStub = 0x05,
  kState = 0x06,
  kUser = 0x07,
  kStats = 0x08,
  kKeygen = 0x10,
  kManagerKey = 0x11,
  kError = 0x7F,
};

inline constexpr uint8_t kResponseBit = 0x80;
inline constexpr uint8_t kOpPut = 0;
inline constexpr uint8_t kOpGet = 1;
inline constexpr uint32_t kNoVersion = 0xFFFFFFFF;
inline constexpr uint32_t kMaxFramePayload = 64u << 20;
// Upper bound on the package bytes a client packs into one PUT_PACKAGES frame.
inline constexpr size_t kMaxPackageBatchBytes = 4u << 20;

struct Frame {
  uint8_t type = 0;
  Bytes payload;
};

Bytes EncodeFrame(uint8_t type, ByteView payload);
// Parses one complete frame; throws kMalformed on length mismatch.
Frame DecodeFrame(ByteView bytes);
Bytes EncodeError(ErrorCode code, const std::string& message);
[[noreturn]] void ThrowErrorFrame(ByteView payload);

Bytes EncodeBitmap(const std::vector<bool>& bits);
std::vector<bool> DecodeBitmap(ByteView bytes, size_t count);

// Server-side dispatch. Both return the response frame (type + payload) and
// translate reed::Error into an error frame.
Frame HandleStoreRequest(StoreSession& store, const Frame& request);
Frame HandleManagerRequest(KeyManager& manager, const std::string& client_id,
                           const Frame& request);

// One request, one response.
class FrameTransport {
 public:
  virtual ~FrameTransport() = default;
  virtual Frame RoundTrip(const Frame& request) = 0;
};

// Blocking TCP connection; throws kTransport on I/O failure.
class TcpTransport : public FrameTransport {
 public:
  // `address` is host:port.
  explicit TcpTransport(const std::string& address);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  Frame RoundTrip(const Frame& request) override;

 private:
  int fd_ = -1;
  std::mutex mu_;
};

// Serializes every frame through the real encoder and decoder but calls the
// handler in-process. Optionally records the raw bytes of each request.
class LoopbackTransport : public FrameTransport {
 public:
  using Handler = std::function<Frame(const Frame&)>;

  explicit LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}
  static std::unique_ptr<LoopbackTransport> ForStore(StoreSession& store);
  static std::unique_ptr<LoopbackTransport> ForManager(KeyManager& manager, std::string client_id);

  Frame RoundTrip(const Frame& request) override;

  void set_capture(bool on) { capture_ = on; }
  const std::vector<Bytes>& captured_requests() const { return captured_; }

 private:
  Handler handler_;
  bool capture_ = false;
  std::vector<Bytes> captured_;
  std::mutex mu_;
};

class RemoteStoreSession : public StoreSession {
 public:
  explicit RemoteStoreSession(FrameTransport& transport) : transport_(transport) {}

  std::vector<bool> DedupQuery(std::span<const Digest> fingerprints) override;
  uint32_t PutPackages(std::span<const PackageRef> items) override;
  std::vector<Bytes> GetPackages(std::span<const Digest> fingerprints) override;
  void PutRecipe(const Digest& file_id, ByteView recipe) override;
  Bytes GetRecipe(const Digest& file_id) override;
  void PutStub(const Digest& file_id, uint32_t version, ByteView stub_file) override;
  VersionedBlob GetStub(const Digest& file_id, uint32_t max_version) override;
  void PutState(const Digest& file_id, std::optional<uint32_t> expected, uint32_t version,
                ByteView wrapped_state) override;
  VersionedBlob GetState(const Digest& file_id) override;
  void PutUser(const std::string& user_id, ByteView record) override;
  Bytes GetUser(const std::string& user_id) override;
  StoreStats Stats() override;

 private:
  Bytes Call(MsgType type, Bytes payload);
  FrameTransport& transport_;
};

class RemoteKeyManagerSession : public KeyManagerSession {
 public:
  explicit RemoteKeyManagerSession(FrameTransport& transport) : transport_(transport) {}

  RsaPublicKey PublicKey() override;
  std::vector<Bytes> SignBatch(std::span<const Bytes> blinded) override;

 private:
  FrameTransport& transport_;
};

}  // namespace reed

#endif  // REED_WIRE_H_

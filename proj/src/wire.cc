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

#include "wire.h"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace reed {
namespace {

uint8_t Response(MsgType t) { return static_cast<uint8_t>(t) | kResponseBit; }

Bytes EncodeDigests(std::span<const Digest> fps) {
  ByteWriter w;
  w.U32(static_cast<uint32_t>(fps.size()));
  for (const Digest& d : fps) w.Raw(d);
  return w.Take();
}

std::vector<Digest> DecodeDigests(ByteReader& r) {
  uint32_t n = r.U32();
  if (static_cast<uint64_t>(n) * 32 > r.remaining()) Fail(ErrorCode::kMalformed, "short digest list");
  std::vector<Digest> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(r.Fixed32());
  return out;
}

Bytes EncodeStats(const StoreStats& s) {
  ByteWriter w;
  w.U64(s.logical_bytes);
  w.U64(s.physical_bytes);
  w.U64(s.stub_bytes);
  w.U64(s.containers);
  w.U64(s.index_entries);
  return w.Take();
}

Frame DispatchStore(StoreSession& store, const Frame& req) {
  ByteReader r(req.payload);
  ByteWriter w;
  MsgType type = static_cast<MsgType>(req.type);
  switch (type) {
    case MsgType::kDedupQuery: {
      auto fps = DecodeDigests(r);
      r.ExpectDone();
      w.Raw(EncodeBitmap(store.DedupQuery(fps)));
      break;
    }
    case MsgType::kPutPackages: {
      uint32_t n = r.U32();
      std::vector<PackageRef> items;
      items.reserve(std::min<size_t>(n, r.remaining() / 36));
      for (uint32_t i = 0; i < n; ++i) {
        Digest fp = r.Fixed32();
        items.push_back({fp, r.Blob()});
      }
      r.ExpectDone();
      w.U32(store.PutPackages(items));
      break;
    }
    case MsgType::kGetPackages: {
      auto fps = DecodeDigests(r);
      r.ExpectDone();
      auto packages = store.GetPackages(fps);
      w.U32(static_cast<uint32_t>(packages.size()));
      for (const Bytes& p : packages) w.Blob(p);
      break;
    }
    case MsgType::kRecipe: {
      uint8_t op = r.U8();
      Digest fid = r.Fixed32();
      if (op == kOpPut) {
        store.PutRecipe(fid, r.Rest());
      } else {
        r.ExpectDone();
        w.Raw(store.GetRecipe(fid));
      }
      break;
    }
    case MsgType::kStub: {
      uint8_t op = r.U8();
      Digest fid = r.Fixed32();
      uint32_t version = r.U32();
      if (op == kOpPut) {
        store.PutStub(fid, version, r.Rest());
      } else {
        r.ExpectDone();
        VersionedBlob blob = store.GetStub(fid, version);
        w.U32(blob.version);
        w.Raw(blob.data);
      }
      break;
    }
    case MsgType::kState: {
      uint8_t op = r.U8();
      Digest fid = r.Fixed32();
      if (op == kOpPut) {
        uint32_t expected = r.U32();
        uint32_t version = r.U32();
        store.PutState(fid, expected == kNoVersion ? std::nullopt : std::optional(expected),
                       version, r.Rest());
      } else {
        r.ExpectDone();
        VersionedBlob blob = store.GetState(fid);
        w.U32(blob.version);
        w.Raw(blob.data);
      }
      break;
    }
    case MsgType::kUser: {
      uint8_t op = r.U8();
      std::string id = r.Str16();
      if (op == kOpPut) {
        store.PutUser(id, r.Rest());
      } else {
        r.ExpectDone();
        w.Raw(store.GetUser(id));
      }
      break;
    }
    case MsgType::kStats:
      r.ExpectDone();
      w.Raw(EncodeStats(store.Stats()));
      break;
    default:
      Fail(ErrorCode::kMalformed, "unsupported message type for the dedup server");
  }
  return Frame{Response(type), w.Take()};
}

Frame DispatchManager(KeyManager& manager, const std::string& client_id, const Frame& req) {
  ByteReader r(req.payload);
  ByteWriter w;
  MsgType type = static_cast<MsgType>(req.type);
  const size_t width = manager.public_key().modulus_bytes();
  switch (type) {
    case MsgType::kKeygen: {
      uint32_t n = r.U32();
      if (static_cast<uint64_t>(n) * width != r.remaining()) {
        Fail(ErrorCode::kMalformed, "keygen payload size does not match count");
      }
      std::vector<Bytes> values;
      values.reserve(n);
      for (uint32_t i = 0; i < n; ++i) {
        ByteView v = r.Raw(width);
        values.emplace_back(v.begin(), v.end());
      }
      auto signed_values = manager.SignBatch(client_id, values);
      w.U32(static_cast<uint32_t>(signed_values.size()));
      for (const Bytes& v : signed_values) w.Raw(v);
      break;
    }
    case MsgType::kManagerKey:
      r.ExpectDone();
      w.Raw(manager.public_key().Serialize());
      break;
    default:
      Fail(ErrorCode::kMalformed, "unsupported message type for the key manager");
  }
  return Frame{Response(type), w.Take()};
}

template <typename Fn>
Frame Guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return Frame{static_cast<uint8_t>(MsgType::kError), EncodeError(e.code(), e.what())};
  } catch (const std::exception& e) {
    return Frame{static_cast<uint8_t>(MsgType::kError), EncodeError(ErrorCode::kInternal, e.what())};
  }
}

void SendAll(int fd, ByteView data) {
  size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) Fail(ErrorCode::kTransport, std::string("send failed: ") + std::strerror(errno));
    done += static_cast<size_t>(n);
  }
}

// Returns false on a clean EOF before the first byte.
bool RecvAll(int fd, uint8_t* out, size_t len, bool eof_ok) {
  size_t done = 0;
  while (done < len) {
    ssize_t n = ::recv(fd, out + done, len - done, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n == 0 && done == 0 && eof_ok) return false;
    if (n <= 0) Fail(ErrorCode::kTransport, "connection closed mid-frame");
    done += static_cast<size_t>(n);
  }
  return true;
}

}  // namespace

Bytes EncodeFrame(uint8_t type, ByteView payload) {
  if (payload.size() > kMaxFramePayload) Fail(ErrorCode::kInvalidArgument, "frame too large");
  ByteWriter w;
  w.U32(static_cast<uint32_t>(payload.size()));
  w.U8(type);
  w.Raw(payload);
  return w.Take();
}

Frame DecodeFrame(ByteView bytes) {
  ByteReader r(bytes);
  uint32_t len = r.U32();
  Frame f;
  f.type = r.U8();
  if (r.remaining() != len) Fail(ErrorCode::kMalformed, "frame length mismatch");
  ByteView payload = r.Rest();
  f.payload.assign(payload.begin(), payload.end());
  return f;
}

Bytes EncodeError(ErrorCode code, const std::string& message) {
  ByteWriter w;
  w.U16(static_cast<uint16_t>(code));
  w.Raw(AsBytes(message));
  return w.Take();
}

void ThrowErrorFrame(ByteView payload) {
  ByteReader r(payload);
  auto code = static_cast<ErrorCode>(r.U16());
  ByteView msg = r.Rest();
  throw Error(code, std::string(msg.begin(), msg.end()));
}

Bytes EncodeBitmap(const std::vector<bool>& bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
  }
  return out;
}

std::vector<bool> DecodeBitmap(ByteView bytes, size_t count) {
  if (bytes.size() != (count + 7) / 8) Fail(ErrorCode::kMalformed, "bitmap size mismatch");
  std::vector<bool> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = bytes[i / 8] & (0x80 >> (i % 8));
  return out;
}

Frame HandleStoreRequest(StoreSession& store, const Frame& request) {
  return Guarded([&] { return DispatchStore(store, request); });
}

Frame HandleManagerRequest(KeyManager& manager, const std::string& client_id,
                           const Frame& request) {
  return Guarded([&] { return DispatchManager(manager, client_id, request); });
}

TcpTransport::TcpTransport(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) Fail(ErrorCode::kInvalidArgument, "address must be host:port");
  std::string host = address.substr(0, colon);
  std::string port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    Fail(ErrorCode::kTransport, "cannot resolve " + address + ": " + gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) Fail(ErrorCode::kTransport, "cannot connect to " + address);
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

Frame TcpTransport::RoundTrip(const Frame& request) {
  std::lock_guard lock(mu_);
  SendAll(fd_, EncodeFrame(request.type, request.payload));
  uint8_t header[5];
  RecvAll(fd_, header, sizeof(header), false);
  ByteReader r(ByteView(header, sizeof(header)));
  uint32_t len = r.U32();
  if (len > kMaxFramePayload) Fail(ErrorCode::kTransport, "oversized response frame");
  Frame f;
  f.type = r.U8();
  f.payload.resize(len);
  RecvAll(fd_, f.payload.data(), len, false);
  return f;
}

std::unique_ptr<LoopbackTransport> LoopbackTransport::ForStore(StoreSession& store) {
  return std::make_unique<LoopbackTransport>(
      [&store](const Frame& f) { return HandleStoreRequest(store, f); });
}

std::unique_ptr<LoopbackTransport> LoopbackTransport::ForManager(KeyManager& manager,
                                                                 std::string client_id) {
  return std::make_unique<LoopbackTransport>(
      [&manager, id = std::move(client_id)](const Frame& f) {
        return HandleManagerRequest(manager, id, f);
      });
}

Frame LoopbackTransport::RoundTrip(const Frame& request) {
  Bytes wire = EncodeFrame(request.type, request.payload);
  {
    std::lock_guard lock(mu_);
    if (capture_) captured_.push_back(wire);
  }
  Frame response = handler_(DecodeFrame(wire));
  return DecodeFrame(EncodeFrame(response.type, response.payload));
}

Bytes RemoteStoreSession::Call(MsgType type, Bytes payload) {
  Frame resp = transport_.RoundTrip(Frame{static_cast<uint8_t>(type), std::move(payload)});
  if (resp.type == static_cast<uint8_t>(MsgType::kError)) ThrowErrorFrame(resp.payload);
  if (resp.type != Response(type)) Fail(ErrorCode::kMalformed, "unexpected response type");
  return std::move(resp.payload);
}

std::vector<bool> RemoteStoreSession::DedupQuery(std::span<const Digest> fingerprints) {
  return DecodeBitmap(Call(MsgType::kDedupQuery, EncodeDigests(fingerprints)),
                      fingerprints.size());
}

uint32_t RemoteStoreSession::PutPackages(std::span<const PackageRef> items) {
  ByteWriter w;
  w.U32(static_cast<uint32_t>(items.size()));
  for (const PackageRef& item : items) {
    w.Raw(item.fingerprint);
    w.Blob(item.data);
  }
  Bytes resp = Call(MsgType::kPutPackages, w.Take());
  ByteReader r(resp);
  uint32_t stored = r.U32();
  r.ExpectDone();
  return stored;
}

std::vector<Bytes> RemoteStoreSession::GetPackages(std::span<const Digest> fingerprints) {
  Bytes resp = Call(MsgType::kGetPackages, EncodeDigests(fingerprints));
  ByteReader r(resp);
  uint32_t n = r.U32();
  if (n != fingerprints.size()) Fail(ErrorCode::kMalformed, "package count mismatch");
  std::vector<Bytes> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    ByteView b = r.Blob();
    out.emplace_back(b.begin(), b.end());
  }
  r.ExpectDone();
  return out;
}

void RemoteStoreSession::PutRecipe(const Digest& file_id, ByteView recipe) {
  ByteWriter w;
  w.U8(kOpPut);
  w.Raw(file_id);
  w.Raw(recipe);
  Call(MsgType::kRecipe, w.Take());
}

Bytes RemoteStoreSession::GetRecipe(const Digest& file_id) {
  ByteWriter w;
  w.U8(kOpGet);
  w.Raw(file_id);
  return Call(MsgType::kRecipe, w.Take());
}

void RemoteStoreSession::PutStub(const Digest& file_id, uint32_t version, ByteView stub_file) {
  ByteWriter w;
  w.U8(kOpPut);
  w.Raw(file_id);
  w.U32(version);
  w.Raw(stub_file);
  Call(MsgType::kStub, w.Take());
}

VersionedBlob RemoteStoreSession::GetStub(const Digest& file_id, uint32_t max_version) {
  ByteWriter w;
  w.U8(kOpGet);
  w.Raw(file_id);
  w.U32(max_version);
  Bytes resp = Call(MsgType::kStub, w.Take());
  ByteReader r(resp);
  VersionedBlob out;
  out.version = r.U32();
  ByteView rest = r.Rest();
  out.data.assign(rest.begin(), rest.end());
  return out;
}

void RemoteStoreSession::PutState(const Digest& file_id, std::optional<uint32_t> expected,
                                  uint32_t version, ByteView wrapped_state) {
  ByteWriter w;
  w.U8(kOpPut);
  w.Raw(file_id);
  w.U32(expected.value_or(kNoVersion));
  w.U32(version);
  w.Raw(wrapped_state);
  Call(MsgType::kState, w.Take());
}

VersionedBlob RemoteStoreSession::GetState(const Digest& file_id) {
  ByteWriter w;
  w.U8(kOpGet);
  w.Raw(file_id);
  Bytes resp = Call(MsgType::kState, w.Take());
  ByteReader r(resp);
  VersionedBlob out;
  out.version = r.U32();
  ByteView rest = r.Rest();
  out.data.assign(rest.begin(), rest.end());
  return out;
}

void RemoteStoreSession::PutUser(const std::string& user_id, ByteView record) {
  ByteWriter w;
  w.U8(kOpPut);
  w.Str16(user_id);
  w.Raw(record);
  Call(MsgType::kUser, w.Take());
}

Bytes RemoteStoreSession::GetUser(const std::string& user_id) {
  ByteWriter w;
  w.U8(kOpGet);
  w.Str16(user_id);
  return Call(MsgType::kUser, w.Take());
}

StoreStats RemoteStoreSession::Stats() {
  Bytes resp = Call(MsgType::kStats, {});
  ByteReader r(resp);
  StoreStats s;
  s.logical_bytes = r.U64();
  s.physical_bytes = r.U64();
  s.stub_bytes = r.U64();
  s.containers = r.U64();
  s.index_entries = r.U64();
  r.ExpectDone();
  return s;
}

RsaPublicKey RemoteKeyManagerSession::PublicKey() {
  Frame resp = transport_.RoundTrip(Frame{static_cast<uint8_t>(MsgType::kManagerKey), {}});
  if (resp.type == static_cast<uint8_t>(MsgType::kError)) ThrowErrorFrame(resp.payload);
  if (resp.type != Response(MsgType::kManagerKey)) {
    Fail(ErrorCode::kMalformed, "unexpected response type");
  }
  return RsaPublicKey::Parse(resp.payload);
}

std::vector<Bytes> RemoteKeyManagerSession::SignBatch(std::span<const Bytes> blinded) {
  ByteWriter w;
  w.U32(static_cast<uint32_t>(blinded.size()));
  size_t width = blinded.empty() ? 0 : blinded.front().size();
  for (const Bytes& v : blinded) {
    if (v.size() != width) Fail(ErrorCode::kInvalidArgument, "blinded values differ in width");
    w.Raw(v);
  }
  Frame resp = transport_.RoundTrip(Frame{static_cast<uint8_t>(MsgType::kKeygen), w.Take()});
  if (resp.type == static_cast<uint8_t>(MsgType::kError)) ThrowErrorFrame(resp.payload);
  if (resp.type != Response(MsgType::kKeygen)) Fail(ErrorCode::kMalformed, "unexpected response type");
  ByteReader r(resp.payload);
  uint32_t n = r.U32();
  if (n != blinded.size() || r.remaining() != static_cast<size_t>(n) * width) {
    Fail(ErrorCode::kMalformed, "keygen response size mismatch");
  }
  std::vector<Bytes> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    ByteView v = r.Raw(width);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

}  // namespace reed

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

#include "service.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "wire.h"

namespace reed {
namespace {

bool ReadExact(int fd, uint8_t* out, size_t len) {
  size_t done = 0;
  while (done < len) {
    ssize_t n = ::recv(fd, out + done, len - done, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<size_t>(n);
  }
  return true;
}

bool WriteExact(int fd, ByteView data) {
  size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<size_t>(n);
  }
  return true;
}

std::string PeerAddress(const sockaddr_storage& addr) {
  char host[NI_MAXHOST] = {};
  if (::getnameinfo(reinterpret_cast<const sockaddr*>(&addr), sizeof(addr), host, sizeof(host),
                    nullptr, 0, NI_NUMERICHOST) != 0) {
    return "unknown";
  }
  return host;
}

}  // namespace

Service::Service(std::string listen, StoreSession* store, KeyManager* manager)
    : listen_(std::move(listen)), store_(store), manager_(manager) {
  if (store_ == nullptr && manager_ == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "service needs a store or a key manager");
  }
}

Service::~Service() { Stop(); }

void Service::Start() {
  auto colon = listen_.rfind(':');
  if (colon == std::string::npos) Fail(ErrorCode::kInvalidArgument, "listen address must be host:port");
  std::string host = listen_.substr(0, colon);
  std::string port = listen_.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res);
      rc != 0) {
    Fail(ErrorCode::kTransport, "cannot resolve " + listen_ + ": " + gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai != nullptr && listen_fd_ < 0; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
    } else {
      ::close(fd);
    }
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) {
    Fail(ErrorCode::kTransport, "cannot listen on " + listen_ + ": " + std::strerror(errno));
  }
  sockaddr_storage bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.ss_family == AF_INET6
                    ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                    : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
  acceptor_ = std::thread([this] { AcceptLoop(); });
}

void Service::Stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  std::list<Worker> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (Worker& w : workers) w.thread.join();
}

void Service::AcceptLoop() {
  while (!stopping_) {
    sockaddr_storage peer{};
    socklen_t len = sizeof(peer);
    int fd = ::accept4(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return;
    }
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    // Reap finished connections.
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
    open_fds_.push_back(fd);
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers_.push_back(Worker{std::thread([this, fd, done, addr = PeerAddress(peer)] {
                                Serve(fd, addr);
                                done->store(true);
                              }),
                              done});
  }
}

void Service::Serve(int fd, std::string peer) {
  for (;;) {
    uint8_t header[5];
    if (!ReadExact(fd, header, sizeof(header))) break;
    ByteReader r(ByteView(header, sizeof(header)));
    uint32_t len = r.U32();
    Frame req;
    req.type = r.U8();
    Frame resp;
    if (len > kMaxFramePayload) {
      resp = Frame{static_cast<uint8_t>(MsgType::kError),
                   EncodeError(ErrorCode::kMalformed, "frame too large")};
      WriteExact(fd, EncodeFrame(resp.type, resp.payload));
      break;
    }
    req.payload.resize(len);
    if (!ReadExact(fd, req.payload.data(), len)) break;

    bool manager_msg = req.type == static_cast<uint8_t>(MsgType::kKeygen) ||
                       req.type == static_cast<uint8_t>(MsgType::kManagerKey);
    if (manager_msg && manager_ != nullptr) {
      resp = HandleManagerRequest(*manager_, peer, req);
    } else if (!manager_msg && store_ != nullptr) {
      resp = HandleStoreRequest(*store_, req);
    } else {
      resp = Frame{static_cast<uint8_t>(MsgType::kError),
                   EncodeError(ErrorCode::kMalformed, "message not served by this endpoint")};
    }
    if (!WriteExact(fd, EncodeFrame(resp.type, resp.payload))) break;
  }
  std::lock_guard lock(mu_);
  open_fds_.remove(fd);
  ::close(fd);
}

}  // namespace reed

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

#ifndef REED_SERVICE_H_
#define REED_SERVICE_H_

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "keygen.h"
#include "store_session.h"

namespace reed {

// TCP endpoint speaking the frame protocol. Hosts a dedup store, a key
// manager, or both; one thread per connection. Rate limiting keys on the
// peer's address.
class Service {
 public:
  // `listen` is host:port; port 0 picks a free port (see port()).
  Service(std::string listen, StoreSession* store, KeyManager* manager);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void Start();
  void Stop();
  uint16_t port() const { return port_; }

 private:
  void AcceptLoop();
  void Serve(int fd, std::string peer);

  std::string listen_;
  StoreSession* store_;
  KeyManager* manager_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers_;
  std::list<int> open_fds_;
};

}  // namespace reed

#endif  // REED_SERVICE_H_

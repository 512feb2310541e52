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

// reed: command-line client, dedup server and key manager.

#include <signal.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reed/reed.h"

namespace {

using json = nlohmann::json;

struct CliError {
  reed_status status;
  std::string message;
};

void Check(reed_status s) {
  if (s != REED_OK) throw CliError{s, reed_last_error()};
}

int ExitCode(reed_status s) {
  switch (s) {
    case REED_OK:
      return 0;
    case REED_ACCESS_DENIED:
      return 2;
    case REED_INTEGRITY_VIOLATION:
    case REED_FINGERPRINT_MISMATCH:
      return 3;
    case REED_TRANSPORT:
      return 4;
    case REED_RATE_LIMITED:
      return 5;
    default:
      return 1;
  }
}

// Accepts 8192, "8192", "8K", "1M", "4MiB".
uint64_t ParseSize(const std::string& text) {
  size_t pos = 0;
  uint64_t value = std::stoull(text, &pos);
  std::string suffix = text.substr(pos);
  for (char& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (suffix.empty() || suffix == "B") return value;
  if (suffix == "K" || suffix == "KB" || suffix == "KIB") return value << 10;
  if (suffix == "M" || suffix == "MB" || suffix == "MIB") return value << 20;
  if (suffix == "G" || suffix == "GB" || suffix == "GIB") return value << 30;
  throw CliError{REED_INVALID_ARGUMENT, "bad size '" + text + "'"};
}

// Flat JSON object with dotted keys, e.g. {"chunk.avg_size": "8K"}.
class Config {
 public:
  void Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{REED_NOT_FOUND, "cannot read config " + path};
    try {
      doc_ = json::parse(in);
    } catch (const json::exception& e) {
      throw CliError{REED_MALFORMED, "config " + path + ": " + e.what()};
    }
    if (!doc_.is_object()) throw CliError{REED_MALFORMED, "config must be a JSON object"};
  }

  std::optional<std::string> Str(const std::string& key) const {
    auto it = doc_.find(key);
    if (it == doc_.end()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    throw CliError{REED_MALFORMED, "config key " + key + " must be a string or number"};
  }

  template <typename T>
  void Size(const std::string& key, T& out) const {
    if (auto v = Str(key)) out = static_cast<T>(ParseSize(*v));
  }

 private:
  json doc_ = json::object();
};

std::vector<std::string> SplitPolicy(const std::string& text) {
  std::vector<std::string> users;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) users.push_back(item);
  }
  return users;
}

std::vector<const char*> CStrings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string HexId(const uint8_t id[32]) {
  char hex[65];
  reed_file_id_hex(id, hex);
  return hex;
}

void WaitForSignal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

struct Handles {
  reed_identity* identity = nullptr;
  reed_client* client = nullptr;
  reed_store* store = nullptr;
  reed_manager* manager = nullptr;
  reed_service* service = nullptr;
  ~Handles() {
    reed_client_free(client);
    reed_identity_free(identity);
    reed_service_stop(service);
    reed_manager_free(manager);
    reed_store_close(store);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted deduplicating storage with rekeying"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string server_addr;
  std::string manager_addr;
  std::string identity_path;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--server", server_addr, "dedup server host:port");
  app.add_option("--manager", manager_addr, "key manager host:port");
  app.add_option("--identity", identity_path, "identity file");

  std::string user;
  auto* reg = app.add_subcommand("keygen-register", "create an identity and publish its public keys");
  reg->add_option("--user", user, "user id")->required();

  std::string path;
  std::string policy;
  std::string scheme;
  bool fixed = false;
  bool rabin = false;
  auto* up = app.add_subcommand("upload", "upload a file");
  up->add_option("path", path)->required();
  up->add_option("--policy", policy, "comma-separated user ids")->required();
  up->add_option("--scheme", scheme, "basic|enhanced")->check(CLI::IsMember({"basic", "enhanced"}));
  auto* fixed_flag = up->add_flag("--fixed", fixed, "fixed-size chunking");
  up->add_flag("--rabin", rabin, "content-defined chunking")->excludes(fixed_flag);

  std::string file_id;
  std::string out_path;
  auto* down = app.add_subcommand("download", "download a file");
  down->add_option("file-id", file_id)->required();
  down->add_option("-o,--output", out_path)->required();

  std::string mode = "lazy";
  auto* rk = app.add_subcommand("rekey", "renew a file key and replace its policy");
  rk->add_option("file-id", file_id)->required();
  rk->add_option("--policy", policy)->required();
  rk->add_option("--mode", mode)->check(CLI::IsMember({"lazy", "active"}));

  auto* st = app.add_subcommand("stats", "print server storage counters");

  std::string listen;
  std::string data_root;
  std::string key_root;
  std::string container_size;
  auto* serve = app.add_subcommand("serve", "run a dedup server");
  serve->add_option("--listen", listen);
  serve->add_option("--data-root", data_root);
  serve->add_option("--key-root", key_root);
  serve->add_option("--container-size", container_size);

  std::string key_file;
  int bits = 1024;
  auto* mgr = app.add_subcommand("manager", "run a key manager");
  mgr->add_option("--listen", listen);
  mgr->add_option("--key-file", key_file, "RSA private key; created if missing");
  mgr->add_option("--bits", bits);

  CLI11_PARSE(app, argc, argv);

  Handles h;
  try {
    Config cfg;
    if (!config_path.empty()) cfg.Load(config_path);
    auto pick = [&](std::string& field, const std::string& key, const std::string& fallback) {
      if (!field.empty()) return;
      field = cfg.Str(key).value_or(fallback);
    };
    pick(server_addr, "server", "127.0.0.1:7401");
    pick(manager_addr, "manager", "127.0.0.1:7402");

    reed_client_options opt;
    reed_client_options_default(&opt);
    if (auto m = cfg.Str("chunk.mode")) {
      if (*m == "fixed") {
        opt.chunking = REED_CHUNK_FIXED;
      } else if (*m == "rabin") {
        opt.chunking = REED_CHUNK_RABIN;
      } else {
        throw CliError{REED_INVALID_ARGUMENT, "chunk.mode must be fixed or rabin"};
      }
    }
    cfg.Size("chunk.fixed_size", opt.fixed_size);
    cfg.Size("chunk.min_size", opt.min_chunk);
    cfg.Size("chunk.avg_size", opt.avg_chunk);
    cfg.Size("chunk.max_size", opt.max_chunk);
    cfg.Size("segment.avg_size", opt.avg_segment);
    cfg.Size("workers", opt.workers);
    if (auto k = cfg.Str("keying")) opt.keying = *k == "chunk" ? REED_KEY_PER_CHUNK : REED_KEY_SIMILARITY;
    if (scheme.empty()) scheme = cfg.Str("scheme").value_or("enhanced");
    opt.scheme = scheme == "basic" ? REED_SCHEME_BASIC : REED_SCHEME_ENHANCED;
    if (opt.scheme == REED_SCHEME_BASIC) opt.keying = REED_KEY_PER_CHUNK;
    if (fixed) opt.chunking = REED_CHUNK_FIXED;
    if (rabin) opt.chunking = REED_CHUNK_RABIN;

    auto connect = [&] {
      pick(identity_path, "identity", "identity.json");
      Check(reed_identity_load(identity_path.c_str(), &h.identity));
      Check(reed_client_connect(h.identity, server_addr.c_str(), manager_addr.c_str(), &opt, &h.client));
    };

    if (*reg) {
      pick(identity_path, "identity", user + ".identity.json");
      Check(reed_identity_generate(user.c_str(), &h.identity));
      Check(reed_client_connect(h.identity, server_addr.c_str(), manager_addr.c_str(), &opt, &h.client));
      Check(reed_client_register(h.client));
      Check(reed_identity_save(h.identity, identity_path.c_str()));
      std::cout << "registered " << user << ", identity saved to " << identity_path << "\n";
    } else if (*up) {
      connect();
      auto users = SplitPolicy(policy);
      auto cusers = CStrings(users);
      reed_upload_report r{};
      Check(reed_client_upload_file(h.client, path.c_str(), cusers.data(), cusers.size(), &r));
      std::cout << HexId(r.file_id) << "\n";
      std::cerr << r.bytes << " bytes, " << r.chunks << " chunks, " << r.segments << " segments, "
                << r.key_requests << " key requests, " << r.packages_stored << " new packages\n";
    } else if (*down) {
      connect();
      uint8_t id[32];
      Check(reed_file_id_parse(file_id.c_str(), id));
      Check(reed_client_download_file(h.client, id, out_path.c_str()));
    } else if (*rk) {
      connect();
      uint8_t id[32];
      Check(reed_file_id_parse(file_id.c_str(), id));
      auto users = SplitPolicy(policy);
      auto cusers = CStrings(users);
      reed_rekey_report r{};
      Check(reed_client_rekey(h.client, id, cusers.data(), cusers.size(),
                              mode == "active" ? REED_REVOKE_ACTIVE : REED_REVOKE_LAZY, &r));
      std::cout << "key state version " << r.new_version << "\n";
    } else if (*st) {
      connect();
      reed_stats s{};
      Check(reed_client_stats(h.client, &s));
      double saving = s.logical_bytes == 0
                          ? 0.0
                          : 1.0 - static_cast<double>(s.physical_bytes + s.stub_bytes) /
                                      static_cast<double>(s.logical_bytes);
      std::printf("logical\t%llu\nphysical\t%llu\nstub\t%llu\ncontainers\t%llu\nindex_entries\t%llu\nsaving\t%.6f\n",
                  static_cast<unsigned long long>(s.logical_bytes),
                  static_cast<unsigned long long>(s.physical_bytes),
                  static_cast<unsigned long long>(s.stub_bytes),
                  static_cast<unsigned long long>(s.containers),
                  static_cast<unsigned long long>(s.index_entries), saving);
    } else if (*serve || *mgr) {
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      if (*serve) {
        pick(listen, "listen", server_addr);
        pick(data_root, "data_root", "reed-data");
        pick(key_root, "key_root", "reed-keys");
        uint64_t csize = 0;
        if (!container_size.empty()) {
          csize = ParseSize(container_size);
        } else {
          cfg.Size("container_size", csize);
        }
        Check(reed_store_open(data_root.c_str(), key_root.c_str(), csize, 1, &h.store));
        Check(reed_service_start(listen.c_str(), h.store, nullptr, &h.service));
      } else {
        pick(listen, "manager.listen", manager_addr);
        pick(key_file, "manager.key_file", "manager.pem");
        double capacity = 0;
        double refill = 0;
        if (auto v = cfg.Str("limit.capacity")) capacity = std::stod(*v);
        if (auto v = cfg.Str("limit.refill")) refill = std::stod(*v);
        std::ifstream probe(key_file);
        if (probe) {
          Check(reed_manager_load(key_file.c_str(), capacity, refill, &h.manager));
        } else {
          Check(reed_manager_create(bits, capacity, refill, &h.manager));
          Check(reed_manager_save(h.manager, key_file.c_str()));
        }
        Check(reed_service_start(listen.c_str(), nullptr, h.manager, &h.service));
      }
      std::cerr << "listening on port " << reed_service_port(h.service) << "\n";
      WaitForSignal();
    }
  } catch (const CliError& e) {
    std::cerr << "reed: " << reed_status_name(e.status) << ": " << e.message << "\n";
    return ExitCode(e.status);
  } catch (const std::exception& e) {
    std::cerr << "reed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

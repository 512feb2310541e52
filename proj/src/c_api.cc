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

#include "reed/reed.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "client.h"
#include "service.h"
#include "store.h"
#include "trace.h"
#include "wire.h"

struct reed_store {
  std::unique_ptr<reed::DedupStore> store;
};

struct reed_manager {
  std::string pem;
  std::unique_ptr<reed::KeyManager> manager;
};

struct reed_service {
  std::unique_ptr<reed::Service> service;
};

struct reed_identity {
  reed::ClientIdentity identity;
};

struct reed_client {
  std::unique_ptr<reed::FrameTransport> store_transport;
  std::unique_ptr<reed::FrameTransport> manager_transport;
  std::unique_ptr<reed::RemoteStoreSession> store;
  std::unique_ptr<reed::RemoteKeyManagerSession> manager;
  std::unique_ptr<reed::Client> client;
};

struct reed_trace {
  reed::Trace trace;
};

struct reed_report {
  reed::SavingsReport report;
};

namespace {

thread_local std::string g_last_error;

reed_status SetError(reed_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
reed_status Guard(Fn&& fn) {
  try {
    fn();
    return REED_OK;
  } catch (const reed::Error& e) {
    return SetError(static_cast<reed_status>(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return SetError(REED_STORAGE, e.what());
  } catch (const std::bad_alloc&) {
    return SetError(REED_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(REED_INTERNAL, e.what());
  } catch (...) {
    return SetError(REED_INTERNAL, "unknown exception");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) reed::Fail(reed::ErrorCode::kInvalidArgument, what);
}

reed::Digest ToDigest(const uint8_t* id) {
  reed::Digest d;
  std::memcpy(d.data(), id, d.size());
  return d;
}

reed::Policy ToPolicy(const char* const* users, size_t count) {
  Require(users != nullptr || count == 0, "null user list");
  std::vector<std::string> ids;
  for (size_t i = 0; i < count; ++i) {
    Require(users[i] != nullptr, "null user id");
    ids.emplace_back(users[i]);
  }
  return reed::Policy::Of(ids);
}

reed::RateLimiter::Config Limits(double capacity, double refill) {
  reed::RateLimiter::Config c;
  if (capacity > 0) c.capacity = capacity;
  if (refill > 0) c.refill_per_second = refill;
  return c;
}

reed::ClientOptions ToOptions(const reed_client_options* o) {
  reed_client_options defaults;
  reed_client_options_default(&defaults);
  if (o == nullptr) o = &defaults;
  reed::ClientOptions opt;
  Require(o->chunking == REED_CHUNK_FIXED || o->chunking == REED_CHUNK_RABIN, "bad chunking mode");
  Require(o->keying == REED_KEY_PER_CHUNK || o->keying == REED_KEY_SIMILARITY, "bad keying mode");
  Require(o->scheme == REED_SCHEME_BASIC || o->scheme == REED_SCHEME_ENHANCED, "bad scheme");
  opt.chunking.mode = static_cast<reed::ChunkingMode>(o->chunking);
  opt.chunking.fixed_size = o->fixed_size;
  opt.chunking.min_size = o->min_chunk;
  opt.chunking.avg_size = o->avg_chunk;
  opt.chunking.max_size = o->max_chunk;
  opt.segmentation.avg_size = o->avg_segment;
  opt.segmentation.avg_chunk_size = opt.chunking.mode == reed::ChunkingMode::kFixed
                                        ? o->fixed_size
                                        : o->avg_chunk;
  opt.keying = static_cast<reed::KeyingMode>(o->keying);
  opt.scheme = static_cast<reed::Scheme>(o->scheme);
  opt.workers = o->workers == 0 ? 1 : o->workers;
  opt.pipelined = o->pipelined != 0;
  return opt;
}

void CopyStats(const reed::StoreStats& s, reed_stats* out) {
  out->logical_bytes = s.logical_bytes;
  out->physical_bytes = s.physical_bytes;
  out->stub_bytes = s.stub_bytes;
  out->containers = s.containers;
  out->index_entries = s.index_entries;
}

void CopyUpload(const reed::UploadReport& r, reed_upload_report* out) {
  std::memcpy(out->file_id, r.file_id.data(), 32);
  out->bytes = r.bytes;
  out->chunks = r.chunks;
  out->segments = r.segments;
  out->key_requests = r.key_requests;
  out->key_round_trips = r.key_round_trips;
  out->packages_stored = r.packages_stored;
  out->stub_file_bytes = r.stub_file_bytes;
}

reed_client* MakeClient(const reed_identity* identity, std::unique_ptr<reed::FrameTransport> st,
                        std::unique_ptr<reed::FrameTransport> mt,
                        const reed_client_options* options) {
  auto c = std::make_unique<reed_client>();
  c->store_transport = std::move(st);
  c->manager_transport = std::move(mt);
  c->store = std::make_unique<reed::RemoteStoreSession>(*c->store_transport);
  c->manager = std::make_unique<reed::RemoteKeyManagerSession>(*c->manager_transport);
  c->client = std::make_unique<reed::Client>(identity->identity, *c->store, *c->manager,
                                             ToOptions(options));
  return c.release();
}

}  // namespace

extern "C" {

const char* reed_status_name(reed_status status) {
  return reed::ErrorCodeName(static_cast<reed::ErrorCode>(status));
}

const char* reed_last_error(void) { return g_last_error.c_str(); }

void reed_buffer_free(reed_buffer* buffer) {
  if (buffer == nullptr) return;
  std::free(buffer->data);
  buffer->data = nullptr;
  buffer->size = 0;
}

reed_status reed_store_open(const char* data_root, const char* key_root, uint64_t container_size,
                            int fsync, reed_store** out) {
  return Guard([&] {
    Require(data_root && key_root && out, "null argument");
    reed::StoreConfig config;
    config.data_root = data_root;
    config.key_root = key_root;
    if (container_size != 0) config.container_size = container_size;
    config.fsync = fsync != 0;
    auto s = std::make_unique<reed_store>();
    s->store = std::make_unique<reed::DedupStore>(config);
    *out = s.release();
  });
}

void reed_store_close(reed_store* store) { delete store; }

reed_status reed_store_stats(reed_store* store, reed_stats* out) {
  return Guard([&] {
    Require(store && out, "null argument");
    CopyStats(store->store->Stats(), out);
  });
}

reed_status reed_store_container_digest(reed_store* store, uint8_t out[32]) {
  return Guard([&] {
    Require(store && out, "null argument");
    reed::Digest d = store->store->ContainerDigest();
    std::memcpy(out, d.data(), d.size());
  });
}

reed_status reed_manager_create(int modulus_bits, double capacity, double refill_per_second,
                                reed_manager** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    Require(modulus_bits >= 512, "modulus must be at least 512 bits");
    reed::RsaKey key = reed::RsaKey::Generate(modulus_bits);
    auto m = std::make_unique<reed_manager>();
    m->pem = key.ToPrivatePem();
    m->manager = std::make_unique<reed::KeyManager>(std::move(key), Limits(capacity, refill_per_second));
    *out = m.release();
  });
}

reed_status reed_manager_load(const char* pem_path, double capacity, double refill_per_second,
                              reed_manager** out) {
  return Guard([&] {
    Require(pem_path && out, "null argument");
    std::ifstream in(pem_path);
    if (!in) reed::Fail(reed::ErrorCode::kNotFound, std::string("cannot read ") + pem_path);
    std::string pem((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto m = std::make_unique<reed_manager>();
    m->pem = pem;
    m->manager = std::make_unique<reed::KeyManager>(reed::RsaKey::FromPrivatePem(pem),
                                                    Limits(capacity, refill_per_second));
    *out = m.release();
  });
}

reed_status reed_manager_save(const reed_manager* manager, const char* pem_path) {
  return Guard([&] {
    Require(manager && pem_path, "null argument");
    std::ofstream out(pem_path, std::ios::trunc);
    out << manager->pem;
    if (!out) reed::Fail(reed::ErrorCode::kStorage, std::string("cannot write ") + pem_path);
    std::filesystem::permissions(pem_path, std::filesystem::perms::owner_read |
                                               std::filesystem::perms::owner_write);
  });
}

void reed_manager_free(reed_manager* manager) { delete manager; }

reed_status reed_service_start(const char* listen, reed_store* store, reed_manager* manager,
                               reed_service** out) {
  return Guard([&] {
    Require(listen && out, "null argument");
    Require(store || manager, "a service needs a store or a key manager");
    auto s = std::make_unique<reed_service>();
    s->service = std::make_unique<reed::Service>(listen, store ? store->store.get() : nullptr,
                                                 manager ? manager->manager.get() : nullptr);
    s->service->Start();
    *out = s.release();
  });
}

uint16_t reed_service_port(const reed_service* service) {
  return service ? service->service->port() : 0;
}

void reed_service_stop(reed_service* service) {
  if (service == nullptr) return;
  service->service->Stop();
  delete service;
}

reed_status reed_identity_generate(const char* user_id, reed_identity** out) {
  return Guard([&] {
    Require(user_id && out && *user_id, "user id must be non-empty");
    *out = new reed_identity{reed::ClientIdentity::Generate(user_id)};
  });
}

reed_status reed_identity_load(const char* path, reed_identity** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    std::ifstream in(path);
    if (!in) reed::Fail(reed::ErrorCode::kNotFound, std::string("cannot read identity ") + path);
    std::string json((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    *out = new reed_identity{reed::ClientIdentity::FromJson(json)};
  });
}

reed_status reed_identity_save(const reed_identity* identity, const char* path) {
  return Guard([&] {
    Require(identity && path, "null argument");
    std::ofstream out(path, std::ios::trunc);
    out << identity->identity.ToJson();
    if (!out) reed::Fail(reed::ErrorCode::kStorage, std::string("cannot write ") + path);
    out.close();
    std::filesystem::permissions(path, std::filesystem::perms::owner_read |
                                           std::filesystem::perms::owner_write);
  });
}

const char* reed_identity_user(const reed_identity* identity) {
  return identity ? identity->identity.user_id.c_str() : "";
}

void reed_identity_free(reed_identity* identity) { delete identity; }

void reed_client_options_default(reed_client_options* o) {
  if (o == nullptr) return;
  reed::ClientOptions d;
  o->chunking = static_cast<reed_chunking>(d.chunking.mode);
  o->fixed_size = static_cast<uint32_t>(d.chunking.fixed_size);
  o->min_chunk = static_cast<uint32_t>(d.chunking.min_size);
  o->avg_chunk = static_cast<uint32_t>(d.chunking.avg_size);
  o->max_chunk = static_cast<uint32_t>(d.chunking.max_size);
  o->avg_segment = d.segmentation.avg_size;
  o->keying = static_cast<reed_keying>(d.keying);
  o->scheme = static_cast<reed_scheme>(d.scheme);
  o->workers = static_cast<uint32_t>(d.workers);
  o->pipelined = d.pipelined ? 1 : 0;
}

reed_status reed_client_connect(const reed_identity* identity, const char* server_address,
                                const char* manager_address, const reed_client_options* options,
                                reed_client** out) {
  return Guard([&] {
    Require(identity && server_address && manager_address && out, "null argument");
    *out = MakeClient(identity, std::make_unique<reed::TcpTransport>(server_address),
                      std::make_unique<reed::TcpTransport>(manager_address), options);
  });
}

reed_status reed_client_local(const reed_identity* identity, reed_store* store,
                              reed_manager* manager, const reed_client_options* options,
                              reed_client** out) {
  return Guard([&] {
    Require(identity && store && manager && out, "null argument");
    *out = MakeClient(identity, reed::LoopbackTransport::ForStore(*store->store),
                      reed::LoopbackTransport::ForManager(*manager->manager,
                                                          identity->identity.user_id),
                      options);
  });
}

void reed_client_free(reed_client* client) { delete client; }

reed_status reed_client_register(reed_client* client) {
  return Guard([&] {
    Require(client != nullptr, "null argument");
    client->client->Register();
  });
}

reed_status reed_client_upload(reed_client* client, const uint8_t* data, size_t size,
                               const char* pathname, const char* const* users, size_t user_count,
                               reed_upload_report* report) {
  return Guard([&] {
    Require(client && pathname && (data || size == 0), "null argument");
    reed::UploadReport r = client->client->Upload(reed::ByteView(data, size), pathname,
                                                  ToPolicy(users, user_count));
    if (report) CopyUpload(r, report);
  });
}

reed_status reed_client_upload_file(reed_client* client, const char* path, const char* const* users,
                                    size_t user_count, reed_upload_report* report) {
  return Guard([&] {
    Require(client && path, "null argument");
    reed::UploadReport r = client->client->UploadFile(path, ToPolicy(users, user_count));
    if (report) CopyUpload(r, report);
  });
}

reed_status reed_client_download(reed_client* client, const uint8_t file_id[32], reed_buffer* out) {
  return Guard([&] {
    Require(client && file_id && out, "null argument");
    reed::Bytes data = client->client->Download(ToDigest(file_id));
    auto* buf = static_cast<uint8_t*>(std::malloc(data.empty() ? 1 : data.size()));
    if (buf == nullptr) throw std::bad_alloc();
    std::memcpy(buf, data.data(), data.size());
    out->data = buf;
    out->size = data.size();
  });
}

reed_status reed_client_download_file(reed_client* client, const uint8_t file_id[32],
                                      const char* out_path) {
  return Guard([&] {
    Require(client && file_id && out_path, "null argument");
    client->client->DownloadFile(ToDigest(file_id), out_path);
  });
}

reed_status reed_client_rekey(reed_client* client, const uint8_t file_id[32],
                              const char* const* users, size_t user_count, reed_revocation mode,
                              reed_rekey_report* report) {
  return Guard([&] {
    Require(client && file_id, "null argument");
    Require(mode == REED_REVOKE_LAZY || mode == REED_REVOKE_ACTIVE, "bad revocation mode");
    reed::RekeyResult r = client->client->Rekey(ToDigest(file_id), ToPolicy(users, user_count),
                                                static_cast<reed::RevocationMode>(mode));
    if (report) {
      report->new_version = r.new_version;
      report->stub_bytes_moved = r.stub_bytes_moved;
      report->state_bytes_moved = r.state_bytes_moved;
    }
  });
}

reed_status reed_client_stats(reed_client* client, reed_stats* out) {
  return Guard([&] {
    Require(client && out, "null argument");
    CopyStats(client->store->Stats(), out);
  });
}

reed_status reed_file_id(const char* owner, const char* pathname, uint8_t out[32]) {
  return Guard([&] {
    Require(owner && pathname && out, "null argument");
    reed::Digest d = reed::MakeFileId(owner, pathname);
    std::memcpy(out, d.data(), d.size());
  });
}

void reed_file_id_hex(const uint8_t file_id[32], char out[65]) {
  std::string hex = reed::ToHex(reed::ByteView(file_id, 32));
  std::memcpy(out, hex.c_str(), 65);
}

reed_status reed_file_id_parse(const char* hex, uint8_t out[32]) {
  return Guard([&] {
    Require(hex && out, "null argument");
    reed::Digest d = reed::DigestFromHex(hex);
    std::memcpy(out, d.data(), d.size());
  });
}

void reed_trace_gen_params_default(reed_trace_gen_params* p) {
  if (p == nullptr) return;
  reed::GeneratorParams d;
  p->seed = d.seed;
  p->snapshots = d.snapshots;
  p->chunks = d.chunks;
  p->mutation_rate = d.mutation_rate;
  p->min_chunk = d.min_chunk;
  p->max_chunk = d.max_chunk;
  p->run_length = d.run_length;
}

reed_status reed_trace_generate(const reed_trace_gen_params* params, reed_trace** out) {
  return Guard([&] {
    Require(params && out, "null argument");
    reed::GeneratorParams g;
    g.seed = params->seed;
    g.snapshots = params->snapshots;
    g.chunks = params->chunks;
    g.mutation_rate = params->mutation_rate;
    g.min_chunk = params->min_chunk;
    g.max_chunk = params->max_chunk;
    g.run_length = params->run_length;
    *out = new reed_trace{reed::GenerateTrace(g)};
  });
}

reed_status reed_trace_load(const char* path, reed_trace** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    if (std::strcmp(path, "-") == 0) {
      *out = new reed_trace{reed::ParseTrace(std::cin)};
    } else {
      *out = new reed_trace{reed::LoadTrace(path)};
    }
  });
}

reed_status reed_trace_save(const reed_trace* trace, const char* path) {
  return Guard([&] {
    Require(trace && path, "null argument");
    if (std::strcmp(path, "-") == 0) {
      reed::WriteTrace(std::cout, trace->trace);
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::trunc);
    reed::WriteTrace(out, trace->trace);
    if (!out) reed::Fail(reed::ErrorCode::kStorage, std::string("cannot write ") + path);
  });
}

size_t reed_trace_snapshot_count(const reed_trace* trace) {
  return trace ? trace->trace.size() : 0;
}

void reed_trace_free(reed_trace* trace) { delete trace; }

void reed_replay_params_default(reed_replay_params* p) {
  if (p == nullptr) return;
  reed::ReplayParams d;
  p->keying = static_cast<reed_keying>(d.mode);
  p->avg_segment = d.segmentation.avg_size;
  p->avg_chunk = static_cast<uint32_t>(d.segmentation.avg_chunk_size);
  p->scheme = static_cast<reed_scheme>(d.scheme);
  p->drop_zero_chunks = d.drop_zero_chunks ? 1 : 0;
}

reed_status reed_trace_replay(const reed_trace* trace, const reed_replay_params* params,
                              reed_report** out) {
  return Guard([&] {
    Require(trace && params && out, "null argument");
    Require(params->keying == REED_KEY_PER_CHUNK || params->keying == REED_KEY_SIMILARITY,
            "bad keying mode");
    Require(params->scheme == REED_SCHEME_BASIC || params->scheme == REED_SCHEME_ENHANCED,
            "bad scheme");
    reed::ReplayParams p;
    p.mode = static_cast<reed::KeyingMode>(params->keying);
    p.segmentation.avg_size = params->avg_segment;
    p.segmentation.avg_chunk_size = params->avg_chunk;
    p.scheme = static_cast<reed::Scheme>(params->scheme);
    p.drop_zero_chunks = params->drop_zero_chunks != 0;
    *out = new reed_report{reed::Replay(trace->trace, p)};
  });
}

size_t reed_report_snapshot_count(const reed_report* report) {
  return report ? report->report.snapshots.size() : 0;
}

reed_status reed_report_snapshot(const reed_report* report, size_t index, reed_snapshot_stats* out) {
  return Guard([&] {
    Require(report && out, "null argument");
    if (index >= report->report.snapshots.size()) {
      reed::Fail(reed::ErrorCode::kInvalidArgument, "snapshot index out of range");
    }
    const reed::SnapshotStats& s = report->report.snapshots[index];
    out->chunks = s.chunks;
    out->segments = s.segments;
    out->key_requests = s.key_requests;
    out->logical = s.logical;
    out->physical = s.physical;
    out->stub = s.stub;
    out->total_logical = s.total_logical;
    out->total_physical = s.total_physical;
    out->total_stub = s.total_stub;
    out->saving = s.saving();
  });
}

reed_status reed_report_write_tsv(const reed_report* report, const char* path) {
  return Guard([&] {
    Require(report && path, "null argument");
    if (std::strcmp(path, "-") == 0) {
      report->report.WriteTsv(std::cout);
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::trunc);
    report->report.WriteTsv(out);
    if (!out) reed::Fail(reed::ErrorCode::kStorage, std::string("cannot write ") + path);
  });
}

void reed_report_free(reed_report* report) { delete report; }

}  // extern "C"

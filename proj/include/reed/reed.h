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

/* C interface to the reed encrypted deduplication library.
 *
 * All objects are opaque handles created by a *_open / *_create / *_load
 * function and released by the matching *_free or *_close. Functions return
 * a reed_status; on failure reed_last_error() describes the problem for the
 * calling thread until its next failing call. Output pointers are written
 * only on success. File ids are 32 raw bytes.
 */

#ifndef REED_REED_H_
#define REED_REED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(REED_BUILDING_LIBRARY)
#define REED_API __attribute__((visibility("default")))
#else
#define REED_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum reed_status {
  REED_OK = 0,
  REED_INVALID_ARGUMENT = 1,
  REED_ACCESS_DENIED = 2,
  REED_INTEGRITY_VIOLATION = 3,
  REED_TRANSPORT = 4,
  REED_RATE_LIMITED = 5,
  REED_NOT_FOUND = 6,
  REED_FINGERPRINT_MISMATCH = 7,
  REED_VERSION_CONFLICT = 8,
  REED_PACKAGE_TOO_SMALL = 9,
  REED_AUTHENTICATION_FAILURE = 10,
  REED_SIGNATURE_INVALID = 11,
  REED_ZERO_FINGERPRINT = 12,
  REED_INVALID_OPERAND = 13,
  REED_NOT_OWNER = 14,
  REED_AT_INITIAL_STATE = 15,
  REED_UNKNOWN_USER = 16,
  REED_POLICY_EMPTY = 17,
  REED_TRACE_PARSE = 18,
  REED_STORAGE = 19,
  REED_MALFORMED = 20,
  REED_INTERNAL = 21
} reed_status;

#define REED_FILE_ID_SIZE 32

typedef struct reed_store reed_store;
typedef struct reed_manager reed_manager;
typedef struct reed_service reed_service;
typedef struct reed_identity reed_identity;
typedef struct reed_client reed_client;
typedef struct reed_trace reed_trace;
typedef struct reed_report reed_report;

REED_API const char* reed_status_name(reed_status status);
REED_API const char* reed_last_error(void);

/* Heap buffer returned by the library. */
typedef struct reed_buffer {
  uint8_t* data;
  size_t size;
} reed_buffer;
REED_API void reed_buffer_free(reed_buffer* buffer);

typedef struct reed_stats {
  uint64_t logical_bytes;
  uint64_t physical_bytes;
  uint64_t stub_bytes;
  uint64_t containers;
  uint64_t index_entries;
} reed_stats;

/* ---- Server side ---- */

/* container_size 0 selects the 4 MiB default. */
REED_API reed_status reed_store_open(const char* data_root, const char* key_root,
                                     uint64_t container_size, int fsync, reed_store** out);
REED_API void reed_store_close(reed_store* store);
REED_API reed_status reed_store_stats(reed_store* store, reed_stats* out);
/* SHA-256 over all container files. */
REED_API reed_status reed_store_container_digest(reed_store* store, uint8_t out[32]);

/* Rate limit: bucket capacity and refill rate in fingerprints per second per
 * client. Pass 0 for either to keep the defaults (10000 and 10000/s). */
REED_API reed_status reed_manager_create(int modulus_bits, double capacity, double refill_per_second,
                                         reed_manager** out);
REED_API reed_status reed_manager_load(const char* pem_path, double capacity,
                                       double refill_per_second, reed_manager** out);
REED_API reed_status reed_manager_save(const reed_manager* manager, const char* pem_path);
REED_API void reed_manager_free(reed_manager* manager);

/* Serves a store, a key manager or both (either may be NULL, not both) on
 * host:port. Port 0 picks a free port. */
REED_API reed_status reed_service_start(const char* listen, reed_store* store,
                                        reed_manager* manager, reed_service** out);
REED_API uint16_t reed_service_port(const reed_service* service);
REED_API void reed_service_stop(reed_service* service);

/* ---- Client side ---- */

REED_API reed_status reed_identity_generate(const char* user_id, reed_identity** out);
REED_API reed_status reed_identity_load(const char* path, reed_identity** out);
REED_API reed_status reed_identity_save(const reed_identity* identity, const char* path);
REED_API const char* reed_identity_user(const reed_identity* identity);
REED_API void reed_identity_free(reed_identity* identity);

typedef enum reed_chunking { REED_CHUNK_FIXED = 0, REED_CHUNK_RABIN = 1 } reed_chunking;
typedef enum reed_keying { REED_KEY_PER_CHUNK = 0, REED_KEY_SIMILARITY = 1 } reed_keying;
typedef enum reed_scheme { REED_SCHEME_BASIC = 0, REED_SCHEME_ENHANCED = 1 } reed_scheme;
typedef enum reed_revocation { REED_REVOKE_LAZY = 0, REED_REVOKE_ACTIVE = 1 } reed_revocation;

typedef struct reed_client_options {
  reed_chunking chunking;
  uint32_t fixed_size;
  uint32_t min_chunk;
  uint32_t avg_chunk;
  uint32_t max_chunk;
  uint64_t avg_segment;
  reed_keying keying;
  reed_scheme scheme;
  uint32_t workers;
  int pipelined;
} reed_client_options;

REED_API void reed_client_options_default(reed_client_options* options);

/* Connects to a dedup server and a key manager over TCP. */
REED_API reed_status reed_client_connect(const reed_identity* identity, const char* server_address,
                                         const char* manager_address,
                                         const reed_client_options* options, reed_client** out);
/* Talks to in-process objects, still through the frame codec. */
REED_API reed_status reed_client_local(const reed_identity* identity, reed_store* store,
                                       reed_manager* manager, const reed_client_options* options,
                                       reed_client** out);
REED_API void reed_client_free(reed_client* client);

REED_API reed_status reed_client_register(reed_client* client);

typedef struct reed_upload_report {
  uint8_t file_id[32];
  uint64_t bytes;
  uint64_t chunks;
  uint64_t segments;
  uint64_t key_requests;
  uint64_t key_round_trips;
  uint64_t packages_stored;
  uint64_t stub_file_bytes;
} reed_upload_report;

/* `users` lists the policy members; any one of them may read the file. */
REED_API reed_status reed_client_upload(reed_client* client, const uint8_t* data, size_t size,
                                        const char* pathname, const char* const* users,
                                        size_t user_count, reed_upload_report* report);
REED_API reed_status reed_client_upload_file(reed_client* client, const char* path,
                                             const char* const* users, size_t user_count,
                                             reed_upload_report* report);
REED_API reed_status reed_client_download(reed_client* client, const uint8_t file_id[32],
                                          reed_buffer* out);
REED_API reed_status reed_client_download_file(reed_client* client, const uint8_t file_id[32],
                                               const char* out_path);

typedef struct reed_rekey_report {
  uint32_t new_version;
  uint64_t stub_bytes_moved;
  uint64_t state_bytes_moved;
} reed_rekey_report;

REED_API reed_status reed_client_rekey(reed_client* client, const uint8_t file_id[32],
                                       const char* const* users, size_t user_count,
                                       reed_revocation mode, reed_rekey_report* report);
REED_API reed_status reed_client_stats(reed_client* client, reed_stats* out);

REED_API reed_status reed_file_id(const char* owner, const char* pathname, uint8_t out[32]);
/* 64 hex characters plus NUL. */
REED_API void reed_file_id_hex(const uint8_t file_id[32], char out[65]);
REED_API reed_status reed_file_id_parse(const char* hex, uint8_t out[32]);

/* ---- Trace replay ---- */

typedef struct reed_trace_gen_params {
  uint64_t seed;
  size_t snapshots;
  size_t chunks;
  double mutation_rate;
  uint32_t min_chunk;
  uint32_t max_chunk;
  size_t run_length;
} reed_trace_gen_params;

REED_API void reed_trace_gen_params_default(reed_trace_gen_params* params);
REED_API reed_status reed_trace_generate(const reed_trace_gen_params* params, reed_trace** out);
/* Path "-" reads stdin / writes stdout. */
REED_API reed_status reed_trace_load(const char* path, reed_trace** out);
REED_API reed_status reed_trace_save(const reed_trace* trace, const char* path);
REED_API size_t reed_trace_snapshot_count(const reed_trace* trace);
REED_API void reed_trace_free(reed_trace* trace);

typedef struct reed_replay_params {
  reed_keying keying;
  uint64_t avg_segment;
  uint32_t avg_chunk;
  reed_scheme scheme;
  int drop_zero_chunks;
} reed_replay_params;

typedef struct reed_snapshot_stats {
  uint64_t chunks;
  uint64_t segments;
  uint64_t key_requests;
  uint64_t logical;
  uint64_t physical;
  uint64_t stub;
  uint64_t total_logical;
  uint64_t total_physical;
  uint64_t total_stub;
  double saving;
} reed_snapshot_stats;

REED_API void reed_replay_params_default(reed_replay_params* params);
REED_API reed_status reed_trace_replay(const reed_trace* trace, const reed_replay_params* params,
                                       reed_report** out);
REED_API size_t reed_report_snapshot_count(const reed_report* report);
REED_API reed_status reed_report_snapshot(const reed_report* report, size_t index,
                                          reed_snapshot_stats* out);
REED_API reed_status reed_report_write_tsv(const reed_report* report, const char* path);
REED_API void reed_report_free(reed_report* report);

#ifdef __cplusplus
}
#endif

#endif /* REED_REED_H_ */

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
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    char tmpl[] = "/tmp/reed-capi-XXXXXX";
    ASSERT_NE(::mkdtemp(tmpl), nullptr);
    root_ = tmpl;
    ASSERT_EQ(reed_store_open((root_ / "data").c_str(), (root_ / "keys").c_str(), 0, 0, &store_),
              REED_OK);
    ASSERT_EQ(reed_manager_create(1024, 0, 0, &manager_), REED_OK);
    ASSERT_EQ(reed_identity_generate("alice", &alice_), REED_OK);
  }
  void TearDown() override {
    reed_identity_free(alice_);
    reed_manager_free(manager_);
    reed_store_close(store_);
    fs::remove_all(root_);
  }

  reed_client* LocalClient(const reed_identity* id) {
    reed_client_options opts;
    reed_client_options_default(&opts);
    reed_client* c = nullptr;
    EXPECT_EQ(reed_client_local(id, store_, manager_, &opts, &c), REED_OK);
    return c;
  }

  static std::vector<uint8_t> Data(size_t n) {
    std::mt19937_64 rng(n);
    std::vector<uint8_t> out(n);
    for (auto& b : out) b = static_cast<uint8_t>(rng());
    return out;
  }

  fs::path root_;
  reed_store* store_ = nullptr;
  reed_manager* manager_ = nullptr;
  reed_identity* alice_ = nullptr;
};

TEST_F(CApiTest, LocalRoundTrip) {
  reed_client* c = LocalClient(alice_);
  ASSERT_EQ(reed_client_register(c), REED_OK);
  auto data = Data(200000);
  const char* users[] = {"alice"};
  reed_upload_report report;
  ASSERT_EQ(reed_client_upload(c, data.data(), data.size(), "/a", users, 1, &report), REED_OK);
  EXPECT_EQ(report.bytes, data.size());
  uint8_t expected_id[32];
  ASSERT_EQ(reed_file_id("alice", "/a", expected_id), REED_OK);
  EXPECT_EQ(std::memcmp(report.file_id, expected_id, 32), 0);

  reed_buffer out{};
  ASSERT_EQ(reed_client_download(c, report.file_id, &out), REED_OK);
  ASSERT_EQ(out.size, data.size());
  EXPECT_EQ(std::memcmp(out.data, data.data(), data.size()), 0);
  reed_buffer_free(&out);
  EXPECT_EQ(out.data, nullptr);

  reed_rekey_report rk;
  ASSERT_EQ(reed_client_rekey(c, report.file_id, users, 1, REED_REVOKE_ACTIVE, &rk), REED_OK);
  EXPECT_EQ(rk.new_version, 1u);

  reed_stats a, b;
  ASSERT_EQ(reed_client_stats(c, &a), REED_OK);
  ASSERT_EQ(reed_store_stats(store_, &b), REED_OK);
  EXPECT_EQ(a.physical_bytes, b.physical_bytes);
  EXPECT_GT(b.containers, 0u);
  reed_client_free(c);
}

TEST_F(CApiTest, ErrorsCarryCodesAndMessages) {
  reed_client* c = LocalClient(alice_);
  uint8_t fid[32] = {0};
  reed_buffer out{};
  EXPECT_EQ(reed_client_download(c, fid, &out), REED_NOT_FOUND);
  EXPECT_STRNE(reed_last_error(), "");
  EXPECT_STREQ(reed_status_name(REED_NOT_FOUND), "not found");

  auto data = Data(10);
  EXPECT_EQ(reed_client_upload(c, data.data(), data.size(), "/x", nullptr, 0, nullptr),
            REED_POLICY_EMPTY);
  EXPECT_EQ(reed_file_id_parse("zz", fid), REED_INVALID_ARGUMENT);
  reed_client_free(c);

  reed_store* other = nullptr;
  EXPECT_EQ(reed_store_open(root_.c_str(), root_.c_str(), 0, 0, &other), REED_INVALID_ARGUMENT);
  EXPECT_EQ(other, nullptr);
}

TEST_F(CApiTest, FileIdHex) {
  uint8_t id[32];
  for (int i = 0; i < 32; ++i) id[i] = static_cast<uint8_t>(i * 7);
  char hex[65];
  reed_file_id_hex(id, hex);
  EXPECT_EQ(std::strlen(hex), 64u);
  EXPECT_EQ(std::string(hex, 6), "00070e");
  uint8_t back[32];
  ASSERT_EQ(reed_file_id_parse(hex, back), REED_OK);
  EXPECT_EQ(std::memcmp(id, back, 32), 0);
}

TEST_F(CApiTest, IdentityAndManagerPersistence) {
  auto id_path = root_ / "alice.json";
  ASSERT_EQ(reed_identity_save(alice_, id_path.c_str()), REED_OK);
  EXPECT_EQ(fs::status(id_path).permissions() & fs::perms::group_all, fs::perms::none);
  reed_identity* loaded = nullptr;
  ASSERT_EQ(reed_identity_load(id_path.c_str(), &loaded), REED_OK);
  EXPECT_STREQ(reed_identity_user(loaded), "alice");
  reed_identity_free(loaded);

  auto pem = root_ / "manager.pem";
  ASSERT_EQ(reed_manager_save(manager_, pem.c_str()), REED_OK);
  reed_manager* m = nullptr;
  ASSERT_EQ(reed_manager_load(pem.c_str(), 0, 0, &m), REED_OK);
  reed_manager_free(m);
}

TEST_F(CApiTest, ServiceOverTcp) {
  reed_service* svc = nullptr;
  ASSERT_EQ(reed_service_start("127.0.0.1:0", store_, manager_, &svc), REED_OK);
  std::string addr = "127.0.0.1:" + std::to_string(reed_service_port(svc));
  reed_client_options opts;
  reed_client_options_default(&opts);
  reed_client* c = nullptr;
  ASSERT_EQ(reed_client_connect(alice_, addr.c_str(), addr.c_str(), &opts, &c), REED_OK);
  ASSERT_EQ(reed_client_register(c), REED_OK);
  auto data = Data(70000);
  const char* users[] = {"alice"};
  reed_upload_report report;
  ASSERT_EQ(reed_client_upload(c, data.data(), data.size(), "/tcp", users, 1, &report), REED_OK);
  reed_buffer out{};
  ASSERT_EQ(reed_client_download(c, report.file_id, &out), REED_OK);
  EXPECT_EQ(std::vector<uint8_t>(out.data, out.data + out.size), data);
  reed_buffer_free(&out);
  reed_client_free(c);
  reed_service_stop(svc);

  reed_client* dead = nullptr;
  EXPECT_EQ(reed_client_connect(alice_, addr.c_str(), addr.c_str(), &opts, &dead), REED_TRANSPORT);
}

TEST_F(CApiTest, TraceGenerateAndReplay) {
  reed_trace_gen_params gp;
  reed_trace_gen_params_default(&gp);
  gp.snapshots = 2;
  gp.chunks = 200;
  gp.mutation_rate = 0.1;
  reed_trace* trace = nullptr;
  ASSERT_EQ(reed_trace_generate(&gp, &trace), REED_OK);
  EXPECT_EQ(reed_trace_snapshot_count(trace), 2u);
  auto path = root_ / "t.trace";
  ASSERT_EQ(reed_trace_save(trace, path.c_str()), REED_OK);
  reed_trace* loaded = nullptr;
  ASSERT_EQ(reed_trace_load(path.c_str(), &loaded), REED_OK);

  reed_replay_params rp;
  reed_replay_params_default(&rp);
  reed_report* report = nullptr;
  ASSERT_EQ(reed_trace_replay(loaded, &rp, &report), REED_OK);
  ASSERT_EQ(reed_report_snapshot_count(report), 2u);
  reed_snapshot_stats s;
  ASSERT_EQ(reed_report_snapshot(report, 1, &s), REED_OK);
  EXPECT_EQ(s.chunks, 200u);
  EXPECT_GT(s.saving, 0.0);
  EXPECT_EQ(reed_report_snapshot(report, 2, &s), REED_INVALID_ARGUMENT);
  ASSERT_EQ(reed_report_write_tsv(report, (root_ / "r.tsv").c_str()), REED_OK);
  EXPECT_TRUE(fs::exists(root_ / "r.tsv"));
  reed_report_free(report);
  reed_trace_free(loaded);
  reed_trace_free(trace);

  std::FILE* f = std::fopen((root_ / "bad.trace").c_str(), "w");
  std::fputs("nothex\t5\n", f);
  std::fclose(f);
  reed_trace* bad = nullptr;
  EXPECT_EQ(reed_trace_load((root_ / "bad.trace").c_str(), &bad), REED_TRACE_PARSE);
  EXPECT_NE(std::string(reed_last_error()).find("line 1"), std::string::npos);
}

}  // namespace

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

#include "store.h"

#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "primitives.h"
#include "test_util.h"

namespace reed {
namespace {

namespace fs = std::filesystem;
using testing::RandomBytes;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

struct Pkg {
  Bytes data;
  Digest fp;
  explicit Pkg(Bytes d) : data(std::move(d)), fp(Sha256(data)) {}
  PackageRef ref() const { return {fp, data}; }
};

std::vector<Pkg> MakePackages(uint64_t seed, size_t n, size_t size) {
  std::vector<Pkg> out;
  for (size_t i = 0; i < n; ++i) out.emplace_back(RandomBytes(seed * 1000 + i, size));
  return out;
}

std::vector<PackageRef> Refs(const std::vector<Pkg>& p) {
  std::vector<PackageRef> out;
  for (const auto& x : p) out.push_back(x.ref());
  return out;
}

class StoreTest : public ::testing::Test {
 protected:
  StoreConfig Config(uint64_t container = 4096) {
    return StoreConfig{tmp_ / "data", tmp_ / "keys", container, true};
  }
  TempDir tmp_;
};

TEST_F(StoreTest, DeduplicatesAcrossAndWithinBatches) {
  DedupStore store(Config());
  auto pkgs = MakePackages(1, 10, 500);
  auto refs = Refs(pkgs);
  refs.push_back(pkgs[0].ref());
  EXPECT_EQ(store.PutPackages(refs), 10u);
  EXPECT_EQ(store.PutPackages(Refs(pkgs)), 0u);
  StoreStats s = store.Stats();
  EXPECT_EQ(s.physical_bytes, 5000u);
  EXPECT_EQ(s.logical_bytes, 500u * 21);
  EXPECT_EQ(s.index_entries, 10u);
  auto query = store.DedupQuery(std::vector<Digest>{pkgs[3].fp, Sha256(AsBytes("nope"))});
  EXPECT_EQ(query, (std::vector<bool>{true, false}));
}

TEST_F(StoreTest, MismatchRejectsWholeBatch) {
  DedupStore store(Config());
  auto pkgs = MakePackages(2, 3, 100);
  auto refs = Refs(pkgs);
  refs[2].fingerprint = pkgs[0].fp;
  EXPECT_EQ(CodeOf([&] { store.PutPackages(refs); }), ErrorCode::kFingerprintMismatch);
  EXPECT_EQ(store.Stats().physical_bytes, 0u);
  EXPECT_EQ(store.Stats().index_entries, 0u);
}

TEST_F(StoreTest, ContainersRotateAtCapacity) {
  DedupStore store(Config(4096));
  auto pkgs = MakePackages(3, 10, 1000);
  store.PutPackages(Refs(pkgs));
  // four 1000-byte packages fit per 4096-byte container
  EXPECT_EQ(store.Stats().containers, 3u);
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(tmp_ / "data" / "containers")) {
    EXPECT_LE(fs::file_size(e.path()), 4096u);
    ++files;
  }
  EXPECT_EQ(files, 3u);
  std::vector<Digest> want{pkgs[9].fp, pkgs[0].fp, pkgs[5].fp, pkgs[0].fp};
  auto got = store.GetPackages(want);
  EXPECT_EQ(got[0], pkgs[9].data);
  EXPECT_EQ(got[1], pkgs[0].data);
  EXPECT_EQ(got[2], pkgs[5].data);
  EXPECT_EQ(got[3], pkgs[0].data);
  EXPECT_EQ(CodeOf([&] { store.GetPackages(std::vector<Digest>{Digest{}}); }), ErrorCode::kNotFound);
}

TEST_F(StoreTest, OversizedPackageGetsOwnContainer) {
  DedupStore store(Config(1000));
  auto pkgs = MakePackages(4, 3, 1500);
  store.PutPackages(Refs(pkgs));
  EXPECT_EQ(store.Stats().containers, 3u);
  EXPECT_EQ(store.GetPackages(std::vector<Digest>{pkgs[1].fp})[0], pkgs[1].data);
}

TEST_F(StoreTest, SurvivesRestart) {
  auto pkgs = MakePackages(5, 12, 700);
  Digest before;
  StoreStats stats;
  {
    DedupStore store(Config());
    store.PutPackages(Refs(pkgs));
    store.PutRecipe(pkgs[0].fp, AsBytes("recipe"));
    store.PutStub(pkgs[0].fp, 0, AsBytes("stub-v0"));
    store.PutState(pkgs[0].fp, std::nullopt, 0, AsBytes("state-v0"));
    stats = store.Stats();
    before = store.ContainerDigest();
  }
  DedupStore store(Config());
  EXPECT_EQ(store.Stats(), stats);
  EXPECT_EQ(store.ContainerDigest(), before);
  EXPECT_EQ(store.GetPackages(std::vector<Digest>{pkgs[7].fp})[0], pkgs[7].data);
  EXPECT_EQ(store.PutPackages(Refs(pkgs)), 0u);
  EXPECT_EQ(store.ContainerDigest(), before);
  EXPECT_EQ(store.GetRecipe(pkgs[0].fp), Bytes(AsBytes("recipe").begin(), AsBytes("recipe").end()));
  EXPECT_EQ(store.GetState(pkgs[0].fp).version, 0u);

  // New data after restart lands in a new container; old ones stay sealed.
  auto more = MakePackages(6, 2, 700);
  store.PutPackages(Refs(more));
  EXPECT_EQ(store.GetPackages(std::vector<Digest>{more[1].fp})[0], more[1].data);
}

TEST_F(StoreTest, TornIndexTailIsDropped) {
  auto pkgs = MakePackages(7, 4, 300);
  {
    DedupStore store(Config());
    store.PutPackages(Refs(pkgs));
  }
  {
    std::ofstream log(tmp_ / "data" / "index.log", std::ios::binary | std::ios::app);
    log.write("garbage", 7);
  }
  DedupStore store(Config());
  EXPECT_EQ(store.Stats().index_entries, 4u);
  EXPECT_EQ(fs::file_size(tmp_ / "data" / "index.log"), 4u * 44);
  auto extra = MakePackages(8, 1, 300);
  store.PutPackages(Refs(extra));
  DedupStore reopened(Config());
  EXPECT_EQ(reopened.Stats().index_entries, 5u);
}

TEST_F(StoreTest, StateCompareAndSet) {
  DedupStore store(Config());
  Digest fid = Sha256(AsBytes("f"));
  EXPECT_EQ(CodeOf([&] { store.GetState(fid); }), ErrorCode::kNotFound);
  store.PutState(fid, std::nullopt, 0, AsBytes("s0"));
  EXPECT_EQ(CodeOf([&] { store.PutState(fid, std::nullopt, 0, AsBytes("again")); }),
            ErrorCode::kVersionConflict);
  EXPECT_EQ(CodeOf([&] { store.PutState(fid, 3, 4, AsBytes("stale")); }), ErrorCode::kVersionConflict);
  EXPECT_EQ(CodeOf([&] { store.PutState(fid, 0, 0, AsBytes("no advance")); }),
            ErrorCode::kVersionConflict);
  store.PutState(fid, 0, 1, AsBytes("s1"));
  VersionedBlob s = store.GetState(fid);
  EXPECT_EQ(s.version, 1u);
  EXPECT_EQ(s.data, Bytes(AsBytes("s1").begin(), AsBytes("s1").end()));
}

TEST_F(StoreTest, StubVersionLookup) {
  DedupStore store(Config());
  Digest fid = Sha256(AsBytes("f"));
  store.PutStub(fid, 0, Bytes(92, 0));
  store.PutStub(fid, 3, Bytes(92, 3));
  EXPECT_EQ(store.GetStub(fid, 0).version, 0u);
  EXPECT_EQ(store.GetStub(fid, 2).version, 0u);
  EXPECT_EQ(store.GetStub(fid, 3).version, 3u);
  EXPECT_EQ(store.GetStub(fid, 100).data, Bytes(92, 3));
  EXPECT_EQ(store.Stats().stub_bytes, 184u);
  EXPECT_EQ(CodeOf([&] { store.GetStub(Sha256(AsBytes("g")), 5); }), ErrorCode::kNotFound);
}

TEST_F(StoreTest, KeyMaterialOnlyUnderKeyRoot) {
  DedupStore store(Config());
  Digest fid = Sha256(AsBytes("f"));
  Bytes state = RandomBytes(9, 200);
  store.PutState(fid, std::nullopt, 0, state);
  store.PutUser("alice", AsBytes("alice-public-record"));
  store.PutStub(fid, 0, Bytes(92, 1));
  store.PutRecipe(fid, Bytes(10, 2));
  std::string needle(state.begin(), state.end());
  for (const auto& e : fs::recursive_directory_iterator(tmp_ / "data")) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content.find(needle), std::string::npos) << e.path();
    EXPECT_EQ(content.find("alice-public-record"), std::string::npos) << e.path();
  }
  EXPECT_TRUE(fs::exists(tmp_ / "keys" / "states"));
}

TEST_F(StoreTest, RejectsSharedRoot) {
  StoreConfig c{tmp_ / "same", tmp_ / "same", 4096, false};
  EXPECT_EQ(CodeOf([&] { DedupStore s(c); }), ErrorCode::kInvalidArgument);
}

TEST_F(StoreTest, SavingLaw) {
  DedupStore store(Config(1 << 20));
  auto pkgs = MakePackages(10, 8, 1000);
  store.PutPackages(Refs(pkgs));
  store.PutPackages(Refs(pkgs));
  store.PutStub(Sha256(AsBytes("f")), 0, Bytes(8 * 64 + 28, 0));
  StoreStats s = store.Stats();
  EXPECT_DOUBLE_EQ(s.saving(), 1.0 - (8000.0 + 540.0) / 16000.0);
  EXPECT_DOUBLE_EQ(StoreStats{}.saving(), 0.0);
}

TEST_F(StoreTest, ConcurrentOverlappingPuts) {
  DedupStore store(Config(64 * 1024));
  auto pkgs = MakePackages(11, 200, 512);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (size_t i = 0; i < pkgs.size(); i += 10) {
        size_t start = (i + static_cast<size_t>(t) * 50) % pkgs.size();
        std::vector<PackageRef> batch;
        for (size_t j = 0; j < 10; ++j) batch.push_back(pkgs[(start + j) % pkgs.size()].ref());
        store.PutPackages(batch);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(store.Stats().index_entries, 200u);
  EXPECT_EQ(store.Stats().physical_bytes, 200u * 512);
  std::vector<Digest> all;
  for (const auto& p : pkgs) all.push_back(p.fp);
  auto got = store.GetPackages(all);
  for (size_t i = 0; i < pkgs.size(); ++i) ASSERT_EQ(got[i], pkgs[i].data);
}

}  // namespace
}  // namespace reed

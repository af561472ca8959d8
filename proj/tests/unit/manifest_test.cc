//
// Copyright 2026 The Envre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <gtest/gtest.h>

#include <cstdlib>

#include "envre/error.h"
#include "envre/manifest.h"
#include "support/temp_dir.h"

namespace envre {
namespace {

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Sha256Test, FileDigestMatchesBytes) {
  testing::TempDir dir;
  testing::WriteFile(dir.File("a.txt"), "abc");
  EXPECT_EQ(Sha256File(dir.File("a.txt")), Sha256Hex("abc"));
  EXPECT_THROW(Sha256File(dir.File("missing")), Error);
}

TEST(RunManifestTest, SerializesEveryField) {
  testing::TempDir dir;
  testing::WriteFile(dir.File("in.json"), "[]");
  testing::WriteFile(dir.File("out.json"), "{}");
  RunManifest m;
  m.command = "perturb";
  m.arguments = {"--seeds", "2"};
  m.root_seed = 7;
  m.seeds = {1, 2};
  m.AddInput(dir.File("in.json"));
  m.AddOutput(dir.File("out.json"));
  m.tool_version = ToolVersion();
  m.timestamp = "2026-01-01T00:00:00Z";
  const std::string json = m.ToJson();
  for (const char* key : {"\"command\"", "\"arguments\"", "\"rootSeed\": 7", "\"seeds\"", "\"inputs\"",
                          "\"outputs\"", "\"toolVersion\"", "\"timestamp\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
  EXPECT_NE(json.find(Sha256Hex("[]")), std::string::npos);
  EXPECT_NE(json.find(Sha256Hex("{}")), std::string::npos);
  EXPECT_FALSE(ToolVersion().empty());
}

TEST(RunManifestTest, TimestampHonoursSourceDateEpoch) {
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);
  EXPECT_EQ(CurrentTimestamp(), "1970-01-01T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(CurrentTimestamp().size(), 20u);
}

}  // namespace
}  // namespace envre

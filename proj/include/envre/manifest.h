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

// Reproducibility manifest written next to every artifact a mutating
// command produces.

#ifndef ENVRE_MANIFEST_H_
#define ENVRE_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace envre {

std::string Sha256Hex(std::string_view bytes);
// Throws Error(kValidation) when the file cannot be read.
std::string Sha256File(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::optional<std::uint64_t> root_seed;
  std::vector<std::uint64_t> seeds;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string tool_version;
  // UTC, ISO 8601. Taken from SOURCE_DATE_EPOCH when that is set.
  std::string timestamp;

  void AddInput(const std::filesystem::path& path);
  void AddOutput(const std::filesystem::path& path);
  std::string ToJson() const;
};

std::string CurrentTimestamp();
std::string ToolVersion();

}  // namespace envre

#endif  // ENVRE_MANIFEST_H_

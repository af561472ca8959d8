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

#include "envre/manifest.h"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>

#include "envre/error.h"
#include "json.hpp"

namespace envre {
namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::kInternal, "SHA-256 initialisation failed");
    }
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx); }

  void Update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx, data, size) != 1) {
      throw Error(ErrorCode::kInternal, "SHA-256 update failed");
    }
  }

  std::string HexDigest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int size = 0;
    if (EVP_DigestFinal_ex(ctx, digest.data(), &size) != 1) {
      throw Error(ErrorCode::kInternal, "SHA-256 finalisation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < size; ++i) {
      hex += kHex[digest[i] >> 4];
      hex += kHex[digest[i] & 0xF];
    }
    return hex;
  }

  EVP_MD_CTX* ctx;
};

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  DigestContext digest;
  digest.Update(bytes.data(), bytes.size());
  return digest.HexDigest();
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read " + path.string());
  DigestContext digest;
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    digest.Update(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return digest.HexDigest();
}

void RunManifest::AddInput(const std::filesystem::path& path) {
  inputs.push_back({path.string(), Sha256File(path)});
}

void RunManifest::AddOutput(const std::filesystem::path& path) {
  outputs.push_back({path.string(), Sha256File(path)});
}

std::string RunManifest::ToJson() const {
  nlohmann::ordered_json out;
  out["command"] = command;
  out["arguments"] = arguments;
  out["rootSeed"] = root_seed ? nlohmann::ordered_json(*root_seed) : nullptr;
  out["seeds"] = seeds;
  auto digests = [](const std::vector<FileDigest>& files) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const FileDigest& f : files) {
      list.push_back({{"path", f.path}, {"sha256", f.sha256}});
    }
    return list;
  };
  out["inputs"] = digests(inputs);
  out["outputs"] = digests(outputs);
  out["toolVersion"] = tool_version;
  out["timestamp"] = timestamp;
  return out.dump(2) + "\n";
}

std::string CurrentTimestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr) {
    char* end = nullptr;
    const long long value = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') now = static_cast<std::time_t>(value);
  }
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string ToolVersion() { return ENVRE_VERSION; }

}  // namespace envre

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

// Live knowledge-base transport against the public Wikidata endpoints.

#ifndef ENVRE_KB_WIKIDATA_H_
#define ENVRE_KB_WIKIDATA_H_

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envre/kb.h"

namespace envre {

struct WikidataOptions {
  std::string api_host = "www.wikidata.org";
  std::string sparql_host = "query.wikidata.org";
  std::string user_agent = "envre/0.1 (entity renaming benchmark builder)";
  std::chrono::milliseconds min_interval{100};
  std::chrono::milliseconds initial_backoff{1000};
  int max_retries = 5;
};

class WikidataBackend : public KbBackend {
 public:
  explicit WikidataBackend(WikidataOptions options = {});

  std::optional<KbItem> FetchItem(std::string_view id) override;
  std::vector<KbItem> FetchMembers(std::string_view type_id,
                                   std::size_t limit) override;
  std::optional<std::int64_t> FetchPopularity(std::string_view id) override;

 private:
  // GET with rate limiting and exponential backoff on 429/5xx.
  std::string Get(const std::string& host, const std::string& path);
  std::string Sparql(const std::string& query);

  WikidataOptions options_;
  std::mutex rate_mu_;
  std::chrono::steady_clock::time_point last_request_{};
};

// Response decoding, separated from transport so it can be tested offline.
std::optional<KbItem> ParseEntityResponse(std::string_view body,
                                          std::string_view id);
std::vector<KbItem> ParseMembersResponse(std::string_view body);
std::optional<std::int64_t> ParseCountResponse(std::string_view body);

std::string MembersQuery(std::string_view type_id, std::size_t limit);
std::string PopularityQuery(std::string_view id);

}  // namespace envre

#endif  // ENVRE_KB_WIKIDATA_H_

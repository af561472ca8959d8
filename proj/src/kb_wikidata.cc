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

#include "envre/kb_wikidata.h"

#include <thread>
#include <utility>

#include "envre/error.h"
#include "json.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace envre {
namespace {

using nlohmann::json;

constexpr char kAliasSeparator[] = "\x1f";

json ParseBody(std::string_view body, std::string_view what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kTransient, std::string(what) +
                                           " response malformed at byte " +
                                           std::to_string(e.byte));
  }
}

std::string EntityIdFromUri(const std::string& uri) {
  auto slash = uri.rfind('/');
  return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

}  // namespace

WikidataBackend::WikidataBackend(WikidataOptions options)
    : options_(std::move(options)) {}

std::string WikidataBackend::Get(const std::string& host,
                                 const std::string& path) {
  std::chrono::milliseconds backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    {
      std::lock_guard lock(rate_mu_);
      auto next = last_request_ + options_.min_interval;
      auto now = std::chrono::steady_clock::now();
      if (now < next) std::this_thread::sleep_for(next - now);
      last_request_ = std::chrono::steady_clock::now();
    }
    httplib::SSLClient client(host);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(60));
    httplib::Headers headers = {{"User-Agent", options_.user_agent},
                                {"Accept", "application/json"}};
    httplib::Result res = client.Get(path, headers);
    if (res && res->status == 200) return res->body;
    if (res && res->status != 429 && res->status < 500) {
      throw Error(ErrorCode::kTransient, host + path + " returned HTTP " +
                                             std::to_string(res->status));
    }
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : httplib::to_string(res.error());
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
  throw Error(ErrorCode::kTransient, host + " unreachable after " +
                                         std::to_string(options_.max_retries) +
                                         " retries: " + last_error);
}

std::string WikidataBackend::Sparql(const std::string& query) {
  return Get(options_.sparql_host,
             "/sparql?format=json&query=" + httplib::detail::encode_url(query));
}

std::optional<KbItem> WikidataBackend::FetchItem(std::string_view id) {
  const std::string path =
      "/w/api.php?action=wbgetentities&format=json&languages=en"
      "&props=labels%7Caliases%7Cclaims&ids=" +
      std::string(id);
  return ParseEntityResponse(Get(options_.api_host, path), id);
}

std::vector<KbItem> WikidataBackend::FetchMembers(std::string_view type_id,
                                                  std::size_t limit) {
  return ParseMembersResponse(Sparql(MembersQuery(type_id, limit)));
}

std::optional<std::int64_t> WikidataBackend::FetchPopularity(
    std::string_view id) {
  return ParseCountResponse(Sparql(PopularityQuery(id)));
}

std::string MembersQuery(std::string_view type_id, std::size_t limit) {
  const std::string type(type_id);
  return "SELECT ?item ?label (GROUP_CONCAT(DISTINCT ?alias; separator=\"" +
         std::string(kAliasSeparator) +
         "\") AS ?aliases) WHERE { "
         "?item wdt:P31 wd:" + type + " . "
         "?item rdfs:label ?label . FILTER(LANG(?label) = \"en\") "
         "OPTIONAL { ?item skos:altLabel ?alias . FILTER(LANG(?alias) = \"en\") } "
         "} GROUP BY ?item ?label LIMIT " + std::to_string(limit);
}

std::string PopularityQuery(std::string_view id) {
  const std::string item(id);
  return "SELECT (COUNT(*) AS ?count) WHERE { "
         "{ wd:" + item + " ?p ?o . ?prop wikibase:directClaim ?p . } UNION "
         "{ ?s ?p wd:" + item + " . ?prop wikibase:directClaim ?p . } }";
}

std::optional<KbItem> ParseEntityResponse(std::string_view body,
                                          std::string_view id) {
  json root = ParseBody(body, "wbgetentities");
  const json& entities = root.value("entities", json::object());
  auto it = entities.find(std::string(id));
  if (it == entities.end() || it->contains("missing")) return std::nullopt;
  const json& entity = *it;
  KbItem item;
  item.id = std::string(id);
  const json labels = entity.value("labels", json::object());
  if (labels.contains("en")) {
    item.label = labels["en"].value("value", std::string());
  }
  if (item.label.empty()) return std::nullopt;
  const json aliases = entity.value("aliases", json::object());
  if (aliases.contains("en")) {
    for (const json& a : aliases["en"]) {
      item.aliases.push_back(a.value("value", std::string()));
    }
  }
  const json claims = entity.value("claims", json::object());
  if (claims.contains("P31")) {
    for (json claim : claims["P31"]) {
      const json value = claim["mainsnak"]["datavalue"]["value"];
      if (value.is_object() && value.contains("id")) {
        item.instance_of.push_back(value["id"].get<std::string>());
      }
    }
  }
  return NormalizeItem(std::move(item));
}

std::vector<KbItem> ParseMembersResponse(std::string_view body) {
  json root = ParseBody(body, "sparql");
  std::vector<KbItem> out;
  for (json row : root["results"]["bindings"]) {
    if (!row.is_object() || !row.contains("item") || !row.contains("label")) {
      continue;
    }
    KbItem item;
    item.id = EntityIdFromUri(row["item"].value("value", std::string()));
    item.label = row["label"].value("value", std::string());
    if (row.contains("aliases")) {
      const std::string joined = row["aliases"].value("value", std::string());
      std::size_t start = 0;
      while (start <= joined.size()) {
        std::size_t end = joined.find(kAliasSeparator, start);
        if (end == std::string::npos) end = joined.size();
        if (end > start) item.aliases.push_back(joined.substr(start, end - start));
        start = end + 1;
      }
    }
    if (IsWellFormedId(item.id) && !item.label.empty()) {
      out.push_back(NormalizeItem(std::move(item)));
    }
  }
  return out;
}

std::optional<std::int64_t> ParseCountResponse(std::string_view body) {
  json root = ParseBody(body, "sparql");
  const json& bindings = root["results"]["bindings"];
  if (!bindings.is_array() || bindings.empty()) return std::nullopt;
  if (!bindings[0].is_object() || !bindings[0].contains("count")) {
    return std::nullopt;
  }
  const std::string value = bindings[0]["count"].value("value", std::string());
  if (value.empty()) return std::nullopt;
  return std::stoll(value);
}

}  // namespace envre

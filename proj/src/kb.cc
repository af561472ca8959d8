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

#include "envre/kb.h"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <utility>

#include "envre/error.h"
#include "envre/text_util.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> StringList(const json& node, const std::string& ctx) {
  std::vector<std::string> out;
  if (node.is_null()) return out;
  if (!node.is_array()) throw Error(ErrorCode::kCache, ctx + ": expected array");
  for (const json& v : node) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kCache, ctx + ": expected string elements");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string ItemLine(const KbItem& item) {
  ordered_json line;
  line["kind"] = "item";
  line["id"] = item.id;
  line["label"] = item.label;
  line["aliases"] = item.aliases;
  line["instanceOf"] = item.instance_of;
  return line.dump();
}

// Releases an in-flight slot on scope exit.
class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

bool IsWellFormedId(std::string_view id) {
  if (id.size() < 2 || id.front() != 'Q') return false;
  return std::all_of(id.begin() + 1, id.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::uint64_t NumericId(std::string_view id) {
  if (!IsWellFormedId(id)) {
    throw Error(ErrorCode::kValidation,
                "malformed knowledge-base id '" + std::string(id) + "'");
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), value);
  if (ec != std::errc()) {
    throw Error(ErrorCode::kValidation,
                "knowledge-base id out of range '" + std::string(id) + "'");
  }
  return value;
}

KbItem NormalizeItem(KbItem item) {
  item.label = NormalizeWhitespace(item.label);
  std::set<std::string> seen = {FoldCase(item.label)};
  std::vector<std::string> aliases;
  for (const std::string& raw : item.aliases) {
    std::string alias = NormalizeWhitespace(raw);
    if (alias.empty()) continue;
    if (seen.insert(FoldCase(alias)).second) aliases.push_back(alias);
  }
  item.aliases = std::move(aliases);
  return item;
}

// ---------------------------------------------------------------------------
// KbCache

KbCache::KbCache(const std::filesystem::path& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kCache, "cannot read " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (Trim(line).empty()) continue;
      LoadLine(line, number);
    }
  }
  log_.open(path, std::ios::binary | std::ios::app);
  if (!log_) throw Error(ErrorCode::kCache, "cannot append to " + path.string());
}

void KbCache::LoadLine(std::string_view line, std::size_t line_number) {
  const std::string ctx =
      path_.string() + ":" + std::to_string(line_number);
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kCache, ctx + ": malformed record at byte " +
                                       std::to_string(e.byte));
  }
  if (!record.is_object() || !record.contains("kind") ||
      !record["kind"].is_string()) {
    throw Error(ErrorCode::kCache, ctx + ": record has no 'kind'");
  }
  const std::string kind = record["kind"].get<std::string>();
  std::string id = record.value("id", std::string());
  if (kind == "item") {
    if (!IsWellFormedId(id)) {
      throw Error(ErrorCode::kCache, ctx + ": malformed id '" + id + "'");
    }
    KbItem item;
    item.id = std::move(id);
    item.label = record.value("label", std::string());
    if (NormalizeWhitespace(item.label).empty()) {
      throw Error(ErrorCode::kCache, ctx + ": empty label");
    }
    item.aliases = StringList(record.value("aliases", json()), ctx);
    item.instance_of = StringList(record.value("instanceOf", json()), ctx);
    StoreItemLocked(NormalizeItem(std::move(item)));
  } else if (kind == "popularity") {
    if (!IsWellFormedId(id) || !record.contains("count") ||
        !record["count"].is_number_integer() ||
        record["count"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::kCache, ctx + ": malformed popularity record");
    }
    popularity_[id] = record["count"].get<std::int64_t>();
  } else if (kind == "scan") {
    scanned_types_.insert(record.value("type", std::string()));
  } else {
    throw Error(ErrorCode::kCache, ctx + ": unknown kind '" + kind + "'");
  }
}

void KbCache::StoreItemLocked(KbItem item) {
  const std::uint64_t numeric = NumericId(item.id);
  if (auto it = items_.find(item.id); it != items_.end()) {
    for (const std::string& type : it->second.instance_of) {
      if (auto m = members_.find(type); m != members_.end()) {
        m->second.erase(numeric);
      }
    }
  }
  for (const std::string& type : item.instance_of) {
    members_[type][numeric] = item.id;
  }
  std::string id = item.id;
  items_.insert_or_assign(std::move(id), std::move(item));
}

void KbCache::AppendLocked(const std::string& line) {
  if (!log_.is_open()) return;
  log_.write(line.data(), static_cast<std::streamsize>(line.size()));
  log_.put('\n');
  log_.flush();
  if (!log_) throw Error(ErrorCode::kCache, "write to " + path_.string() + " failed");
}

std::optional<KbItem> KbCache::FindItem(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = items_.find(id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> KbCache::FindPopularity(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = popularity_.find(id);
  if (it == popularity_.end()) return std::nullopt;
  return it->second;
}

bool KbCache::HasMemberScan(std::string_view type_id) const {
  std::shared_lock lock(mu_);
  return scanned_types_.find(type_id) != scanned_types_.end();
}

std::vector<KbItem> KbCache::MembersOf(std::string_view type_id,
                                       std::size_t limit) const {
  std::shared_lock lock(mu_);
  std::vector<KbItem> out;
  auto it = members_.find(type_id);
  if (it == members_.end()) return out;
  for (const auto& [numeric, id] : it->second) {
    if (out.size() >= limit) break;
    out.push_back(items_.find(id)->second);
  }
  return out;
}

void KbCache::PutItem(const KbItem& raw) {
  if (!IsWellFormedId(raw.id)) {
    throw Error(ErrorCode::kValidation, "malformed id '" + raw.id + "'");
  }
  KbItem item = NormalizeItem(raw);
  std::unique_lock lock(mu_);
  AppendLocked(ItemLine(item));
  StoreItemLocked(std::move(item));
}

void KbCache::PutMember(const KbItem& raw, const std::string& type_id) {
  KbItem item = NormalizeItem(raw);
  std::unique_lock lock(mu_);
  if (auto it = items_.find(item.id); it != items_.end()) {
    const auto& types = it->second.instance_of;
    if (std::find(types.begin(), types.end(), type_id) != types.end()) return;
    KbItem merged = it->second;
    merged.instance_of.push_back(type_id);
    item = std::move(merged);
  } else if (std::find(item.instance_of.begin(), item.instance_of.end(),
                       type_id) == item.instance_of.end()) {
    item.instance_of.push_back(type_id);
  }
  AppendLocked(ItemLine(item));
  StoreItemLocked(std::move(item));
}

void KbCache::PutPopularity(const std::string& id, std::int64_t count) {
  ordered_json line;
  line["kind"] = "popularity";
  line["id"] = id;
  line["count"] = count;
  std::unique_lock lock(mu_);
  AppendLocked(line.dump());
  popularity_[id] = count;
}

void KbCache::MarkMemberScan(const std::string& type_id) {
  ordered_json line;
  line["kind"] = "scan";
  line["type"] = type_id;
  std::unique_lock lock(mu_);
  AppendLocked(line.dump());
  scanned_types_.insert(type_id);
}

std::size_t KbCache::item_count() const {
  std::shared_lock lock(mu_);
  return items_.size();
}

// ---------------------------------------------------------------------------
// KbClient

KbClient::KbClient(KbCache& cache, KbClientOptions options,
                   std::unique_ptr<KbBackend> backend)
    : cache_(cache),
      options_(options),
      backend_(std::move(backend)),
      in_flight_(std::max(1, options.max_in_flight)) {
  if (!options_.offline && backend_ == nullptr) {
    throw Error(ErrorCode::kInternal, "live mode requires a backend");
  }
}

KbBackend& KbClient::Live() {
  ++network_calls_;
  return *backend_;
}

std::vector<std::string> KbClient::FetchType(std::string_view id) {
  if (!IsWellFormedId(id)) {
    throw Error(ErrorCode::kValidation,
                "malformed knowledge-base id '" + std::string(id) + "'");
  }
  if (auto item = cache_.FindItem(id)) return item->instance_of;
  if (options_.offline) {
    throw Error(ErrorCode::kNotFound,
                std::string(id) + " is not in the knowledge-base cache");
  }
  std::optional<KbItem> fetched;
  {
    InFlightSlot slot(in_flight_);
    fetched = Live().FetchItem(id);
  }
  if (!fetched) {
    throw Error(ErrorCode::kNotFound, std::string(id) + " does not exist");
  }
  fetched->id = std::string(id);
  cache_.PutItem(*fetched);
  return cache_.FindItem(id)->instance_of;
}

std::string KbClient::CanonicalType(std::string_view id) {
  std::vector<std::string> types = FetchType(id);
  if (types.empty()) {
    throw Error(ErrorCode::kNotFound,
                std::string(id) + " has no instance-of value");
  }
  return types.front();
}

CandidatePool KbClient::FetchCandidates(std::string_view type_id,
                                        int min_name_count) {
  if (min_name_count < 1) {
    throw Error(ErrorCode::kValidation, "min_name_count must be at least 1");
  }
  if (!options_.offline && !cache_.HasMemberScan(type_id)) {
    std::vector<KbItem> members;
    {
      InFlightSlot slot(in_flight_);
      members = Live().FetchMembers(type_id, options_.max_pool);
    }
    const std::string type(type_id);
    for (const KbItem& item : members) {
      if (IsWellFormedId(item.id) && !Trim(item.label).empty()) {
        cache_.PutMember(item, type);
      }
    }
    cache_.MarkMemberScan(type);
  }
  CandidatePool pool;
  pool.type_id = std::string(type_id);
  pool.min_name_count = min_name_count;
  for (KbItem& item : cache_.MembersOf(type_id, options_.max_pool)) {
    if (item.name_count() >= min_name_count) {
      pool.candidates.push_back(std::move(item));
    }
  }
  if (pool.candidates.empty()) {
    throw Error(ErrorCode::kEmptyPool,
                "no items of type " + pool.type_id + " with at least " +
                    std::to_string(min_name_count) + " names");
  }
  return pool;
}

std::int64_t KbClient::Popularity(const std::optional<std::string>& id) {
  if (!id) return 0;
  if (!IsWellFormedId(*id)) {
    throw Error(ErrorCode::kValidation, "malformed knowledge-base id '" + *id + "'");
  }
  if (auto count = cache_.FindPopularity(*id)) return *count;
  if (options_.offline) {
    throw Error(ErrorCode::kMissingPopularity, "no popularity record for " + *id);
  }
  std::optional<std::int64_t> count;
  {
    InFlightSlot slot(in_flight_);
    count = Live().FetchPopularity(*id);
  }
  if (!count) throw Error(ErrorCode::kMissingPopularity, *id + " does not exist");
  cache_.PutPopularity(*id, *count);
  return *count;
}

// ---------------------------------------------------------------------------
// Linking

LinkingMap LinkingMap::FromJson(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "linking map malformed at byte " +
                                       std::to_string(e.byte));
  }
  if (!root.is_object()) {
    throw Error(ErrorCode::kValidation, "linking map must be a JSON object");
  }
  LinkingMap map;
  for (const auto& [title, entities] : root.items()) {
    if (!entities.is_object()) {
      throw Error(ErrorCode::kValidation,
                  "linking map entry for '" + title + "' must be an object");
    }
    auto& slot = map.entries[title];
    for (const auto& [index_text, target] : entities.items()) {
      int index = -1;
      auto [ptr, ec] = std::from_chars(
          index_text.data(), index_text.data() + index_text.size(), index);
      if (ec != std::errc() || ptr != index_text.data() + index_text.size() ||
          index < 0) {
        throw Error(ErrorCode::kValidation, "linking map entry for '" + title +
                                                "' has bad entity index '" +
                                                index_text + "'");
      }
      if (target.is_null()) {
        slot[index] = std::nullopt;
      } else if (target.is_string() &&
                 IsWellFormedId(target.get<std::string>())) {
        slot[index] = target.get<std::string>();
      } else {
        throw Error(ErrorCode::kValidation, "linking map entry for '" + title +
                                                "' entity " + index_text +
                                                " is not a Q-identifier or null");
      }
    }
  }
  return map;
}

LinkingMap LinkingMap::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kValidation, "cannot read linking map " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

void LinkingMap::Validate(std::span<const Document> docs) const {
  std::map<std::string, std::size_t, std::less<>> entity_counts;
  for (const Document& doc : docs) {
    entity_counts[doc.title] =
        std::max(entity_counts[doc.title], doc.entities.size());
  }
  for (const auto& [title, entities] : entries) {
    auto it = entity_counts.find(title);
    if (it == entity_counts.end()) {
      throw Error(ErrorCode::kValidation,
                  "linking map references unknown document '" + title + "'");
    }
    for (const auto& [index, target] : entities) {
      if (static_cast<std::size_t>(index) >= it->second) {
        throw Error(ErrorCode::kValidation,
                    "linking map references entity " + std::to_string(index) +
                        " of document '" + title + "', which has " +
                        std::to_string(it->second) + " entities");
      }
    }
  }
}

std::vector<Document> LinkEntities(std::vector<Document> docs,
                                   const LinkingMap& map) {
  map.Validate(docs);
  for (Document& doc : docs) {
    auto it = map.entries.find(doc.title);
    if (it == map.entries.end()) continue;
    for (const auto& [index, target] : it->second) {
      if (static_cast<std::size_t>(index) < doc.entities.size()) {
        doc.entities[index].kb_id = target;
      }
    }
  }
  return docs;
}

PopularitySummary MeanPopularity(std::span<const std::optional<std::string>> ids,
                                 KbClient& client) {
  PopularitySummary summary;
  double total = 0.0;
  for (const auto& id : ids) {
    try {
      total += static_cast<double>(client.Popularity(id));
      ++summary.counted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingPopularity) throw;
      ++summary.missing;
    }
  }
  if (summary.counted > 0) {
    summary.mean = total / static_cast<double>(summary.counted);
    summary.undefined = false;
  }
  return summary;
}

}  // namespace envre

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

// Knowledge-base access for entity renaming: item lookup, fine-grained
// typing via instance-of, alias-count-filtered candidate retrieval and
// popularity counts. All results are recorded in an append-only JSON-lines
// cache; offline mode serves exclusively from that cache.

#ifndef ENVRE_KB_H_
#define ENVRE_KB_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envre/document.h"

namespace envre {

// Alias lists are normalized on construction: whitespace collapsed, and
// aliases equal (case-insensitively) to the label or an earlier alias are
// dropped, so every name of an item is distinct.
struct KbItem {
  std::string id;
  std::string label;
  std::vector<std::string> aliases;
  std::vector<std::string> instance_of;

  int name_count() const { return 1 + static_cast<int>(aliases.size()); }

  bool operator==(const KbItem&) const = default;
};

// True for identifiers of the form Q<digits>.
bool IsWellFormedId(std::string_view id);
std::uint64_t NumericId(std::string_view id);
KbItem NormalizeItem(KbItem item);

// Popularity counts statements where the item is subject or object.
inline constexpr std::string_view kPopularityConvention = "subject-or-object";

struct CandidatePool {
  std::string type_id;
  std::vector<KbItem> candidates;
  int min_name_count = 1;
};

class KbCache {
 public:
  // In-memory cache with no backing file.
  KbCache() = default;
  // Loads `path` if it exists and appends every later write to it.
  explicit KbCache(const std::filesystem::path& path);

  KbCache(const KbCache&) = delete;
  KbCache& operator=(const KbCache&) = delete;

  std::optional<KbItem> FindItem(std::string_view id) const;
  std::optional<std::int64_t> FindPopularity(std::string_view id) const;
  bool HasMemberScan(std::string_view type_id) const;
  // Items whose instance-of contains `type_id`, ascending numeric id.
  std::vector<KbItem> MembersOf(std::string_view type_id,
                                std::size_t limit) const;

  void PutItem(const KbItem& item);
  // Records an item seen in a type-membership scan. An existing record keeps
  // its statement-ordered types; the scanned type is appended if absent.
  void PutMember(const KbItem& item, const std::string& type_id);
  void PutPopularity(const std::string& id, std::int64_t count);
  void MarkMemberScan(const std::string& type_id);

  std::size_t item_count() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  void LoadLine(std::string_view line, std::size_t line_number);
  void StoreItemLocked(KbItem item);
  void AppendLocked(const std::string& line);

  std::filesystem::path path_;
  std::ofstream log_;
  mutable std::shared_mutex mu_;
  std::map<std::string, KbItem, std::less<>> items_;
  std::map<std::string, std::int64_t, std::less<>> popularity_;
  std::set<std::string, std::less<>> scanned_types_;
  // type id -> (numeric id -> item id)
  std::map<std::string, std::map<std::uint64_t, std::string>, std::less<>>
      members_;
};

// Transport to a live knowledge base. Implementations throw
// Error(kTransient) on failures that survive their retry policy.
class KbBackend {
 public:
  virtual ~KbBackend() = default;
  // Item with label, aliases and instance-of values in statement order;
  // nullopt when the item does not exist.
  virtual std::optional<KbItem> FetchItem(std::string_view id) = 0;
  virtual std::vector<KbItem> FetchMembers(std::string_view type_id,
                                           std::size_t limit) = 0;
  virtual std::optional<std::int64_t> FetchPopularity(std::string_view id) = 0;
};

struct KbClientOptions {
  bool offline = true;
  std::size_t max_pool = 10000;
  int max_in_flight = 4;
};

class KbClient {
 public:
  // `backend` may be null only in offline mode.
  KbClient(KbCache& cache, KbClientOptions options,
           std::unique_ptr<KbBackend> backend = nullptr);

  // Instance-of values of `id`. Throws Error(kNotFound) for unknown items.
  std::vector<std::string> FetchType(std::string_view id);
  // First instance-of value in statement order.
  std::string CanonicalType(std::string_view id);

  // Members of `type_id` with at least `min_name_count` names. Membership is
  // truncated to the `max_pool` smallest ids before filtering, which keeps
  // pools nested as `min_name_count` grows. Throws Error(kEmptyPool).
  CandidatePool FetchCandidates(std::string_view type_id, int min_name_count);

  // Relation-statement count; 0 for an unlinked entity. Throws
  // Error(kMissingPopularity) when offline and the cache has no record.
  std::int64_t Popularity(const std::optional<std::string>& id);

  std::size_t network_calls() const { return network_calls_.load(); }
  bool offline() const { return options_.offline; }
  KbCache& cache() { return cache_; }

 private:
  KbBackend& Live();

  KbCache& cache_;
  KbClientOptions options_;
  std::unique_ptr<KbBackend> backend_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
};

// Pre-computed entity links: title -> entity index -> item id (nullopt means
// explicitly unlinked).
struct LinkingMap {
  std::map<std::string, std::map<int, std::optional<std::string>>> entries;

  static LinkingMap FromJson(std::string_view json_text);
  static LinkingMap Load(const std::filesystem::path& path);

  // Throws Error(kValidation) naming the first stale title or entity index.
  void Validate(std::span<const Document> docs) const;
};

// Sets kb_id on every entity present in `map`; other entities are left
// unlinked.
std::vector<Document> LinkEntities(std::vector<Document> docs,
                                   const LinkingMap& map);

struct PopularitySummary {
  double mean = 0.0;
  std::size_t counted = 0;
  std::size_t missing = 0;
  bool undefined = true;
};

// Mean popularity over `ids`; items without a popularity record are
// reported in `missing` and excluded from the mean.
PopularitySummary MeanPopularity(std::span<const std::optional<std::string>> ids,
                                 KbClient& client);

}  // namespace envre

#endif  // ENVRE_KB_H_

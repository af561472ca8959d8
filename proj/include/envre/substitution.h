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

// Entity renaming: seeded, alias-wise substitution plans and their
// application with token-span remapping.

#ifndef ENVRE_SUBSTITUTION_H_
#define ENVRE_SUBSTITUTION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envre/document.h"
#include "envre/kb.h"

namespace envre {

enum class AssignmentKind { kSubstituted, kRuleBased, kSkipped };

std::string_view AssignmentKindName(AssignmentKind kind);

struct AliasReplacement {
  std::string original;
  std::string replacement;

  bool operator==(const AliasReplacement&) const = default;
};

struct EntityAssignment {
  int entity_index = 0;
  AssignmentKind kind = AssignmentKind::kSkipped;
  // Chosen knowledge-base item; set only for kSubstituted.
  std::string item_id;
  // Label alias first, then the remaining aliases in first-occurrence order.
  std::vector<AliasReplacement> alias_map;
  std::string reason;

  const std::string* Replacement(std::string_view original) const;
  bool altered() const { return !alias_map.empty(); }

  bool operator==(const EntityAssignment&) const = default;
};

struct SubstitutionPlan {
  std::string document_title;
  std::uint64_t seed = 0;
  std::vector<EntityAssignment> assignments;
  std::size_t exclusion_count = 0;

  bool operator==(const SubstitutionPlan&) const = default;
};

// Item ids and replacement names withheld from a substitution run. Names
// are compared case-insensitively.
class ExclusionSet {
 public:
  void AddItem(std::string id) { item_ids_.insert(std::move(id)); }
  void AddName(std::string_view name);
  void Merge(const ExclusionSet& other);

  bool ContainsItem(std::string_view id) const {
    return item_ids_.find(id) != item_ids_.end();
  }
  bool ContainsName(std::string_view name) const;

  const std::set<std::string, std::less<>>& item_ids() const { return item_ids_; }
  const std::set<std::string, std::less<>>& names() const { return names_; }
  std::size_t size() const { return item_ids_.size() + names_.size(); }
  bool empty() const { return size() == 0; }

  // {"itemIds": [...], "names": [...]}
  std::string ToJson() const;
  static ExclusionSet FromJson(std::string_view json_text);
  static ExclusionSet Load(const std::filesystem::path& path);

  bool operator==(const ExclusionSet&) const = default;

 private:
  std::set<std::string, std::less<>> item_ids_;
  std::set<std::string, std::less<>> names_;
};

// Everything buildPlan needs from the knowledge base, resolved up front so
// plan construction is a pure function.
struct SubstitutionContext {
  // Linked item id -> canonical fine-grained type.
  std::map<std::string, std::string, std::less<>> canonical_types;
  // Type id -> candidates whose canonical type is that type.
  std::map<std::string, CandidatePool, std::less<>> pools;
};

// Resolves canonical types and candidate pools for every linked entity.
// Unknown items and empty pools are left out, which makes the affected
// entities SKIPPED.
SubstitutionContext BuildContext(std::span<const Document> docs,
                                 KbClient& client);

inline constexpr int kMaxCandidateDraws = 32;

SubstitutionPlan BuildPlan(const Document& doc, const SubstitutionContext& ctx,
                           std::uint64_t seed, const ExclusionSet& exclusions);

struct PerturbedDocument {
  Document document;
  SubstitutionPlan plan;
  std::string original_title;
  std::uint64_t seed = 0;
};

// Throws Error(kOverlap) when a rewritten mention overlaps another mention.
PerturbedDocument ApplyPlan(const Document& doc, const SubstitutionPlan& plan);

// Root seed of one (document, application) pair.
std::uint64_t DocumentSeed(std::uint64_t application_seed,
                           std::string_view title);

std::string PerturbedTitle(std::string_view title, std::size_t seed_index);

// |docs| x |seeds| perturbed documents ordered by document, then seed.
std::vector<PerturbedDocument> PerturbCorpus(
    std::span<const Document> docs, const SubstitutionContext& ctx,
    std::span<const std::uint64_t> seeds, const ExclusionSet& exclusions,
    int num_threads = 1);

ExclusionSet CollectUsedNames(std::span<const PerturbedDocument> perturbed);

std::string PlanToJson(const SubstitutionPlan& plan);
SubstitutionPlan PlanFromJson(std::string_view json_text);
// One plan per line.
std::string PlansToJsonLines(std::span<const PerturbedDocument> perturbed);
std::vector<SubstitutionPlan> LoadPlans(const std::filesystem::path& path);

}  // namespace envre

#endif  // ENVRE_SUBSTITUTION_H_

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

#include "envre/substitution.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "envre/error.h"
#include "envre/random.h"
#include "envre/text_util.h"
#include "envre/value_rename.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Entities with a mention that overlaps a mention of any entity. They cannot
// be rewritten unambiguously.
std::set<int> OverlappingEntities(const Document& doc) {
  struct Item {
    int sentence;
    TokenSpan span;
    int entity;
  };
  std::vector<Item> items;
  for (int e = 0; e < static_cast<int>(doc.entities.size()); ++e) {
    for (const Mention& m : doc.entities[e].mentions) {
      items.push_back({m.sentence_index, m.span, e});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.sentence, a.span, a.entity) <
           std::tie(b.sentence, b.span, b.entity);
  });
  std::set<int> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (items[j].sentence != items[i].sentence ||
          items[j].span.start >= items[i].span.end) {
        break;
      }
      const bool identical_self = items[j].entity == items[i].entity &&
                                  items[j].span == items[i].span;
      if (!identical_self) {
        out.insert(items[i].entity);
        out.insert(items[j].entity);
      }
    }
  }
  return out;
}

class NameRegistry {
 public:
  explicit NameRegistry(const ExclusionSet& exclusions)
      : exclusions_(exclusions) {}

  bool Available(std::string_view name) const {
    const std::string folded = FoldCase(name);
    return used_.find(folded) == used_.end() &&
           !exclusions_.ContainsName(folded);
  }
  void Claim(std::string_view name) { used_.insert(FoldCase(name)); }

 private:
  const ExclusionSet& exclusions_;
  std::set<std::string, std::less<>> used_;
};

EntityAssignment Skipped(int entity, std::string reason) {
  EntityAssignment a;
  a.entity_index = entity;
  a.kind = AssignmentKind::kSkipped;
  a.reason = std::move(reason);
  return a;
}

EntityAssignment RuleBased(int entity_index, const Entity& entity,
                           SeededStream& stream, NameRegistry& names) {
  EntityAssignment a;
  a.entity_index = entity_index;
  a.kind = AssignmentKind::kRuleBased;
  std::size_t unparsed = 0;
  for (const std::string& original : DistinctNames(entity)) {
    for (int attempt = 0; attempt < kMaxCandidateDraws; ++attempt) {
      RenamedValue renamed = RenameValue(original, entity.type, stream.Next());
      if (!renamed.parsed) {
        ++unparsed;
        break;
      }
      std::string value = NormalizeWhitespace(renamed.value);
      if (!value.empty() && names.Available(value)) {
        names.Claim(value);
        a.alias_map.push_back({original, std::move(value)});
        break;
      }
    }
  }
  if (unparsed > 0) a.reason = "unparsed";
  return a;
}

// Tries to rename `entity` with `item`. On success returns the alias map
// and claims every replacement name.
std::optional<std::vector<AliasReplacement>> TryItem(
    const KbItem& item, const std::vector<std::string>& originals,
    const std::string& primary, SeededStream& stream, NameRegistry& names) {
  if (!names.Available(item.label)) return std::nullopt;
  std::vector<std::string> usable;
  for (const std::string& alias : item.aliases) {
    if (names.Available(alias)) usable.push_back(alias);
  }
  const std::size_t needed = originals.size() - 1;
  if (usable.size() < needed) return std::nullopt;
  // Partial Fisher-Yates: the first `needed` slots become the draw.
  for (std::size_t i = 0; i < needed; ++i) {
    std::size_t j = i + stream.Uniform(usable.size() - i);
    std::swap(usable[i], usable[j]);
  }
  std::vector<AliasReplacement> map;
  map.push_back({primary, item.label});
  std::size_t next = 0;
  for (const std::string& original : originals) {
    if (original == primary) continue;
    map.push_back({original, usable[next++]});
  }
  for (const AliasReplacement& r : map) names.Claim(r.replacement);
  return map;
}

}  // namespace

std::string_view AssignmentKindName(AssignmentKind kind) {
  switch (kind) {
    case AssignmentKind::kSubstituted:
      return "SUBSTITUTED";
    case AssignmentKind::kRuleBased:
      return "RULE_BASED";
    case AssignmentKind::kSkipped:
      return "SKIPPED";
  }
  return "SKIPPED";
}

const std::string* EntityAssignment::Replacement(
    std::string_view original) const {
  for (const AliasReplacement& r : alias_map) {
    if (r.original == original) return &r.replacement;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// ExclusionSet

void ExclusionSet::AddName(std::string_view name) {
  names_.insert(FoldCase(NormalizeWhitespace(name)));
}

void ExclusionSet::Merge(const ExclusionSet& other) {
  item_ids_.insert(other.item_ids_.begin(), other.item_ids_.end());
  names_.insert(other.names_.begin(), other.names_.end());
}

bool ExclusionSet::ContainsName(std::string_view name) const {
  return names_.find(FoldCase(name)) != names_.end();
}

std::string ExclusionSet::ToJson() const {
  ordered_json out;
  out["itemIds"] = std::vector<std::string>(item_ids_.begin(), item_ids_.end());
  out["names"] = std::vector<std::string>(names_.begin(), names_.end());
  return out.dump();
}

ExclusionSet ExclusionSet::FromJson(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "exclusion set malformed at byte " + std::to_string(e.byte));
  }
  if (!root.is_object()) {
    throw Error(ErrorCode::kValidation, "exclusion set must be a JSON object");
  }
  ExclusionSet set;
  try {
    for (const auto& id : root.value("itemIds", std::vector<std::string>())) {
      set.AddItem(id);
    }
    for (const auto& name : root.value("names", std::vector<std::string>())) {
      set.AddName(name);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation,
                std::string("exclusion set: ") + e.what());
  }
  return set;
}

ExclusionSet ExclusionSet::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kValidation, "cannot read exclusions " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

// ---------------------------------------------------------------------------
// Context and plans

SubstitutionContext BuildContext(std::span<const Document> docs,
                                 KbClient& client) {
  SubstitutionContext ctx;
  std::set<std::string> attempted_items;
  std::set<std::string> attempted_types;
  for (const Document& doc : docs) {
    for (const Entity& entity : doc.entities) {
      if (!entity.kb_id || IsRuleBasedType(entity.type)) continue;
      const std::string& id = *entity.kb_id;
      if (!attempted_items.insert(id).second) continue;
      try {
        ctx.canonical_types[id] = client.CanonicalType(id);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNotFound) throw;
      }
    }
  }
  for (const auto& [id, type] : ctx.canonical_types) {
    if (!attempted_types.insert(type).second) continue;
    try {
      CandidatePool pool = client.FetchCandidates(type, 1);
      std::erase_if(pool.candidates, [&](const KbItem& item) {
        return item.instance_of.empty() || item.instance_of.front() != type;
      });
      if (!pool.candidates.empty()) ctx.pools.emplace(type, std::move(pool));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyPool) throw;
    }
  }
  return ctx;
}

SubstitutionPlan BuildPlan(const Document& doc, const SubstitutionContext& ctx,
                           std::uint64_t seed, const ExclusionSet& exclusions) {
  SubstitutionPlan plan;
  plan.document_title = doc.title;
  plan.seed = seed;
  plan.exclusion_count = exclusions.size();

  NameRegistry names(exclusions);
  for (const Entity& entity : doc.entities) {
    for (const Mention& m : entity.mentions) names.Claim(m.name);
  }
  const std::set<int> overlapping = OverlappingEntities(doc);
  std::set<std::string, std::less<>> chosen;

  for (int e = 0; e < static_cast<int>(doc.entities.size()); ++e) {
    const Entity& entity = doc.entities[e];
    SeededStream stream(HashCombine(seed, static_cast<std::uint64_t>(e)));
    if (overlapping.count(e) > 0) {
      plan.assignments.push_back(Skipped(e, "overlapping_mentions"));
      continue;
    }
    if (IsRuleBasedType(entity.type)) {
      plan.assignments.push_back(RuleBased(e, entity, stream, names));
      continue;
    }
    if (!entity.kb_id) {
      plan.assignments.push_back(Skipped(e, "unlinked"));
      continue;
    }
    auto type = ctx.canonical_types.find(*entity.kb_id);
    if (type == ctx.canonical_types.end()) {
      plan.assignments.push_back(Skipped(e, "untyped"));
      continue;
    }
    auto pool = ctx.pools.find(type->second);
    if (pool == ctx.pools.end()) {
      plan.assignments.push_back(Skipped(e, "empty_pool"));
      continue;
    }
    const std::vector<std::string> originals = DistinctNames(entity);
    const int k = static_cast<int>(originals.size());
    std::vector<const KbItem*> candidates;
    for (const KbItem& item : pool->second.candidates) {
      if (item.name_count() >= k && item.id != *entity.kb_id &&
          !exclusions.ContainsItem(item.id) && chosen.count(item.id) == 0) {
        candidates.push_back(&item);
      }
    }
    if (candidates.empty()) {
      plan.assignments.push_back(Skipped(e, "empty_pool"));
      continue;
    }
    const std::string primary = MostFrequentName(entity);
    const std::size_t draws =
        std::min<std::size_t>(kMaxCandidateDraws, candidates.size());
    bool assigned = false;
    for (std::size_t i = 0; i < draws && !assigned; ++i) {
      std::size_t j = i + stream.Uniform(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      const KbItem& item = *candidates[i];
      if (auto map = TryItem(item, originals, primary, stream, names)) {
        EntityAssignment a;
        a.entity_index = e;
        a.kind = AssignmentKind::kSubstituted;
        a.item_id = item.id;
        a.alias_map = std::move(*map);
        chosen.insert(item.id);
        plan.assignments.push_back(std::move(a));
        assigned = true;
      }
    }
    if (!assigned) plan.assignments.push_back(Skipped(e, "name_collisions"));
  }
  return plan;
}

PerturbedDocument ApplyPlan(const Document& doc, const SubstitutionPlan& plan) {
  if (plan.document_title != doc.title) {
    throw Error(ErrorCode::kValidation,
                "plan for '" + plan.document_title +
                    "' applied to document '" + doc.title + "'");
  }
  std::vector<const EntityAssignment*> by_entity(doc.entities.size(), nullptr);
  for (const EntityAssignment& a : plan.assignments) {
    if (a.entity_index < 0 ||
        a.entity_index >= static_cast<int>(doc.entities.size())) {
      throw Error(ErrorCode::kValidation,
                  "plan for '" + doc.title + "' references entity " +
                      std::to_string(a.entity_index));
    }
    by_entity[a.entity_index] = &a;
  }

  struct Slot {
    int entity;
    int mention;
    TokenSpan span;
    const std::string* replacement;
  };
  std::vector<std::vector<Slot>> per_sentence(doc.sentences.size());
  for (int e = 0; e < static_cast<int>(doc.entities.size()); ++e) {
    const EntityAssignment* a = by_entity[e];
    const auto& mentions = doc.entities[e].mentions;
    for (int m = 0; m < static_cast<int>(mentions.size()); ++m) {
      const std::string* replacement =
          a != nullptr && a->kind != AssignmentKind::kSkipped
              ? a->Replacement(mentions[m].name)
              : nullptr;
      per_sentence[mentions[m].sentence_index].push_back(
          {e, m, mentions[m].span, replacement});
    }
  }

  PerturbedDocument out;
  out.document = doc;
  out.plan = plan;
  out.original_title = doc.title;
  out.seed = plan.seed;

  for (std::size_t s = 0; s < per_sentence.size(); ++s) {
    auto& slots = per_sentence[s];
    if (std::none_of(slots.begin(), slots.end(),
                     [](const Slot& x) { return x.replacement != nullptr; })) {
      continue;
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
      return std::tie(a.span, a.entity, a.mention) <
             std::tie(b.span, b.entity, b.mention);
    });
    for (std::size_t i = 0; i < slots.size(); ++i) {
      for (std::size_t j = i + 1; j < slots.size(); ++j) {
        if (slots[j].span.start >= slots[i].span.end) break;
        const bool same = slots[i].entity == slots[j].entity &&
                          slots[i].span == slots[j].span;
        if (!same && (slots[i].replacement || slots[j].replacement)) {
          throw Error(
              ErrorCode::kOverlap,
              "document '" + doc.title + "' sentence " + std::to_string(s) +
                  ": span [" + std::to_string(slots[i].span.start) + ", " +
                  std::to_string(slots[i].span.end) + ") of entity " +
                  std::to_string(slots[i].entity) + " overlaps span [" +
                  std::to_string(slots[j].span.start) + ", " +
                  std::to_string(slots[j].span.end) + ") of entity " +
                  std::to_string(slots[j].entity));
        }
      }
    }

    const auto& tokens = doc.sentences[s];
    const int len = static_cast<int>(tokens.size());
    // start token -> replacement tokens of the rewrite beginning there
    std::map<int, std::pair<int, std::vector<std::string>>> rewrites;
    for (const Slot& slot : slots) {
      if (slot.replacement == nullptr) continue;
      std::vector<std::string> pieces = SplitWhitespace(*slot.replacement);
      if (pieces.empty()) {
        throw Error(ErrorCode::kValidation,
                    "empty replacement for entity " +
                        std::to_string(slot.entity) + " of '" + doc.title + "'");
      }
      rewrites.emplace(slot.span.start,
                       std::make_pair(slot.span.end, std::move(pieces)));
    }
    std::vector<std::string> rebuilt;
    std::vector<int> new_pos(len + 1, 0);
    int i = 0;
    while (i < len) {
      new_pos[i] = static_cast<int>(rebuilt.size());
      if (auto it = rewrites.find(i); it != rewrites.end()) {
        const auto& [end, pieces] = it->second;
        rebuilt.insert(rebuilt.end(), pieces.begin(), pieces.end());
        for (int k = i + 1; k < end; ++k) new_pos[k] = new_pos[i];
        i = end;
      } else {
        rebuilt.push_back(tokens[i]);
        ++i;
      }
    }
    new_pos[len] = static_cast<int>(rebuilt.size());

    for (const Slot& slot : slots) {
      Mention& mention = out.document.entities[slot.entity].mentions[slot.mention];
      if (slot.replacement != nullptr) {
        const auto& pieces = rewrites.at(slot.span.start).second;
        mention.span.start = new_pos[slot.span.start];
        mention.span.end = mention.span.start + static_cast<int>(pieces.size());
        mention.name = JoinTokens(pieces);
      } else {
        mention.span.start = new_pos[slot.span.start];
        mention.span.end = new_pos[slot.span.end];
      }
    }
    out.document.sentences[s] = std::move(rebuilt);
  }
  return out;
}

std::uint64_t DocumentSeed(std::uint64_t application_seed,
                           std::string_view title) {
  return HashCombine(application_seed, Fnv1a64(title));
}

std::string PerturbedTitle(std::string_view title, std::size_t seed_index) {
  return std::string(title) + "_" + std::to_string(seed_index);
}

std::vector<PerturbedDocument> PerturbCorpus(
    std::span<const Document> docs, const SubstitutionContext& ctx,
    std::span<const std::uint64_t> seeds, const ExclusionSet& exclusions,
    int num_threads) {
  if (seeds.empty()) {
    throw Error(ErrorCode::kValidation, "at least one seed is required");
  }
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) {
    throw Error(ErrorCode::kValidation, "seeds must be pairwise distinct");
  }
  const std::size_t total = docs.size() * seeds.size();
  std::vector<PerturbedDocument> out(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t d = job / seeds.size();
      const std::size_t s = job % seeds.size();
      try {
        const Document& doc = docs[d];
        SubstitutionPlan plan =
            BuildPlan(doc, ctx, DocumentSeed(seeds[s], doc.title), exclusions);
        out[job] = ApplyPlan(doc, plan);
        out[job].document.title = PerturbedTitle(doc.title, s);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, num_threads);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ExclusionSet CollectUsedNames(std::span<const PerturbedDocument> perturbed) {
  ExclusionSet set;
  for (const PerturbedDocument& p : perturbed) {
    for (const EntityAssignment& a : p.plan.assignments) {
      if (!a.item_id.empty()) set.AddItem(a.item_id);
      for (const AliasReplacement& r : a.alias_map) set.AddName(r.replacement);
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Serialization

std::string PlanToJson(const SubstitutionPlan& plan) {
  ordered_json assignments = ordered_json::array();
  for (const EntityAssignment& a : plan.assignments) {
    ordered_json alias_map = ordered_json::array();
    for (const AliasReplacement& r : a.alias_map) {
      alias_map.push_back(ordered_json::array({r.original, r.replacement}));
    }
    ordered_json entry;
    entry["entity"] = a.entity_index;
    entry["kind"] = AssignmentKindName(a.kind);
    entry["item"] = a.item_id.empty() ? ordered_json(nullptr)
                                      : ordered_json(a.item_id);
    entry["aliasMap"] = std::move(alias_map);
    entry["reason"] = a.reason;
    assignments.push_back(std::move(entry));
  }
  ordered_json out;
  out["title"] = plan.document_title;
  out["seed"] = plan.seed;
  out["exclusionCount"] = plan.exclusion_count;
  out["assignments"] = std::move(assignments);
  return out.dump();
}

SubstitutionPlan PlanFromJson(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "plan malformed at byte " + std::to_string(e.byte));
  }
  SubstitutionPlan plan;
  try {
    plan.document_title = root.at("title").get<std::string>();
    plan.seed = root.at("seed").get<std::uint64_t>();
    plan.exclusion_count = root.value("exclusionCount", std::size_t{0});
    for (const json& entry : root.at("assignments")) {
      EntityAssignment a;
      a.entity_index = entry.at("entity").get<int>();
      const std::string kind = entry.at("kind").get<std::string>();
      if (kind == "SUBSTITUTED") {
        a.kind = AssignmentKind::kSubstituted;
      } else if (kind == "RULE_BASED") {
        a.kind = AssignmentKind::kRuleBased;
      } else if (kind == "SKIPPED") {
        a.kind = AssignmentKind::kSkipped;
      } else {
        throw Error(ErrorCode::kValidation, "unknown assignment kind " + kind);
      }
      if (entry.contains("item") && entry["item"].is_string()) {
        a.item_id = entry["item"].get<std::string>();
      }
      for (const json& pair : entry.at("aliasMap")) {
        a.alias_map.push_back(
            {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
      }
      a.reason = entry.value("reason", std::string());
      plan.assignments.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("plan: ") + e.what());
  }
  return plan;
}

std::string PlansToJsonLines(std::span<const PerturbedDocument> perturbed) {
  std::string out;
  for (const PerturbedDocument& p : perturbed) {
    out += PlanToJson(p.plan);
    out += '\n';
  }
  return out;
}

std::vector<SubstitutionPlan> LoadPlans(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read plans " + path.string());
  std::vector<SubstitutionPlan> plans;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    plans.push_back(PlanFromJson(line));
  }
  return plans;
}

}  // namespace envre

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

#include "support/fixtures.h"

#include <algorithm>
#include <set>

#include "envre/text_util.h"
#include "json.hpp"

namespace envre::testing {
namespace {

constexpr const char* kOriginalSyllables[] = {"ka", "lo", "mi", "ren", "tos", "va",
                                              "dur", "el", "fin", "gor", "hal", "ix"};
constexpr const char* kCandidateSyllables[] = {"bra", "ce", "dop", "qua", "nu", "wex",
                                               "yor", "zil", "pem", "sut", "ob", "tri"};
constexpr const char* kFiller[] = {"the", "met", "in", "of", "and", "with",
                                   "later", "was", "near", ",", "from", "a"};
constexpr const char* kMonths[] = {"January", "March", "May", "July", "October",
                                   "December"};
constexpr const char* kEntityTypes[] = {"PER", "ORG", "LOC", "MISC"};

template <std::size_t N>
const char* Pick(SeededStream& rng, const char* const (&words)[N]) {
  return words[rng.Uniform(N)];
}

std::string Word(SeededStream& rng, const char* const (&syllables)[12]) {
  std::string word;
  const int parts = rng.UniformInt(2, 3);
  for (int i = 0; i < parts; ++i) word += Pick(rng, syllables);
  word[0] = static_cast<char>(word[0] - 'a' + 'A');
  return word;
}

std::string Name(SeededStream& rng, const char* const (&syllables)[12]) {
  std::string name = Word(rng, syllables);
  const int extra = rng.UniformInt(0, 2);
  for (int i = 0; i < extra; ++i) name += " " + Word(rng, syllables);
  return name;
}

std::string ValueName(SeededStream& rng, const std::string& type) {
  if (type == "TIME") {
    switch (rng.Uniform(3)) {
      case 0:
        return std::to_string(rng.UniformInt(1900, 2020));
      case 1:
        return std::string(Pick(rng, kMonths)) + " " + std::to_string(rng.UniformInt(1900, 2020));
      default:
        return std::to_string(rng.UniformInt(1, 28)) + " " + Pick(rng, kMonths) + " " +
               std::to_string(rng.UniformInt(1900, 2020));
    }
  }
  switch (rng.Uniform(3)) {
    case 0:
      return std::to_string(rng.UniformInt(2, 999));
    case 1:
      return std::to_string(rng.UniformInt(1, 9)) + "." + std::to_string(rng.UniformInt(1, 9)) +
             " million";
    default:
      return std::to_string(rng.UniformInt(1, 99)) + "," +
             std::to_string(rng.UniformInt(100, 999));
  }
}

std::uint64_t NextId(std::uint64_t& counter) { return counter++; }

}  // namespace

Document RandomDocument(SeededStream& rng, const std::string& title,
                        const DocGenOptions& options, const RelationInventory& relations) {
  Document doc;
  doc.title = title;
  const int sentences = rng.UniformInt(options.min_sentences, options.max_sentences);
  const int entities = rng.UniformInt(options.min_entities, options.max_entities);
  std::set<std::string> used;

  struct PendingMention {
    int entity;
    std::string name;
  };
  std::vector<std::vector<PendingMention>> per_sentence(sentences);
  for (int e = 0; e < entities; ++e) {
    Entity entity;
    const bool value = rng.Uniform(1000) < static_cast<std::uint64_t>(options.value_share * 1000);
    entity.type = value ? (rng.Uniform(2) == 0 ? "NUM" : "TIME") : Pick(rng, kEntityTypes);
    const int aliases = value ? 1 : rng.UniformInt(1, options.max_aliases);
    std::vector<std::string> names;
    for (int attempt = 0; static_cast<int>(names.size()) < aliases && attempt < 100; ++attempt) {
      std::string name = value ? ValueName(rng, entity.type) : Name(rng, kOriginalSyllables);
      if (used.insert(FoldCase(name)).second) names.push_back(name);
    }
    const int mentions =
        rng.UniformInt(static_cast<int>(names.size()),
                       std::max(static_cast<int>(names.size()), options.max_mentions));
    for (int m = 0; m < mentions; ++m) {
      const std::string& name =
          m < static_cast<int>(names.size()) ? names[m] : names[rng.Uniform(names.size())];
      per_sentence[rng.Uniform(sentences)].push_back({e, name});
    }
    doc.entities.push_back(std::move(entity));
  }

  for (int s = 0; s < sentences; ++s) {
    auto& pending = per_sentence[s];
    for (std::size_t i = pending.size(); i > 1; --i) {
      std::swap(pending[i - 1], pending[rng.Uniform(i)]);
    }
    std::vector<std::string> tokens;
    const int lead = rng.UniformInt(1, 3);
    for (int i = 0; i < lead; ++i) tokens.push_back(Pick(rng, kFiller));
    for (const PendingMention& p : pending) {
      Mention mention;
      mention.sentence_index = s;
      mention.span.start = static_cast<int>(tokens.size());
      for (const std::string& token : SplitWhitespace(p.name)) tokens.push_back(token);
      mention.span.end = static_cast<int>(tokens.size());
      mention.name = p.name;
      doc.entities[p.entity].mentions.push_back(std::move(mention));
      const int gap = rng.UniformInt(0, 2);
      for (int i = 0; i < gap; ++i) tokens.push_back(Pick(rng, kFiller));
    }
    tokens.push_back(".");
    doc.sentences.push_back(std::move(tokens));
  }

  std::set<std::tuple<int, int, std::string>> seen;
  const int labels = entities < 2 ? 0 : rng.UniformInt(0, options.max_labels);
  for (int i = 0; i < labels; ++i) {
    RelationLabel label;
    label.head = rng.UniformInt(0, entities - 1);
    label.tail = rng.UniformInt(0, entities - 2);
    if (label.tail >= label.head) ++label.tail;
    label.relation = relations.relations()[rng.Uniform(relations.size())].id;
    if (!seen.emplace(label.head, label.tail, label.relation).second) continue;
    const int evidence = rng.UniformInt(0, std::min(2, sentences));
    std::set<int> ev;
    for (int k = 0; k < evidence; ++k) ev.insert(rng.UniformInt(0, sentences - 1));
    label.evidence.assign(ev.begin(), ev.end());
    doc.labels.push_back(std::move(label));
  }
  return doc;
}

std::vector<Document> RandomCorpus(std::uint64_t seed, int count, const DocGenOptions& options,
                                   const std::string& title_prefix) {
  SeededStream rng(seed);
  std::vector<Document> docs;
  docs.reserve(count);
  for (int i = 0; i < count; ++i) {
    docs.push_back(RandomDocument(rng, title_prefix + "_" + std::to_string(i), options));
  }
  return docs;
}

std::string FixtureTypeFor(const std::string& entity_type) {
  if (entity_type == "PER") return "Q5";
  if (entity_type == "ORG") return "Q43229";
  if (entity_type == "LOC") return "Q2221906";
  return "Q35120";
}

void FixtureKb::Fill(KbCache& cache) const {
  for (const KbItem& item : items) cache.PutItem(item);
  for (const auto& [id, count] : popularity) cache.PutPopularity(id, count);
}

std::string FixtureKb::CacheJsonLines() const {
  std::string out;
  for (const KbItem& item : items) {
    nlohmann::ordered_json line;
    line["kind"] = "item";
    line["id"] = item.id;
    line["label"] = item.label;
    line["aliases"] = item.aliases;
    line["instanceOf"] = item.instance_of;
    out += line.dump() + "\n";
  }
  for (const auto& [id, count] : popularity) {
    nlohmann::ordered_json line;
    line["kind"] = "popularity";
    line["id"] = id;
    line["count"] = count;
    out += line.dump() + "\n";
  }
  return out;
}

std::string FixtureKb::LinkingJson() const {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& [title, entities] : linking.entries) {
    nlohmann::ordered_json slot = nlohmann::ordered_json::object();
    for (const auto& [index, id] : entities) {
      slot[std::to_string(index)] = id ? nlohmann::ordered_json(*id) : nullptr;
    }
    root[title] = std::move(slot);
  }
  return root.dump(2) + "\n";
}

FixtureKb BuildFixtureKb(const std::vector<Document>& docs, std::uint64_t seed,
                         const FixtureKbOptions& options) {
  FixtureKb kb;
  SeededStream rng(seed);
  std::uint64_t counter = options.id_base;
  std::set<std::string> types;
  for (const Document& doc : docs) {
    auto& slot = kb.linking.entries[doc.title];
    for (int e = 0; e < static_cast<int>(doc.entities.size()); ++e) {
      const Entity& entity = doc.entities[e];
      if (entity.type == "NUM" || entity.type == "TIME") continue;
      const bool link = rng.Uniform(1000000) <
                        static_cast<std::uint64_t>(options.link_probability * 1000000);
      if (!link) {
        slot[e] = std::nullopt;
        continue;
      }
      KbItem item;
      item.id = "Q" + std::to_string(NextId(counter));
      item.label = MostFrequentName(entity);
      for (const std::string& name : DistinctNames(entity)) {
        if (name != item.label) item.aliases.push_back(name);
      }
      item.instance_of = {FixtureTypeFor(entity.type)};
      types.insert(item.instance_of.front());
      kb.popularity.emplace_back(item.id, rng.UniformInt(50, 5000));
      slot[e] = item.id;
      kb.items.push_back(NormalizeItem(std::move(item)));
    }
  }
  std::uint64_t candidate_id = options.id_base + 1000000;
  std::set<std::string> names;
  for (const std::string& type : types) {
    for (int c = 0; c < options.candidates_per_type; ++c) {
      KbItem item;
      item.id = "Q" + std::to_string(candidate_id++);
      do {
        item.label = Name(rng, kCandidateSyllables);
      } while (!names.insert(FoldCase(item.label)).second);
      const int aliases = rng.UniformInt(0, options.max_candidate_aliases);
      for (int a = 0; a < aliases; ++a) {
        std::string alias = Name(rng, kCandidateSyllables);
        if (names.insert(FoldCase(alias)).second) item.aliases.push_back(alias);
      }
      item.instance_of = {type};
      kb.popularity.emplace_back(item.id, rng.UniformInt(0, 40));
      kb.items.push_back(NormalizeItem(std::move(item)));
    }
  }
  return kb;
}

Document SonyMusicDocument() {
  Document doc;
  doc.title = "Westlife";
  doc.sentences = {
      {"Westlife", "signed", "with", "Sony", "Music", "in", "1999", "."},
      {"Sony", "Music", "later", "released", "their", "album", "."},
      {"Sony", "kept", "the", "rights", "."},
  };
  Entity band;
  band.type = "ORG";
  band.mentions = {{"Westlife", 0, {0, 1}, ""}};
  band.kb_id = "Q151241";
  Entity label;
  label.type = "ORG";
  label.mentions = {{"Sony Music", 0, {3, 5}, ""},
                    {"Sony Music", 1, {0, 2}, ""},
                    {"Sony", 2, {0, 1}, ""}};
  label.kb_id = "Q56760";
  Entity year;
  year.type = "TIME";
  year.mentions = {{"1999", 0, {6, 7}, ""}};
  doc.entities = {band, label, year};
  doc.labels = {{0, 1, "P264", {0}}, {1, 0, "P527", {1}}};
  return doc;
}

std::vector<KbItem> SonyMusicItems() {
  return {
      {"Q151241", "Westlife", {}, {"Q216337"}},
      {"Q56760", "Sony Music", {"Sony", "Sony Music Entertainment"}, {"Q18127"}},
      {"Q1417941", "Matador Records", {"Matador"}, {"Q18127"}},
  };
}

}  // namespace envre::testing

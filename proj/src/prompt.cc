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

#include "envre/prompt.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "envre/error.h"
#include "envre/random.h"
#include "envre/text_util.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::ordered_json;

std::string Substitute(const std::string& pattern, const std::string& digits) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern.compare(i, 3, "{n}") == 0) {
      out += digits;
      i += 3;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

const RelationInventory& InventoryOf(const PromptSpec& spec) {
  return spec.relations != nullptr ? *spec.relations : RelationInventory::Default();
}

std::string InstructionBlock(const RelationInventory& relations,
                             std::size_t example_count) {
  std::string labels;
  for (const auto& rel : relations.relations()) {
    if (!labels.empty()) labels += "; ";
    labels += rel.label;
  }
  std::string examples =
      example_count == 1
          ? "an example document and its expected output are provided"
          : std::to_string(example_count) +
                " example documents and their expected outputs are provided";
  return "Given a document in which all entity mentions have been marked, "
         "please identify all relation types between any two different "
         "entities based on the context of the document. The scope of target "
         "relation types for identification is limited to these " +
         std::to_string(relations.size()) +
         " types (separated by semicolons): " + labels +
         ". Entities in the document are numbered in the order of their first "
         "mention, and each entity mention is enclosed in the corresponding "
         "entity number. Before the test document, " + examples +
         ". Please output the extraction results of the test document in the "
         "same format as the example, i.e., each line outputs an extracted "
         "relation triple, and the format of each triple is: <subject entity "
         "number; relation type; object entity number>. Each relation triple "
         "should be output only once.";
}

std::string MarkerNote(const MarkerStyle& style) {
  return "Each mention of entity N is written as " + Substitute(style.open, "N") +
         " mention " + Substitute(style.close, "N") + ".";
}

void AppendExample(std::string& out, const MarkedDocument& marked,
                   const std::string& triples) {
  out += "Example document:\n";
  out += marked.text;
  out += "\n\nAll relation triples extracted from the document:\n";
  out += triples;
  out += "\n";
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kInternal, "cannot write " + path.string());
}

std::string FileName(const char* stem, std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s_%05zu.txt", stem, index);
  return buffer;
}

}  // namespace

std::string MarkerStyle::Open(int number) const {
  return Substitute(open, std::to_string(number));
}
std::string MarkerStyle::Close(int number) const {
  return Substitute(close, std::to_string(number));
}

const char kConsistencyGuidance[] =
    "The only difference between two documents lies in the entity names. "
    "Apart from the entities, the contextual content of the two documents is "
    "entirely the same. Therefore, the expected outputs for the two documents "
    "are also identical. When extracting relation triples from the test "
    "document, please base the extraction on the context of the document and "
    "avoid identifying the relations solely based on the information of the "
    "entities themselves.";

EntityNumbering NumberEntities(const Document& doc) {
  const int n = static_cast<int>(doc.entities.size());
  std::vector<std::tuple<int, int, int>> first;
  first.reserve(n);
  for (int e = 0; e < n; ++e) {
    const auto& mentions = doc.entities[e].mentions;
    if (mentions.empty()) {
      throw Error(ErrorCode::kValidation,
                  "entity " + std::to_string(e) + " has no mentions");
    }
    std::pair<int, int> best{mentions[0].sentence_index, mentions[0].span.start};
    for (const Mention& m : mentions) {
      best = std::min(best, {m.sentence_index, m.span.start});
    }
    first.emplace_back(best.first, best.second, e);
  }
  std::sort(first.begin(), first.end());
  EntityNumbering numbering;
  numbering.number_of.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    const int e = std::get<2>(first[k]);
    numbering.entity_at.push_back(e);
    numbering.number_of[e] = k + 1;
  }
  return numbering;
}

MarkedDocument MarkEntities(const Document& doc, const MarkerStyle& style) {
  MarkedDocument marked;
  marked.numbering = NumberEntities(doc);
  struct Region {
    TokenSpan span;
    int number;
  };
  std::vector<std::vector<Region>> regions(doc.sentences.size());
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (const Mention& m : doc.entities[e].mentions) {
      if (m.sentence_index < 0 ||
          m.sentence_index >= static_cast<int>(doc.sentences.size())) {
        throw Error(ErrorCode::kValidation, "mention sentence out of range");
      }
      regions[m.sentence_index].push_back({m.span, marked.numbering.number_of[e]});
    }
  }
  std::vector<std::string> pieces;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    auto& list = regions[s];
    std::sort(list.begin(), list.end(), [](const Region& a, const Region& b) {
      return a.span < b.span;
    });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i - 1].span.Overlaps(list[i].span)) {
        throw Error(ErrorCode::kOverlap,
                    "overlapping mentions in sentence " + std::to_string(s) +
                        " of '" + doc.title + "'");
      }
    }
    const auto& tokens = doc.sentences[s];
    std::size_t next = 0;
    for (int t = 0; t < static_cast<int>(tokens.size()); ++t) {
      if (next < list.size() && list[next].span.start == t) {
        pieces.push_back(style.Open(list[next].number));
      }
      pieces.push_back(tokens[t]);
      if (next < list.size() && list[next].span.end == t + 1) {
        pieces.push_back(style.Close(list[next].number));
        ++next;
      }
    }
    if (next != list.size()) {
      throw Error(ErrorCode::kValidation, "mention span exceeds its sentence");
    }
  }
  marked.text = JoinTokens(pieces);
  return marked;
}

std::string RenderTriples(const Document& doc, const EntityNumbering& numbering,
                          const RelationInventory& relations) {
  std::set<std::tuple<int, int, std::string>> triples;
  for (const RelationLabel& label : doc.labels) {
    triples.emplace(numbering.number_of.at(label.head),
                    numbering.number_of.at(label.tail),
                    relations.Label(label.relation));
  }
  std::string out;
  for (const auto& [h, t, rel] : triples) {
    if (!out.empty()) out += '\n';
    out += "<" + std::to_string(h) + "; " + rel + "; " + std::to_string(t) + ">";
  }
  return out;
}

void PromptSpec::Validate() const {
  if (shots != 1 && shots != 3) {
    throw Error(ErrorCode::kValidation, "shots must be 1 or 3");
  }
  if (static_cast<int>(demonstrations.size()) != shots) {
    throw Error(ErrorCode::kValidation,
                "expected " + std::to_string(shots) + " demonstrations, got " +
                    std::to_string(demonstrations.size()));
  }
  if (consistency_guidance && !demonstration_augmentation) {
    throw Error(ErrorCode::kValidation,
                "consistency guidance requires demonstration augmentation");
  }
}

Document DemonstrationTwin(const Document& demo, std::size_t index,
                           const DemoPerturber& perturber) {
  if (perturber.context == nullptr) {
    throw Error(ErrorCode::kValidation,
                "demonstration augmentation needs a substitution context");
  }
  static const ExclusionSet kNoExclusions;
  const ExclusionSet& exclusions =
      perturber.exclusions != nullptr ? *perturber.exclusions : kNoExclusions;
  const std::uint64_t seed =
      DocumentSeed(HashCombine(perturber.seed, index), demo.title);
  SubstitutionPlan plan = BuildPlan(demo, *perturber.context, seed, exclusions);
  return ApplyPlan(demo, plan).document;
}

std::string BuildPrompt(const PromptSpec& spec, const DemoPerturber* perturber) {
  spec.Validate();
  if (spec.demonstration_augmentation && perturber == nullptr) {
    throw Error(ErrorCode::kValidation,
                "demonstration augmentation needs a perturber");
  }
  const RelationInventory& relations = InventoryOf(spec);
  const std::size_t examples =
      spec.demonstrations.size() * (spec.demonstration_augmentation ? 2 : 1);

  std::string out = InstructionBlock(relations, examples);
  out += " " + MarkerNote(spec.markers);
  if (spec.consistency_guidance) {
    out += "\n\n";
    out += kConsistencyGuidance;
  }
  out += "\n\n";
  for (std::size_t i = 0; i < spec.demonstrations.size(); ++i) {
    const Document& demo = spec.demonstrations[i];
    const MarkedDocument marked = MarkEntities(demo, spec.markers);
    const std::string triples = RenderTriples(demo, marked.numbering, relations);
    AppendExample(out, marked, triples);
    out += "\n";
    if (spec.demonstration_augmentation) {
      const Document twin = DemonstrationTwin(demo, i, *perturber);
      AppendExample(out, MarkEntities(twin, spec.markers), triples);
      out += "\n";
    }
  }
  out += "Test document:\n";
  out += MarkEntities(spec.test_document, spec.markers).text;
  out += "\n\nAll relation triples extracted from the document:\n";
  return out;
}

std::vector<std::size_t> SelectDemonstrations(std::span<const Document> train,
                                              int shots, std::uint64_t seed,
                                              std::string_view test_title) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].title != test_title) pool.push_back(i);
  }
  if (shots < 0 || pool.size() < static_cast<std::size_t>(shots)) {
    throw Error(ErrorCode::kValidation,
                "not enough training documents for " + std::to_string(shots) +
                    " demonstrations");
  }
  SeededStream stream(HashCombine(seed, Fnv1a64(test_title)));
  for (int k = 0; k < shots; ++k) {
    const std::size_t j = k + stream.Uniform(pool.size() - k);
    std::swap(pool[k], pool[j]);
  }
  pool.resize(shots);
  return pool;
}

std::string_view RejectReasonName(RejectReason reason) {
  switch (reason) {
    case RejectReason::kMalformed:
      return "MALFORMED";
    case RejectReason::kOutOfRange:
      return "OUT_OF_RANGE";
    case RejectReason::kUnknownRelation:
      return "UNKNOWN_RELATION";
    case RejectReason::kSelfPair:
      return "SELF_PAIR";
    case RejectReason::kDuplicate:
      return "DUPLICATE";
  }
  return "UNKNOWN";
}

ParsedOutput ParseOutput(std::string_view text, const Document& test_doc,
                         const RelationInventory& relations) {
  static const std::regex kTriple(
      R"(^\s*<\s*(\d+)\s*;\s*([^;<>]*?)\s*;\s*(\d+)\s*>\s*$)");
  const EntityNumbering numbering = NumberEntities(test_doc);
  const int count = static_cast<int>(numbering.entity_at.size());
  auto number = [&](const std::string& digits) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    return ec == std::errc() ? value : -1;
  };

  ParsedOutput parsed;
  std::set<PredictionRecord> seen;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(start, end - start));
    ++line_number;
    start = end + 1;
    if (Trim(line).empty()) continue;

    auto reject = [&](RejectReason reason) {
      parsed.rejects.push_back({line_number, line, reason});
    };
    std::smatch match;
    if (!std::regex_match(line, match, kTriple)) {
      reject(RejectReason::kMalformed);
      continue;
    }
    const int h = number(match[1].str());
    const int t = number(match[3].str());
    if (h < 1 || h > count || t < 1 || t > count) {
      reject(RejectReason::kOutOfRange);
      continue;
    }
    const auto relation = relations.FindId(NormalizeWhitespace(match[2].str()));
    if (!relation) {
      reject(RejectReason::kUnknownRelation);
      continue;
    }
    if (h == t) {
      reject(RejectReason::kSelfPair);
      continue;
    }
    PredictionRecord record{test_doc.title, numbering.entity_at[h - 1],
                            numbering.entity_at[t - 1], *relation};
    if (!seen.insert(record).second) {
      reject(RejectReason::kDuplicate);
      continue;
    }
    parsed.triples.push_back(std::move(record));
  }
  return parsed;
}

std::vector<PromptEntry> BuildPromptBundle(
    std::span<const Document> tests, std::span<const Document> train,
    const PromptBundleOptions& options, const RelationInventory& relations,
    const SubstitutionContext* context, const ExclusionSet* exclusions) {
  if (options.consistency_guidance && !options.demonstration_augmentation) {
    throw Error(ErrorCode::kValidation,
                "consistency guidance requires demonstration augmentation");
  }
  if (options.demonstration_augmentation && context == nullptr) {
    throw Error(ErrorCode::kValidation,
                "demonstration augmentation needs a substitution context");
  }
  std::vector<PromptEntry> entries(tests.size());
  std::vector<std::exception_ptr> errors(tests.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tests.size(); i = next++) {
      try {
        const Document& test = tests[i];
        PromptSpec spec;
        spec.shots = options.shots;
        spec.test_document = test;
        spec.demonstration_augmentation = options.demonstration_augmentation;
        spec.consistency_guidance = options.consistency_guidance;
        spec.relations = &relations;
        spec.markers = options.markers;
        PromptEntry& entry = entries[i];
        for (std::size_t d :
             SelectDemonstrations(train, options.shots, options.seed, test.title)) {
          spec.demonstrations.push_back(train[d]);
          entry.demonstration_titles.push_back(train[d].title);
        }
        DemoPerturber perturber{context, HashCombine(options.seed, Fnv1a64(test.title)),
                                exclusions};
        entry.test_title = test.title;
        entry.prompt_file = FileName("prompt", i);
        entry.output_file = FileName("output", i);
        entry.text = BuildPrompt(
            spec, options.demonstration_augmentation ? &perturber : nullptr);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, options.num_threads);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return entries;
}

std::string PromptManifestJson(std::span<const PromptEntry> entries,
                               const PromptBundleOptions& options) {
  ordered_json manifest;
  manifest["seed"] = options.seed;
  manifest["shots"] = options.shots;
  manifest["demonstrationAugmentation"] = options.demonstration_augmentation;
  manifest["consistencyGuidance"] = options.consistency_guidance;
  manifest["temperature"] = 0;
  manifest["markers"] = {{"open", options.markers.open},
                         {"close", options.markers.close}};
  ordered_json prompts = ordered_json::array();
  for (const PromptEntry& entry : entries) {
    prompts.push_back({{"title", entry.test_title},
                       {"demonstrations", entry.demonstration_titles},
                       {"promptFile", entry.prompt_file},
                       {"outputFile", entry.output_file}});
  }
  manifest["prompts"] = std::move(prompts);
  return manifest.dump(2) + "\n";
}

void WritePromptBundle(const std::filesystem::path& dir,
                       std::span<const PromptEntry> entries,
                       const PromptBundleOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kInternal, "cannot create " + dir.string());
  for (const PromptEntry& entry : entries) {
    WriteFile(dir / entry.prompt_file, entry.text);
  }
  WriteFile(dir / "manifest.json", PromptManifestJson(entries, options));
}

BundleParseResult ParseBundleOutputs(const std::filesystem::path& manifest,
                                     const std::filesystem::path& output_dir,
                                     std::span<const Document> tests,
                                     const RelationInventory& relations) {
  std::map<std::string, const Document*, std::less<>> by_title;
  for (const Document& doc : tests) by_title.emplace(doc.title, &doc);
  ordered_json root;
  try {
    root = ordered_json::parse(ReadFile(manifest));
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::kParse, "manifest malformed at byte " +
                                       std::to_string(e.byte));
  }
  BundleParseResult result;
  try {
    for (const auto& prompt : root.at("prompts")) {
      const std::string title = prompt.at("title").get<std::string>();
      const std::string file = prompt.at("outputFile").get<std::string>();
      auto doc = by_title.find(title);
      if (doc == by_title.end()) {
        throw Error(ErrorCode::kValidation,
                    "manifest names unknown test document '" + title + "'");
      }
      const std::filesystem::path path = output_dir / file;
      if (!std::filesystem::exists(path)) {
        result.missing_outputs.push_back(file);
        continue;
      }
      ParsedOutput parsed = ParseOutput(ReadFile(path), *doc->second, relations);
      for (auto& triple : parsed.triples) {
        result.predictions.push_back(std::move(triple));
      }
      for (auto& reject : parsed.rejects) {
        result.rejects.emplace_back(title, std::move(reject));
      }
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("manifest: ") + e.what());
  }
  return result;
}

}  // namespace envre

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

// Document model for DocRED-layout corpora: tokenized sentences, entity
// clusters with mention spans, and gold relation labels.

#ifndef ENVRE_DOCUMENT_H_
#define ENVRE_DOCUMENT_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envre/relation_inventory.h"

namespace envre {

// Half-open token interval [start, end) within one sentence.
struct TokenSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool Overlaps(const TokenSpan& other) const {
    return start < other.end && other.start < end;
  }
  auto operator<=>(const TokenSpan&) const = default;
};

struct Mention {
  std::string name;
  int sentence_index = 0;
  TokenSpan span;
  // Per-mention type as stored in the corpus; empty means "same as entity".
  std::string type;

  bool operator==(const Mention&) const = default;
};

struct Entity {
  std::vector<Mention> mentions;
  std::string type;
  std::optional<std::string> kb_id;

  // Number of distinct mention name strings.
  int alias_count() const;

  bool operator==(const Entity&) const = default;
};

struct RelationLabel {
  int head = 0;
  int tail = 0;
  std::string relation;
  std::vector<int> evidence;

  bool operator==(const RelationLabel&) const = default;
};

struct Document {
  std::string title;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Entity> entities;
  std::vector<RelationLabel> labels;

  bool operator==(const Document&) const = default;
};

// Emitted when a stored mention name disagrees with its span tokens and the
// parser overwrote it with the span-derived form.
struct NameCorrection {
  std::string title;
  int entity_index = 0;
  int mention_index = 0;
  std::string stored;
  std::string derived;
};

struct ParseOptions {
  // When set, every label's relation must belong to this inventory.
  const RelationInventory* relations = nullptr;
  std::vector<NameCorrection>* corrections = nullptr;
};

// Joins tokens with single spaces.
std::string JoinTokens(std::span<const std::string> tokens);

// Span tokens of `mention` joined by single spaces. The mention must be valid
// for `doc`.
std::string SpanText(const Document& doc, const Mention& mention);

// Distinct mention names of `entity` ordered by first occurrence in document
// order (sentence index, then span start).
std::vector<std::string> DistinctNames(const Entity& entity);

// The name carried by the most mentions; ties go to the name that occurs
// earliest in the document.
std::string MostFrequentName(const Entity& entity);

// Throws Error(kValidation) naming the document, entity and mention that
// break an invariant.
void ValidateDocument(const Document& doc,
                      const RelationInventory* relations = nullptr);

// Parses a JSON array of DocRED documents. Malformed JSON raises
// Error(kParse) carrying the byte offset; invariant violations raise
// Error(kValidation).
std::vector<Document> ParseCorpus(std::string_view bytes,
                                  const ParseOptions& options = {});
std::vector<Document> LoadCorpus(const std::filesystem::path& path,
                                 const ParseOptions& options = {});

// Canonical DocRED JSON: UTF-8, sorted keys, compact, no trailing newline.
std::string SerializeCorpus(std::span<const Document> docs);
void WriteCorpus(const std::filesystem::path& path,
                 std::span<const Document> docs);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t entities = 0;
  std::size_t triples = 0;
  double mean_entities = 0.0;
  double mean_triples = 0.0;
  // True for an empty corpus, where the means are reported as 0.
  bool undefined = false;
};

CorpusStats ComputeCorpusStats(std::span<const Document> docs);

}  // namespace envre

#endif  // ENVRE_DOCUMENT_H_

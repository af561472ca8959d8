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

// In-context-learning prompts for document-level relation extraction:
// entity marking, the instruction template with optional demonstration
// augmentation and consistency guidance, and parsing of model output back
// into prediction records.

#ifndef ENVRE_PROMPT_H_
#define ENVRE_PROMPT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envre/document.h"
#include "envre/eval.h"
#include "envre/relation_inventory.h"
#include "envre/substitution.h"

namespace envre {

// Marker templates; "{n}" is replaced by the entity number.
struct MarkerStyle {
  std::string open = "[{n}|";
  std::string close = "|{n}]";

  std::string Open(int number) const;
  std::string Close(int number) const;
};

// Entity numbers follow first-mention order, counting from 1.
struct EntityNumbering {
  std::vector<int> number_of;  // entity index -> number
  std::vector<int> entity_at;  // number - 1 -> entity index
};

EntityNumbering NumberEntities(const Document& doc);

struct MarkedDocument {
  std::string text;
  EntityNumbering numbering;
};

// Throws Error(kOverlap) when two mentions share a token.
MarkedDocument MarkEntities(const Document& doc, const MarkerStyle& style = {});

// "<h; label; t>" lines for the document's gold labels, sorted by head
// number, tail number and label.
std::string RenderTriples(const Document& doc, const EntityNumbering& numbering,
                          const RelationInventory& relations);

extern const char kConsistencyGuidance[];

struct PromptSpec {
  int shots = 1;
  std::vector<Document> demonstrations;
  Document test_document;
  bool demonstration_augmentation = false;
  bool consistency_guidance = false;
  const RelationInventory* relations = nullptr;  // null means the default
  MarkerStyle markers;

  void Validate() const;
};

// Source of entity-renamed demonstration twins.
struct DemoPerturber {
  const SubstitutionContext* context = nullptr;
  std::uint64_t seed = 0;
  const ExclusionSet* exclusions = nullptr;
};

// Entity-renamed twin of demonstration `index`.
Document DemonstrationTwin(const Document& demo, std::size_t index,
                           const DemoPerturber& perturber);

std::string BuildPrompt(const PromptSpec& spec,
                        const DemoPerturber* perturber = nullptr);

// `shots` distinct indices into `train`, drawn uniformly for `test_title`.
// Documents titled like the test document are never drawn.
std::vector<std::size_t> SelectDemonstrations(std::span<const Document> train,
                                              int shots, std::uint64_t seed,
                                              std::string_view test_title);

enum class RejectReason {
  kMalformed,
  kOutOfRange,
  kUnknownRelation,
  kSelfPair,
  kDuplicate,
};

std::string_view RejectReasonName(RejectReason reason);

struct OutputReject {
  std::size_t line_number = 0;  // 1-based
  std::string line;
  RejectReason reason = RejectReason::kMalformed;
};

struct ParsedOutput {
  std::vector<PredictionRecord> triples;
  std::vector<OutputReject> rejects;
};

// Blank lines are ignored; every other line yields a triple or a reject.
ParsedOutput ParseOutput(std::string_view text, const Document& test_doc,
                         const RelationInventory& relations);

struct PromptBundleOptions {
  int shots = 1;
  bool demonstration_augmentation = false;
  bool consistency_guidance = false;
  std::uint64_t seed = 0;
  MarkerStyle markers;
  int num_threads = 1;
};

struct PromptEntry {
  std::string test_title;
  std::vector<std::string> demonstration_titles;
  std::string prompt_file;
  std::string output_file;
  std::string text;
};

std::vector<PromptEntry> BuildPromptBundle(
    std::span<const Document> tests, std::span<const Document> train,
    const PromptBundleOptions& options, const RelationInventory& relations,
    const SubstitutionContext* context = nullptr,
    const ExclusionSet* exclusions = nullptr);

std::string PromptManifestJson(std::span<const PromptEntry> entries,
                               const PromptBundleOptions& options);

// Writes each prompt file and manifest.json into `dir`.
void WritePromptBundle(const std::filesystem::path& dir,
                       std::span<const PromptEntry> entries,
                       const PromptBundleOptions& options);

struct BundleParseResult {
  std::vector<PredictionRecord> predictions;
  // Rejects tagged with the test title.
  std::vector<std::pair<std::string, OutputReject>> rejects;
  std::vector<std::string> missing_outputs;
};

// Reads the output file named for each manifest entry from `output_dir`.
BundleParseResult ParseBundleOutputs(const std::filesystem::path& manifest,
                                     const std::filesystem::path& output_dir,
                                     std::span<const Document> tests,
                                     const RelationInventory& relations);

}  // namespace envre

#endif  // ENVRE_PROMPT_H_

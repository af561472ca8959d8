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

// Randomized and hand-built fixtures shared by the unit tests and the
// acceptance runner.

#ifndef ENVRE_TESTS_SUPPORT_FIXTURES_H_
#define ENVRE_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "envre/document.h"
#include "envre/kb.h"
#include "envre/random.h"
#include "envre/relation_inventory.h"

namespace envre::testing {

struct DocGenOptions {
  int min_sentences = 1;
  int max_sentences = 4;
  int min_entities = 2;
  int max_entities = 6;
  int max_mentions = 3;
  // Distinct names per entity are drawn from [1, max_aliases].
  int max_aliases = 3;
  int max_labels = 6;
  // Probability that an entity is NUM or TIME.
  double value_share = 0.15;
};

Document RandomDocument(SeededStream& rng, const std::string& title,
                        const DocGenOptions& options = {},
                        const RelationInventory& relations = RelationInventory::Default());

std::vector<Document> RandomCorpus(std::uint64_t seed, int count,
                                   const DocGenOptions& options = {},
                                   const std::string& title_prefix = "doc");

// Type id used by the fixture knowledge base for an entity type.
std::string FixtureTypeFor(const std::string& entity_type);

struct FixtureKbOptions {
  // Every non-value entity is linked unless this probability says otherwise.
  double link_probability = 1.0;
  int candidates_per_type = 60;
  int max_candidate_aliases = 4;
  // Namespace for candidate ids and names so independent fixtures never
  // share an item.
  std::uint64_t id_base = 500000;
};

struct FixtureKb {
  std::vector<KbItem> items;
  LinkingMap linking;
  std::vector<std::pair<std::string, std::int64_t>> popularity;

  void Fill(KbCache& cache) const;
  // JSON-lines cache file contents.
  std::string CacheJsonLines() const;
  std::string LinkingJson() const;
};

// Links entities of `docs` to fresh items typed by FixtureTypeFor and adds
// a candidate pool per type.
FixtureKb BuildFixtureKb(const std::vector<Document>& docs, std::uint64_t seed,
                         const FixtureKbOptions& options = {});

// The renaming walkthrough: one document whose ORG entity is mentioned as
// "Sony Music" (twice) and "Sony", linked to Q56760.
Document SonyMusicDocument();
// Items for that walkthrough: the original entity plus a lone record-label
// candidate "Matador Records" with alias "Matador".
std::vector<KbItem> SonyMusicItems();

}  // namespace envre::testing

#endif  // ENVRE_TESTS_SUPPORT_FIXTURES_H_

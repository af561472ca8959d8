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

#include <gtest/gtest.h>

#include <regex>

#include "envre/error.h"
#include "envre/prompt.h"
#include "support/fixtures.h"
#include "support/temp_dir.h"

namespace envre {
namespace {

const RelationInventory& Rels() { return RelationInventory::Default(); }

std::size_t Count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

Mention M(std::string name, int sentence, int start, int end) {
  Mention m;
  m.name = std::move(name);
  m.sentence_index = sentence;
  m.span = {start, end};
  return m;
}

// Three entities, five mentions. Entity 2 is mentioned first, then entity 0,
// then entity 1 (only in the last sentence).
Document ThreeEntityDocument() {
  Document doc;
  doc.title = "three";
  doc.sentences = {{"Paris", "is", "in", "France", "."},
                   {"France", "borders", "Spain", "and", "Paris", "thrives", "."}};
  Entity france;
  france.type = "LOC";
  france.mentions = {M("France", 0, 3, 4), M("France", 1, 0, 1)};
  Entity spain;
  spain.type = "LOC";
  spain.mentions = {M("Spain", 1, 2, 3)};
  Entity paris;
  paris.type = "LOC";
  paris.mentions = {M("Paris", 0, 0, 1), M("Paris", 1, 4, 5)};
  doc.entities = {france, spain, paris};
  doc.labels = {{2, 0, "P17", {0}}, {0, 1, "P361", {1}}};
  return doc;
}

TEST(MarkEntitiesTest, SingleMentionSingleRegion) {
  Document doc;
  doc.title = "one";
  doc.sentences = {{"Hello", "Berlin", "!"}};
  Entity e;
  e.type = "LOC";
  e.mentions = {M("Berlin", 0, 1, 2)};
  doc.entities = {e};
  const MarkedDocument marked = MarkEntities(doc);
  EXPECT_EQ(marked.text, "Hello [1| Berlin |1] !");
  EXPECT_EQ(Count(marked.text, "[1|"), 1u);
}

TEST(MarkEntitiesTest, NumbersFollowFirstMention) {
  const Document doc = ThreeEntityDocument();
  const MarkedDocument marked = MarkEntities(doc);
  EXPECT_EQ(marked.numbering.number_of, (std::vector<int>{2, 3, 1}));
  EXPECT_EQ(marked.numbering.entity_at, (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(marked.text,
            "[1| Paris |1] is in [2| France |2] . [2| France |2] borders [3| Spain |3] and "
            "[1| Paris |1] thrives .");
  const std::regex region(R"(\[(\d+)\|)");
  EXPECT_EQ(std::distance(std::sregex_iterator(marked.text.begin(), marked.text.end(), region),
                          std::sregex_iterator()),
            5);
}

TEST(MarkEntitiesTest, CustomMarkersAndOverlap) {
  const Document doc = ThreeEntityDocument();
  MarkerStyle style;
  style.open = "<e{n}>";
  style.close = "</e{n}>";
  EXPECT_NE(MarkEntities(doc, style).text.find("<e3> Spain </e3>"), std::string::npos);
  Document overlapping = doc;
  overlapping.entities[1].mentions.push_back(M("borders Spain", 1, 1, 3));
  try {
    MarkEntities(overlapping);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOverlap);
  }
}

TEST(RenderTriplesTest, UsesLabelsAndNumbers) {
  const Document doc = ThreeEntityDocument();
  const auto numbering = NumberEntities(doc);
  EXPECT_EQ(RenderTriples(doc, numbering, Rels()), "<1; country; 2>\n<2; part of; 3>");
}

PromptSpec OneShot() {
  PromptSpec spec;
  spec.shots = 1;
  spec.demonstrations = {ThreeEntityDocument()};
  spec.test_document = testing::SonyMusicDocument();
  return spec;
}

TEST(BuildPromptTest, OneShotTemplate) {
  const std::string prompt = BuildPrompt(OneShot());
  EXPECT_EQ(Count(prompt, "Example document:"), 1u);
  EXPECT_EQ(Count(prompt, "Test document:"), 1u);
  EXPECT_EQ(Count(prompt, "All relation triples extracted from the document:"), 2u);
  EXPECT_NE(prompt.find("country; "), std::string::npos);
  EXPECT_NE(prompt.find("sibling"), std::string::npos);
  EXPECT_EQ(prompt.find(kConsistencyGuidance), std::string::npos);
  EXPECT_NE(prompt.find("[1| Westlife |1]"), std::string::npos);
  const std::string tail = "All relation triples extracted from the document:\n";
  EXPECT_EQ(prompt.substr(prompt.size() - tail.size()), tail);
  EXPECT_EQ(BuildPrompt(OneShot()), prompt);
}

TEST(BuildPromptTest, SpecValidation) {
  PromptSpec spec = OneShot();
  spec.shots = 2;
  EXPECT_THROW(spec.Validate(), Error);
  spec = OneShot();
  spec.shots = 3;
  EXPECT_THROW(spec.Validate(), Error);
  spec = OneShot();
  spec.consistency_guidance = true;
  EXPECT_THROW(spec.Validate(), Error);
  spec.demonstration_augmentation = true;
  EXPECT_THROW(BuildPrompt(spec), Error);
}

struct DaWorld {
  std::vector<Document> docs;
  testing::FixtureKb kb;
  KbCache cache;
  SubstitutionContext ctx;
};

std::unique_ptr<DaWorld> MakeDaWorld(std::uint64_t seed) {
  auto w = std::make_unique<DaWorld>();
  testing::DocGenOptions opts;
  opts.value_share = 0.0;
  w->docs = testing::RandomCorpus(seed, 4, opts);
  w->kb = testing::BuildFixtureKb(w->docs, seed);
  w->kb.Fill(w->cache);
  w->docs = LinkEntities(w->docs, w->kb.linking);
  KbClient client(w->cache, {});
  w->ctx = BuildContext(w->docs, client);
  return w;
}

// Splits the prompt into the bodies of its example documents.
std::vector<std::string> ExampleBodies(const std::string& prompt) {
  std::vector<std::string> out;
  const std::string head = "Example document:\n";
  const std::string end = "\n\nAll relation triples extracted from the document:\n";
  for (std::size_t pos = prompt.find(head); pos != std::string::npos; pos = prompt.find(head, pos)) {
    pos += head.size();
    const std::size_t stop = prompt.find(end, pos);
    const std::size_t triples_end = prompt.find("\n\n", stop + end.size());
    out.push_back(prompt.substr(pos, stop - pos));
    out.push_back(prompt.substr(stop + end.size(), triples_end - stop - end.size()));
  }
  return out;
}

std::string StripRegions(const std::string& text) {
  static const std::regex region(R"(\[(\d+)\| .*? \|\1\])");
  return std::regex_replace(text, region, "[$1]");
}

TEST(BuildPromptTest, AugmentedDemonstrationsDifferOnlyInsideRegions) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = MakeDaWorld(seed);
    PromptSpec spec;
    spec.shots = 1;
    spec.demonstrations = {w->docs[0]};
    spec.test_document = w->docs[1];
    spec.demonstration_augmentation = true;
    const DemoPerturber perturber{&w->ctx, seed, nullptr};
    const std::string prompt = BuildPrompt(spec, &perturber);
    EXPECT_EQ(BuildPrompt(spec, &perturber), prompt);
    const auto parts = ExampleBodies(prompt);
    ASSERT_EQ(parts.size(), 4u) << prompt;
    EXPECT_EQ(parts[1], parts[3]);
    EXPECT_EQ(StripRegions(parts[0]), StripRegions(parts[2]));
    EXPECT_NE(parts[0], parts[2]);
    spec.consistency_guidance = true;
    const std::string guided = BuildPrompt(spec, &perturber);
    EXPECT_NE(guided.find(kConsistencyGuidance), std::string::npos);
    EXPECT_NE(guided.find("The only difference between two documents lies in the entity names"),
              std::string::npos);
  }
}

TEST(BuildPromptTest, ThreeShotsListThreeExamples) {
  const auto w = MakeDaWorld(42);
  PromptSpec spec;
  spec.shots = 3;
  spec.demonstrations = {w->docs[0], w->docs[1], w->docs[2]};
  spec.test_document = w->docs[3];
  EXPECT_EQ(Count(BuildPrompt(spec), "Example document:"), 3u);
  spec.demonstration_augmentation = true;
  const DemoPerturber perturber{&w->ctx, 1, nullptr};
  EXPECT_EQ(Count(BuildPrompt(spec, &perturber), "Example document:"), 6u);
}

TEST(SelectDemonstrationsTest, DistinctSeededAndAvoidsTheTestDocument) {
  const auto train = testing::RandomCorpus(5, 10);
  const auto picks = SelectDemonstrations(train, 3, 17, train[4].title);
  ASSERT_EQ(picks.size(), 3u);
  EXPECT_EQ(std::set<std::size_t>(picks.begin(), picks.end()).size(), 3u);
  for (std::size_t i : picks) EXPECT_NE(train[i].title, train[4].title);
  EXPECT_EQ(SelectDemonstrations(train, 3, 17, train[4].title), picks);
  EXPECT_THROW(SelectDemonstrations(std::vector<Document>(train.begin(), train.begin() + 2), 3, 1, "x"),
               Error);
}

TEST(ParseOutputTest, Examples) {
  const Document doc = ThreeEntityDocument();
  const ParsedOutput ok = ParseOutput("<1; country; 2>", doc, Rels());
  ASSERT_EQ(ok.triples.size(), 1u);
  EXPECT_EQ(ok.triples[0], (PredictionRecord{"three", 2, 0, "P17"}));
  EXPECT_TRUE(ok.rejects.empty());

  const ParsedOutput bad = ParseOutput("<1; nonsense-relation; 2>", doc, Rels());
  ASSERT_EQ(bad.rejects.size(), 1u);
  EXPECT_EQ(bad.rejects[0].reason, RejectReason::kUnknownRelation);
  EXPECT_EQ(RejectReasonName(bad.rejects[0].reason), "UNKNOWN_RELATION");
}

TEST(ParseOutputTest, MixedTenLineFixture) {
  const Document doc = ThreeEntityDocument();
  const std::string text =
      "<1; country; 2>\n"
      "  < 2 ; Part  Of ; 3 >  \n"
      "<1; COUNTRY; 2>\n"
      "<4; country; 1>\n"
      "<0; country; 1>\n"
      "<2; P17; 2>\n"
      "<1; located nowhere; 3>\n"
      "1; country; 2\n"
      "\n"
      "The answer is <1; country; 2>\n"
      "<3; part of; 2>\n";
  const ParsedOutput out = ParseOutput(text, doc, Rels());
  EXPECT_EQ(out.triples.size() + out.rejects.size(), 10u);
  EXPECT_EQ(out.triples.size(), 3u);
  std::map<RejectReason, int> reasons;
  for (const OutputReject& r : out.rejects) ++reasons[r.reason];
  EXPECT_EQ(reasons[RejectReason::kDuplicate], 1);
  EXPECT_EQ(reasons[RejectReason::kOutOfRange], 2);
  EXPECT_EQ(reasons[RejectReason::kSelfPair], 1);
  EXPECT_EQ(reasons[RejectReason::kUnknownRelation], 1);
  EXPECT_EQ(reasons[RejectReason::kMalformed], 2);
  EXPECT_EQ(out.rejects.back().line_number, 10u);
}

TEST(ParseOutputPropertyTest, RenderedGoldRoundTrips) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SeededStream rng(seed);
    const Document doc = testing::RandomDocument(rng, "rt" + std::to_string(seed));
    const std::string rendered = RenderTriples(doc, NumberEntities(doc), Rels());
    const ParsedOutput out = ParseOutput(rendered, doc, Rels());
    ASSERT_TRUE(out.rejects.empty()) << rendered;
    std::set<PredictionRecord> gold;
    for (const RelationLabel& l : doc.labels) gold.insert({doc.title, l.head, l.tail, l.relation});
    EXPECT_EQ(std::set<PredictionRecord>(out.triples.begin(), out.triples.end()), gold);
    EXPECT_EQ(out.triples.size(), gold.size());
  }
}

TEST(PromptBundleTest, WriteAndParse) {
  const auto w = MakeDaWorld(8);
  const std::vector<Document> tests = {w->docs[0], w->docs[1]};
  const std::vector<Document> train = {w->docs[2], w->docs[3]};
  PromptBundleOptions options;
  options.seed = 3;
  options.demonstration_augmentation = true;
  options.consistency_guidance = true;
  const auto entries = BuildPromptBundle(tests, train, options, Rels(), &w->ctx);
  ASSERT_EQ(entries.size(), 2u);
  options.num_threads = 3;
  const auto threaded = BuildPromptBundle(tests, train, options, Rels(), &w->ctx);
  for (std::size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(threaded[i].text, entries[i].text);

  testing::TempDir dir;
  WritePromptBundle(dir.path(), entries, options);
  const std::string manifest = testing::ReadFile(dir.File("manifest.json"));
  EXPECT_NE(manifest.find("\"temperature\": 0"), std::string::npos);
  EXPECT_NE(manifest.find("\"consistencyGuidance\": true"), std::string::npos);
  EXPECT_EQ(testing::ReadFile(dir.File(entries[0].prompt_file)), entries[0].text);

  const std::string gold0 = RenderTriples(tests[0], NumberEntities(tests[0]), Rels());
  testing::WriteFile(dir.File(entries[0].output_file), gold0 + "\nnot a triple\n");
  const BundleParseResult parsed =
      ParseBundleOutputs(dir.File("manifest.json"), dir.path(), tests, Rels());
  EXPECT_EQ(parsed.missing_outputs, std::vector<std::string>{entries[1].output_file});
  ASSERT_EQ(parsed.rejects.size(), 1u);
  EXPECT_EQ(parsed.rejects[0].first, tests[0].title);
  std::set<PredictionRecord> gold;
  for (const RelationLabel& l : tests[0].labels) gold.insert({tests[0].title, l.head, l.tail, l.relation});
  EXPECT_EQ(std::set<PredictionRecord>(parsed.predictions.begin(), parsed.predictions.end()), gold);
}

}  // namespace
}  // namespace envre

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

#include <algorithm>
#include <cmath>

#include "envre/error.h"
#include "envre/eval.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace envre {
namespace {

// One sentence per entity group; entity i is the token "e<i>" in sentence
// i / per_sentence.
Document FlatDocument(const std::string& title, int entities, int per_sentence) {
  Document doc;
  doc.title = title;
  for (int i = 0; i < entities; ++i) {
    const int s = i / per_sentence;
    if (static_cast<int>(doc.sentences.size()) <= s) doc.sentences.emplace_back();
    Entity e;
    e.type = "MISC";
    Mention m;
    m.name = title + "_e" + std::to_string(i);
    m.sentence_index = s;
    m.span = {static_cast<int>(doc.sentences[s].size()), static_cast<int>(doc.sentences[s].size()) + 1};
    doc.sentences[s].push_back(m.name);
    e.mentions = {m};
    doc.entities.push_back(e);
  }
  return doc;
}

std::vector<PredictionRecord> GoldAsPredictions(std::span<const Document> docs) {
  std::vector<PredictionRecord> out;
  for (const Document& d : docs) {
    for (const RelationLabel& l : d.labels) out.push_back({d.title, l.head, l.tail, l.relation});
  }
  return out;
}

// Gold predictions thinned out and mixed with random wrong guesses.
std::vector<PredictionRecord> NoisyPredictions(std::span<const Document> docs, SeededStream& rng) {
  std::vector<PredictionRecord> out;
  const auto& rels = RelationInventory::Default().relations();
  for (const Document& d : docs) {
    for (const RelationLabel& l : d.labels) {
      if (rng.Uniform(3) != 0) out.push_back({d.title, l.head, l.tail, l.relation});
    }
    const int noise = rng.UniformInt(0, 4);
    const int n = static_cast<int>(d.entities.size());
    for (int i = 0; i < noise; ++i) {
      const int h = rng.UniformInt(0, n - 1);
      int t = rng.UniformInt(0, n - 2);
      if (t >= h) ++t;
      out.push_back({d.title, h, t, rels[rng.Uniform(rels.size())].id});
    }
  }
  if (!out.empty()) {
    const std::size_t dup = rng.Uniform(out.size());
    out.push_back(out[dup]);
  }
  return out;
}

TEST(ScoreTest, PerfectPredictions) {
  const auto gold = testing::RandomCorpus(1, 5);
  const ScoreReport r = Score(gold, GoldAsPredictions(gold), {});
  EXPECT_DOUBLE_EQ(r.overall.precision.value, 1.0);
  EXPECT_DOUBLE_EQ(r.overall.recall.value, 1.0);
  EXPECT_DOUBLE_EQ(r.overall.f1, 1.0);
  EXPECT_DOUBLE_EQ(r.ign_f1, 1.0);
}

TEST(ScoreTest, NoPredictions) {
  const auto gold = testing::RandomCorpus(2, 5);
  const ScoreReport r = Score(gold, std::vector<PredictionRecord>{}, {});
  EXPECT_EQ(r.overall.f1, 0.0);
  EXPECT_EQ(r.overall.precision.value, 0.0);
  EXPECT_TRUE(r.overall.precision.undefined);
  const ScoreReport empty = Score(std::vector<Document>{}, std::vector<PredictionRecord>{}, {});
  EXPECT_TRUE(empty.overall.recall.undefined);
  EXPECT_EQ(empty.overall.f1, 0.0);
}

TEST(ScoreTest, InvalidPredictionsAreRejected) {
  const std::vector<Document> gold = {testing::SonyMusicDocument()};
  EXPECT_THROW(Score(gold, std::vector<PredictionRecord>{{"Nope", 0, 1, "P17"}}, {}), Error);
  EXPECT_THROW(Score(gold, std::vector<PredictionRecord>{{"Westlife", 0, 9, "P17"}}, {}), Error);
}

TEST(ScoreTest, HandEnumeratedFixture) {
  // Five documents, 7 gold facts, 6 distinct predictions of which 4 hit.
  std::vector<Document> gold;
  for (int i = 0; i < 5; ++i) gold.push_back(FlatDocument("d" + std::to_string(i), 3, 3));
  gold[0].labels = {{0, 1, "P17", {}}, {1, 2, "P131", {}}};
  gold[1].labels = {{0, 2, "P27", {}}};
  gold[2].labels = {{2, 0, "P17", {}}, {0, 1, "P17", {}}};
  gold[3].labels = {{1, 0, "P150", {}}};
  gold[4].labels = {{0, 1, "P361", {}}};
  const std::vector<PredictionRecord> preds = {
      {"d0", 0, 1, "P17"}, {"d0", 1, 2, "P17"}, {"d1", 0, 2, "P27"}, {"d1", 0, 2, "P27"},
      {"d2", 2, 0, "P17"}, {"d3", 0, 1, "P150"}, {"d4", 0, 1, "P361"}};
  const ScoreReport r = Score(gold, preds, {});
  EXPECT_EQ(r.overall.true_positives, 4u);
  EXPECT_EQ(r.overall.predicted, 6u);
  EXPECT_EQ(r.overall.gold, 7u);
  EXPECT_DOUBLE_EQ(r.overall.precision.value, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.overall.recall.value, 4.0 / 7.0);
  EXPECT_NEAR(r.overall.f1, 2.0 * (4.0 / 6.0) * (4.0 / 7.0) / (4.0 / 6.0 + 4.0 / 7.0), 1e-12);

  const auto oracle = testing::OracleScore(gold, preds, {});
  EXPECT_EQ(oracle.true_positives, 4u);
  EXPECT_NEAR(oracle.f1, r.overall.f1, 1e-12);
}

TEST(ScoreTest, IgnF1DropsFactsSeenInTraining) {
  std::vector<Document> gold = {FlatDocument("g", 3, 3)};
  gold[0].labels = {{0, 1, "P17", {}}, {1, 2, "P17", {}}};
  Document train = FlatDocument("g", 3, 3);
  train.title = "train";
  train.labels = {{0, 1, "P17", {}}};
  const std::vector<Document> train_docs = {train};
  const ScoreReport r = Score(gold, GoldAsPredictions(gold), BuildTrainFacts(train_docs));
  EXPECT_EQ(r.correct_in_train, 1u);
  EXPECT_DOUBLE_EQ(r.ign_precision.value, 1.0);
  EXPECT_NEAR(r.ign_f1, 1.0, 1e-12);
  const std::vector<PredictionRecord> preds = {{"g", 0, 1, "P17"}, {"g", 0, 2, "P6"}};
  const ScoreReport partial = Score(gold, preds, BuildTrainFacts(train_docs));
  EXPECT_DOUBLE_EQ(partial.ign_precision.value, 0.0);
  EXPECT_DOUBLE_EQ(partial.ign_f1, 0.0);
}

TEST(ScorePropertyTest, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    SeededStream rng(seed);
    testing::DocGenOptions opts;
    opts.max_entities = 6;
    const auto gold = testing::RandomCorpus(seed, 1 + static_cast<int>(rng.Uniform(8)), opts);
    const auto train = testing::RandomCorpus(seed + 9999, 4, opts, "train");
    // Some train documents reuse gold names so the Ign path is exercised.
    std::vector<Document> train_docs = train;
    for (std::size_t i = 0; i < gold.size(); i += 2) {
      Document copy = gold[i];
      copy.title = "copy_" + copy.title;
      train_docs.push_back(copy);
    }
    const auto preds = NoisyPredictions(gold, rng);
    const ScoreReport r = Score(gold, preds, BuildTrainFacts(train_docs));
    const auto o = testing::OracleScore(gold, preds, train_docs);
    ASSERT_EQ(r.overall.true_positives, o.true_positives) << seed;
    ASSERT_EQ(r.overall.predicted, o.predicted) << seed;
    ASSERT_EQ(r.overall.gold, o.gold) << seed;
    ASSERT_EQ(r.correct_in_train, o.correct_in_train) << seed;
    ASSERT_NEAR(r.overall.f1, o.f1, 1e-12) << seed;
    ASSERT_NEAR(r.ign_f1, o.ign_f1, 1e-12) << seed;
    ASSERT_GE(r.ign_f1, 0.0);
    ASSERT_LE(r.ign_f1, 1.0);

    auto intra = [](const Document& d, int h, int t) { return testing::OracleIntra(d, h, t); };
    auto inter = [](const Document& d, int h, int t) { return !testing::OracleIntra(d, h, t); };
    const auto oi = testing::OracleScore(gold, preds, {}, intra);
    const auto oe = testing::OracleScore(gold, preds, {}, inter);
    ASSERT_NEAR(r.intra.f1, oi.f1, 1e-12) << seed;
    ASSERT_NEAR(r.inter.f1, oe.f1, 1e-12) << seed;
    ASSERT_EQ(r.intra.gold + r.inter.gold, r.overall.gold);
    ASSERT_EQ(r.intra.predicted + r.inter.predicted, r.overall.predicted);
    ASSERT_EQ(r.intra.true_positives + r.inter.true_positives, r.overall.true_positives);
  }
}

TEST(ScorePropertyTest, PermutationAndDuplicationInvariant) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SeededStream rng(seed);
    const auto gold = testing::RandomCorpus(seed, 4);
    auto preds = NoisyPredictions(gold, rng);
    const ScoreReport base = Score(gold, preds, {});
    auto shuffled = preds;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.Uniform(i)]);
    shuffled.insert(shuffled.end(), preds.begin(), preds.end());
    const ScoreReport again = Score(gold, shuffled, {});
    EXPECT_EQ(again.overall.true_positives, base.overall.true_positives);
    EXPECT_EQ(again.overall.predicted, base.overall.predicted);
    EXPECT_DOUBLE_EQ(again.overall.f1, base.overall.f1);
    EXPECT_DOUBLE_EQ(base.ign_f1, base.overall.f1);
  }
}

TEST(IntraInterTest, SingleSentenceLeavesInterUndefined) {
  std::vector<Document> gold = {FlatDocument("s", 4, 4)};
  gold[0].labels = {{0, 1, "P17", {}}, {2, 3, "P17", {}}};
  const auto [intra, inter] = IntraInterScore(gold, GoldAsPredictions(gold));
  EXPECT_DOUBLE_EQ(intra.f1, 1.0);
  EXPECT_EQ(inter.f1, 0.0);
  EXPECT_TRUE(inter.f1_undefined);
  EXPECT_EQ(inter.gold, 0u);
}

TEST(IntraInterTest, WrongInterPairLeavesIntraIntact) {
  // Entities 0,1 share sentence 0; entity 2 sits alone in sentence 1.
  std::vector<Document> gold = {FlatDocument("x", 3, 2)};
  gold[0].labels = {{0, 1, "P17", {}}, {0, 2, "P131", {}}};
  const std::vector<PredictionRecord> preds = {{"x", 0, 1, "P17"}, {"x", 0, 2, "P17"}};
  const auto [intra, inter] = IntraInterScore(gold, preds);
  EXPECT_DOUBLE_EQ(intra.f1, 1.0);
  EXPECT_DOUBLE_EQ(inter.f1, 0.0);
  EXPECT_EQ(inter.gold, 1u);
  EXPECT_TRUE(IsIntraSentencePair(gold[0], 1, 0));
  EXPECT_FALSE(IsIntraSentencePair(gold[0], 1, 2));
}

TEST(BucketTest, TwoPointSlope) {
  const std::vector<double> x = {10, 20};
  const std::vector<double> y = {70, 60};
  const auto [slope, undefined] = OlsSlope(x, y);
  EXPECT_FALSE(undefined);
  EXPECT_NEAR(slope, -1.0, 1e-12);
  EXPECT_TRUE(OlsSlope(std::vector<double>{3}, std::vector<double>{1}).second);
}

// Document with `entities` entities and ten chain labels; the first `hits`
// are predicted correctly and the rest are predicted with a wrong relation.
std::pair<Document, std::vector<PredictionRecord>> BucketDoc(const std::string& title,
                                                             int entities, int hits) {
  Document doc = FlatDocument(title, entities, entities);
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 10; ++i) {
    doc.labels.push_back({i, i + 1, "P17", {}});
    preds.push_back({title, i, i + 1, i < hits ? "P17" : "P6"});
  }
  return {doc, preds};
}

TEST(BucketTest, EndToEndSlopeAndEmptyBuckets) {
  auto [a, pa] = BucketDoc("a", 12, 7);
  auto [b, pb] = BucketDoc("b", 18, 6);
  const std::vector<Document> gold = {a, b};
  std::vector<PredictionRecord> preds = pa;
  preds.insert(preds.end(), pb.begin(), pb.end());
  const std::vector<int> edges = {5, 15, 25, 40};
  const BucketReport r = BucketByEntityCount(gold, preds, edges);
  ASSERT_EQ(r.buckets.size(), 2u);
  EXPECT_DOUBLE_EQ(r.buckets[0].midpoint, 10.0);
  EXPECT_DOUBLE_EQ(r.buckets[1].midpoint, 20.0);
  EXPECT_NEAR(r.buckets[0].score.f1, 0.7, 1e-12);
  EXPECT_NEAR(r.buckets[1].score.f1, 0.6, 1e-12);
  EXPECT_NEAR(r.slope, -1.0, 1e-9);
  ASSERT_EQ(r.empty_buckets.size(), 1u);
  EXPECT_EQ(r.empty_buckets[0], (std::pair<int, int>{25, 40}));

  auto [c, pc] = BucketDoc("c", 18, 7);
  const std::vector<Document> flat_gold = {a, c};
  std::vector<PredictionRecord> flat = pa;
  flat.insert(flat.end(), pc.begin(), pc.end());
  EXPECT_NEAR(BucketByEntityCount(flat_gold, flat, edges).slope, 0.0, 1e-12);
  EXPECT_THROW(BucketByEntityCount(gold, preds, std::vector<int>{5, 5}), Error);
  EXPECT_THROW(BucketByEntityCount(gold, preds, std::vector<int>{5}), Error);
}

TEST(SubstitutionRateTest, CountsAlteredEntities) {
  std::vector<Document> docs = {FlatDocument("r", 10, 10)};
  SubstitutionPlan plan;
  plan.document_title = "r";
  for (int i = 0; i < 10; ++i) {
    EntityAssignment a;
    a.entity_index = i;
    a.kind = i == 3 ? AssignmentKind::kSkipped : AssignmentKind::kSubstituted;
    if (a.kind == AssignmentKind::kSubstituted) a.alias_map = {{"x", "y"}};
    plan.assignments.push_back(a);
  }
  const std::vector<SubstitutionPlan> plans = {plan};
  EXPECT_DOUBLE_EQ(SubstitutionRate(plans, docs).value, 0.9);

  SubstitutionPlan skipped = plan;
  for (auto& a : skipped.assignments) {
    a.kind = AssignmentKind::kSkipped;
    a.alias_map.clear();
  }
  EXPECT_DOUBLE_EQ(SubstitutionRate(std::vector<SubstitutionPlan>{skipped}, docs).value, 0.0);
  SubstitutionPlan unchanged_value = skipped;
  unchanged_value.assignments[0].kind = AssignmentKind::kRuleBased;
  EXPECT_DOUBLE_EQ(SubstitutionRate(std::vector<SubstitutionPlan>{unchanged_value}, docs).value, 0.0);
  SubstitutionPlan short_plan = plan;
  short_plan.assignments.pop_back();
  EXPECT_THROW(SubstitutionRate(std::vector<SubstitutionPlan>{short_plan}, docs), Error);
}

TEST(SeenMentionTest, Proportions) {
  Document train = FlatDocument("t", 3, 3);
  Document test = FlatDocument("t", 4, 4);
  const std::vector<Document> tr = {train};
  const std::vector<Document> te = {test};
  EXPECT_DOUBLE_EQ(SeenMentionProportion(te, tr).value, 0.75);
  EXPECT_DOUBLE_EQ(SeenMentionProportion(tr, tr).value, 1.0);
  const std::vector<Document> other = {FlatDocument("u", 3, 3)};
  EXPECT_DOUBLE_EQ(SeenMentionProportion(other, tr).value, 0.0);
}

AttributionRecord Attr(std::vector<std::string> ranked, std::set<std::string> important) {
  return {{"d", 0, 1, "P17"}, std::move(ranked), std::move(important)};
}

TEST(MapTest, HandValues) {
  const std::vector<AttributionRecord> all = {Attr({"a", "b", "c"}, {"a", "b", "c"})};
  for (const auto& [k, v] : MapCurve(all, 3)) EXPECT_DOUBLE_EQ(v, 1.0) << k;
  const std::vector<AttributionRecord> none = {Attr({"a", "b", "c"}, {"z"})};
  for (const auto& [k, v] : MapCurve(none, 3)) EXPECT_DOUBLE_EQ(v, 0.0) << k;
  const std::vector<AttributionRecord> half = {Attr({"a", "b"}, {"a"})};
  EXPECT_DOUBLE_EQ(MapCurve(half, 2).back().second, 0.5);
  EXPECT_DOUBLE_EQ(MapCurve(half, 2).front().second, 1.0);
  EXPECT_THROW(MapCurve(half, 3), Error);
  EXPECT_THROW(MapCurve(half, 0), Error);
}

TEST(MapPropertyTest, BoundedOrderFreeAndMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SeededStream rng(seed);
    std::vector<AttributionRecord> records;
    const int t = 1 + static_cast<int>(rng.Uniform(6));
    for (int r = 0; r < t; ++r) {
      std::vector<std::string> ranked;
      std::set<std::string> important;
      for (int w = 0; w < 12; ++w) {
        ranked.push_back("w" + std::to_string(w));
        if (rng.Uniform(3) == 0) important.insert(ranked.back());
      }
      for (std::size_t i = ranked.size(); i > 1; --i) std::swap(ranked[i - 1], ranked[rng.Uniform(i)]);
      records.push_back(Attr(ranked, important));
    }
    const auto curve = MapCurve(records, 10);
    auto reversed = records;
    std::reverse(reversed.begin(), reversed.end());
    const auto curve_rev = MapCurve(reversed, 10);
    for (int k = 1; k <= 10; ++k) {
      const double v = curve[k - 1].second;
      ASSERT_EQ(curve[k - 1].first, k);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      ASSERT_NEAR(v, curve_rev[k - 1].second, 1e-12);
      ASSERT_NEAR(v, testing::OracleMap(records, k), 1e-12) << seed << " K=" << k;
    }
  }
}

TEST(EvalIoTest, PredictionRoundTrip) {
  const std::vector<PredictionRecord> preds = {{"Westlife", 0, 1, "P264"}, {"Westlife", 1, 0, "P527"}};
  const std::string text = PredictionsToJson(preds);
  EXPECT_NE(text.find("\"h_idx\""), std::string::npos);
  EXPECT_EQ(ParsePredictions(text), preds);
  EXPECT_EQ(ParsePredictions(R"([{"title":"T","h_idx":2,"t_idx":0,"r":"P17"}])")[0],
            (PredictionRecord{"T", 2, 0, "P17"}));
  EXPECT_THROW(ParsePredictions("[{"), Error);
  EXPECT_THROW(ParsePredictions(R"([{"title":"T"}])"), Error);
}

TEST(EvalIoTest, AttributionParsing) {
  const auto records = ParseAttributions(
      R"({"factId":{"title":"d","h":0,"t":1,"r":"P17"},"rankedWords":["a","b"],"goldImportant":["a"]})"
      "\n\n");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].fact.relation, "P17");
  EXPECT_THROW(ParseAttributions(
                   R"({"factId":{"title":"d","h":0,"t":1,"r":"P17"},"rankedWords":["a","a"],"goldImportant":[]})"),
               Error);
}

TEST(EvalReportTest, JsonAndTableMentionEveryMetric) {
  const auto gold = testing::RandomCorpus(4, 3);
  const ScoreReport r = Score(gold, GoldAsPredictions(gold), {});
  const std::string json = ScoreReportToJson(r, nullptr);
  for (const char* key : {"overall", "ign", "intra", "inter"}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
  const std::string table = ScoreReportToTable(r, nullptr);
  EXPECT_NE(table.find("ign"), std::string::npos);
}

}  // namespace
}  // namespace envre

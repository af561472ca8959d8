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

// Relation-extraction scoring and robustness analyses: F1 / Ign F1,
// intra- vs inter-sentence F1, entity-count buckets with a linear fit,
// substitution rate, seen-mention proportion, and MAP over attributions.

#ifndef ENVRE_EVAL_H_
#define ENVRE_EVAL_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "envre/document.h"
#include "envre/substitution.h"

namespace envre {

struct PredictionRecord {
  std::string title;
  int head = 0;
  int tail = 0;
  std::string relation;

  auto operator<=>(const PredictionRecord&) const = default;
};

// [{"title": str, "h_idx": int, "t_idx": int, "r": str}, ...]
std::vector<PredictionRecord> ParsePredictions(std::string_view json_text);
std::vector<PredictionRecord> LoadPredictions(const std::filesystem::path& path);
std::string PredictionsToJson(std::span<const PredictionRecord> preds);

// A ratio whose 0/0 case is reported as 0 with `undefined` set.
struct Fraction {
  double value = 0.0;
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  bool undefined = true;
};

Fraction MakeFraction(std::size_t numerator, std::size_t denominator);

struct PrfScore {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  Fraction precision;
  Fraction recall;
  double f1 = 0.0;
  bool f1_undefined = true;
};

double HarmonicMean(double p, double r);

struct ScoreReport {
  PrfScore overall;
  std::size_t correct_in_train = 0;
  Fraction ign_precision;
  double ign_f1 = 0.0;
  PrfScore intra;
  PrfScore inter;
};

// (head mention name, tail mention name, relation) facts seen in training.
using TrainFacts = std::set<std::tuple<std::string, std::string, std::string>>;

TrainFacts BuildTrainFacts(std::span<const Document> train);

// Throws Error(kValidation) when a prediction names an unknown document or
// entity, or when gold titles are not unique.
ScoreReport Score(std::span<const Document> gold,
                  std::span<const PredictionRecord> preds,
                  const TrainFacts& train_facts);

std::pair<PrfScore, PrfScore> IntraInterScore(
    std::span<const Document> gold, std::span<const PredictionRecord> preds);

// True when the two entities have mentions in a common sentence.
bool IsIntraSentencePair(const Document& doc, int head, int tail);

struct BucketResult {
  int lo = 0;  // inclusive
  int hi = 0;  // exclusive
  double midpoint = 0.0;
  std::size_t documents = 0;
  PrfScore score;
};

struct BucketReport {
  std::vector<BucketResult> buckets;
  // Buckets without documents; they do not enter the fit.
  std::vector<std::pair<int, int>> empty_buckets;
  // OLS slope of F1 (percent) against bucket midpoint.
  double slope = 0.0;
  bool slope_undefined = true;
};

// Buckets are [edges[i], edges[i+1]); edges must be strictly increasing.
BucketReport BucketByEntityCount(std::span<const Document> gold,
                                 std::span<const PredictionRecord> preds,
                                 std::span<const int> edges);

// Unweighted least-squares slope; nullopt-like `undefined` when fewer than
// two distinct x values.
std::pair<double, bool> OlsSlope(std::span<const double> x,
                                 std::span<const double> y);

// Altered entities over all entities. An entity counts as altered when it
// received a knowledge-base substitute or a changed rule-based value.
Fraction SubstitutionRate(std::span<const SubstitutionPlan> plans,
                          std::span<const Document> docs);

// Share of test mention occurrences whose name is a training mention name.
Fraction SeenMentionProportion(std::span<const Document> test,
                               std::span<const Document> train);

struct AttributionRecord {
  PredictionRecord fact;
  std::vector<std::string> ranked_words;
  std::set<std::string> gold_important;
};

// JSON lines: {"factId": {"title","h","t","r"}, "rankedWords": [...],
// "goldImportant": [...]}. Word ids may be strings or integers.
std::vector<AttributionRecord> ParseAttributions(std::string_view jsonl);
std::vector<AttributionRecord> LoadAttributions(const std::filesystem::path& path);

// MAP(K) for K = 1..kmax, each fact's AP normalized by 1/K.
std::vector<std::pair<int, double>> MapCurve(
    std::span<const AttributionRecord> records, int kmax);

std::string ScoreReportToJson(const ScoreReport& report,
                              const BucketReport* buckets);
std::string ScoreReportToTable(const ScoreReport& report,
                               const BucketReport* buckets);

}  // namespace envre

#endif  // ENVRE_EVAL_H_

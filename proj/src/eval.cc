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

#include "envre/eval.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "envre/error.h"
#include "envre/text_util.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

using FactKey = std::tuple<std::string, int, int, std::string>;

FactKey Key(const PredictionRecord& p) {
  return {p.title, p.head, p.tail, p.relation};
}

std::map<std::string, const Document*, std::less<>> IndexByTitle(
    std::span<const Document> docs) {
  std::map<std::string, const Document*, std::less<>> index;
  for (const Document& doc : docs) {
    if (!index.emplace(doc.title, &doc).second) {
      throw Error(ErrorCode::kValidation,
                  "duplicate gold document title '" + doc.title + "'");
    }
  }
  return index;
}

std::set<FactKey> GoldFacts(std::span<const Document> gold) {
  std::set<FactKey> facts;
  for (const Document& doc : gold) {
    for (const RelationLabel& l : doc.labels) {
      facts.emplace(doc.title, l.head, l.tail, l.relation);
    }
  }
  return facts;
}

std::set<FactKey> CheckedPredictions(
    const std::map<std::string, const Document*, std::less<>>& index,
    std::span<const PredictionRecord> preds) {
  std::set<FactKey> out;
  for (const PredictionRecord& p : preds) {
    auto it = index.find(p.title);
    if (it == index.end()) {
      throw Error(ErrorCode::kValidation,
                  "prediction references unknown document '" + p.title + "'");
    }
    const int n = static_cast<int>(it->second->entities.size());
    if (p.head < 0 || p.head >= n || p.tail < 0 || p.tail >= n) {
      throw Error(ErrorCode::kValidation,
                  "prediction (" + std::to_string(p.head) + ", " +
                      std::to_string(p.tail) + ") out of range for '" +
                      p.title + "' with " + std::to_string(n) + " entities");
    }
    out.insert(Key(p));
  }
  return out;
}

PrfScore MakePrf(std::size_t tp, std::size_t predicted, std::size_t gold) {
  PrfScore s;
  s.true_positives = tp;
  s.predicted = predicted;
  s.gold = gold;
  s.precision = MakeFraction(tp, predicted);
  s.recall = MakeFraction(tp, gold);
  s.f1_undefined = s.precision.value + s.recall.value == 0.0;
  s.f1 = HarmonicMean(s.precision.value, s.recall.value);
  return s;
}

PrfScore PrfOf(const std::set<FactKey>& gold, const std::set<FactKey>& preds) {
  std::size_t tp = 0;
  for (const FactKey& p : preds) tp += gold.count(p);
  return MakePrf(tp, preds.size(), gold.size());
}

bool InTrain(const Document& doc, int head, int tail, const std::string& r,
             const TrainFacts& train) {
  for (const Mention& h : doc.entities[head].mentions) {
    for (const Mention& t : doc.entities[tail].mentions) {
      if (train.count({h.name, t.name, r}) > 0) return true;
    }
  }
  return false;
}

ordered_json PrfJson(const PrfScore& s) {
  ordered_json out;
  out["precision"] = s.precision.value;
  out["recall"] = s.recall.value;
  out["f1"] = s.f1;
  out["tp"] = s.true_positives;
  out["predicted"] = s.predicted;
  out["gold"] = s.gold;
  out["undefined"] = s.f1_undefined;
  return out;
}

std::vector<std::string> WordList(const json& node, const std::string& ctx) {
  if (!node.is_array()) {
    throw Error(ErrorCode::kValidation, ctx + ": expected an array of words");
  }
  std::vector<std::string> out;
  for (const json& w : node) {
    if (w.is_string()) {
      out.push_back(w.get<std::string>());
    } else if (w.is_number_integer()) {
      out.push_back(std::to_string(w.get<long long>()));
    } else {
      throw Error(ErrorCode::kValidation, ctx + ": word ids must be strings or integers");
    }
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kValidation,
                std::string("cannot read ") + what + " " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string Percent(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v * 100.0;
  return out.str();
}

}  // namespace

Fraction MakeFraction(std::size_t numerator, std::size_t denominator) {
  Fraction f;
  f.numerator = numerator;
  f.denominator = denominator;
  f.undefined = denominator == 0;
  f.value = f.undefined ? 0.0
                        : static_cast<double>(numerator) /
                              static_cast<double>(denominator);
  return f;
}

double HarmonicMean(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::vector<PredictionRecord> ParsePredictions(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "prediction file malformed at byte " + std::to_string(e.byte));
  }
  if (!root.is_array()) {
    throw Error(ErrorCode::kValidation, "prediction file must be a JSON array");
  }
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < root.size(); ++i) {
    try {
      const json& p = root[i];
      out.push_back({p.at("title").get<std::string>(), p.at("h_idx").get<int>(),
                     p.at("t_idx").get<int>(), p.at("r").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation,
                  "prediction " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PredictionRecord> LoadPredictions(const std::filesystem::path& path) {
  return ParsePredictions(ReadFile(path, "predictions"));
}

std::string PredictionsToJson(std::span<const PredictionRecord> preds) {
  ordered_json out = ordered_json::array();
  for (const PredictionRecord& p : preds) {
    ordered_json item;
    item["title"] = p.title;
    item["h_idx"] = p.head;
    item["t_idx"] = p.tail;
    item["r"] = p.relation;
    out.push_back(std::move(item));
  }
  return out.dump();
}

TrainFacts BuildTrainFacts(std::span<const Document> train) {
  TrainFacts facts;
  for (const Document& doc : train) {
    for (const RelationLabel& l : doc.labels) {
      for (const Mention& h : doc.entities[l.head].mentions) {
        for (const Mention& t : doc.entities[l.tail].mentions) {
          facts.emplace(h.name, t.name, l.relation);
        }
      }
    }
  }
  return facts;
}

bool IsIntraSentencePair(const Document& doc, int head, int tail) {
  std::set<int> head_sentences;
  for (const Mention& m : doc.entities[head].mentions) {
    head_sentences.insert(m.sentence_index);
  }
  for (const Mention& m : doc.entities[tail].mentions) {
    if (head_sentences.count(m.sentence_index) > 0) return true;
  }
  return false;
}

std::pair<PrfScore, PrfScore> IntraInterScore(
    std::span<const Document> gold, std::span<const PredictionRecord> preds) {
  const auto index = IndexByTitle(gold);
  const std::set<FactKey> gold_facts = GoldFacts(gold);
  const std::set<FactKey> pred_facts = CheckedPredictions(index, preds);
  std::set<FactKey> gold_intra, gold_inter, pred_intra, pred_inter;
  auto intra = [&](const FactKey& f) {
    const Document& doc = *index.find(std::get<0>(f))->second;
    return IsIntraSentencePair(doc, std::get<1>(f), std::get<2>(f));
  };
  for (const FactKey& f : gold_facts) (intra(f) ? gold_intra : gold_inter).insert(f);
  for (const FactKey& f : pred_facts) (intra(f) ? pred_intra : pred_inter).insert(f);
  return {PrfOf(gold_intra, pred_intra), PrfOf(gold_inter, pred_inter)};
}

ScoreReport Score(std::span<const Document> gold,
                  std::span<const PredictionRecord> preds,
                  const TrainFacts& train_facts) {
  const auto index = IndexByTitle(gold);
  const std::set<FactKey> gold_facts = GoldFacts(gold);
  const std::set<FactKey> pred_facts = CheckedPredictions(index, preds);

  ScoreReport report;
  report.overall = PrfOf(gold_facts, pred_facts);
  for (const FactKey& f : pred_facts) {
    if (gold_facts.count(f) == 0) continue;
    const Document& doc = *index.find(std::get<0>(f))->second;
    if (InTrain(doc, std::get<1>(f), std::get<2>(f), std::get<3>(f),
                train_facts)) {
      ++report.correct_in_train;
    }
  }
  report.ign_precision =
      MakeFraction(report.overall.true_positives - report.correct_in_train,
                   pred_facts.size() - report.correct_in_train);
  report.ign_f1 =
      HarmonicMean(report.ign_precision.value, report.overall.recall.value);
  std::tie(report.intra, report.inter) = IntraInterScore(gold, preds);
  return report;
}

std::pair<double, bool> OlsSlope(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return {0.0, true};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) return {0.0, true};
  return {sxy / sxx, false};
}

BucketReport BucketByEntityCount(std::span<const Document> gold,
                                 std::span<const PredictionRecord> preds,
                                 std::span<const int> edges) {
  if (edges.size() < 2) {
    throw Error(ErrorCode::kValidation, "at least two bucket edges are required");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw Error(ErrorCode::kValidation, "bucket edges must be strictly increasing");
    }
  }
  const auto index = IndexByTitle(gold);
  CheckedPredictions(index, preds);
  BucketReport report;
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const int lo = edges[b];
    const int hi = edges[b + 1];
    std::vector<Document> members;
    std::set<std::string, std::less<>> titles;
    for (const Document& doc : gold) {
      const int n = static_cast<int>(doc.entities.size());
      if (n >= lo && n < hi) {
        members.push_back(doc);
        titles.insert(doc.title);
      }
    }
    if (members.empty()) {
      report.empty_buckets.emplace_back(lo, hi);
      continue;
    }
    std::vector<PredictionRecord> member_preds;
    for (const PredictionRecord& p : preds) {
      if (titles.count(p.title) > 0) member_preds.push_back(p);
    }
    BucketResult result;
    result.lo = lo;
    result.hi = hi;
    result.midpoint = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0;
    result.documents = members.size();
    result.score = PrfOf(GoldFacts(members),
                         CheckedPredictions(IndexByTitle(members), member_preds));
    xs.push_back(result.midpoint);
    ys.push_back(result.score.f1 * 100.0);
    report.buckets.push_back(std::move(result));
  }
  std::tie(report.slope, report.slope_undefined) = OlsSlope(xs, ys);
  return report;
}

Fraction SubstitutionRate(std::span<const SubstitutionPlan> plans,
                          std::span<const Document> docs) {
  std::map<std::string, std::size_t, std::less<>> entity_counts;
  for (const Document& doc : docs) entity_counts[doc.title] = doc.entities.size();
  std::size_t altered = 0;
  std::size_t total = 0;
  for (const SubstitutionPlan& plan : plans) {
    auto it = entity_counts.find(plan.document_title);
    if (it == entity_counts.end()) {
      throw Error(ErrorCode::kValidation,
                  "plan for unknown document '" + plan.document_title + "'");
    }
    if (plan.assignments.size() != it->second) {
      throw Error(ErrorCode::kValidation,
                  "plan for '" + plan.document_title + "' covers " +
                      std::to_string(plan.assignments.size()) + " of " +
                      std::to_string(it->second) + " entities");
    }
    total += it->second;
    for (const EntityAssignment& a : plan.assignments) {
      const bool changed =
          a.kind == AssignmentKind::kSubstituted ||
          (a.kind == AssignmentKind::kRuleBased && a.altered());
      if (changed) ++altered;
    }
  }
  return MakeFraction(altered, total);
}

Fraction SeenMentionProportion(std::span<const Document> test,
                               std::span<const Document> train) {
  std::set<std::string, std::less<>> seen;
  for (const Document& doc : train) {
    for (const Entity& e : doc.entities) {
      for (const Mention& m : e.mentions) seen.insert(m.name);
    }
  }
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const Document& doc : test) {
    for (const Entity& e : doc.entities) {
      for (const Mention& m : e.mentions) {
        ++total;
        hits += seen.count(m.name);
      }
    }
  }
  return MakeFraction(hits, total);
}

std::vector<AttributionRecord> ParseAttributions(std::string_view jsonl) {
  std::vector<AttributionRecord> out;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = Trim(jsonl.substr(pos, end - pos));
    ++line_number;
    pos = end + 1;
    if (line.empty()) continue;
    const std::string ctx = "attribution line " + std::to_string(line_number);
    json node;
    try {
      node = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, ctx + ": malformed at byte " +
                                         std::to_string(e.byte));
    }
    AttributionRecord record;
    try {
      const json& fact = node.at("factId");
      record.fact = {fact.at("title").get<std::string>(), fact.at("h").get<int>(),
                     fact.at("t").get<int>(), fact.at("r").get<std::string>()};
      record.ranked_words = WordList(node.at("rankedWords"), ctx);
      for (std::string& w : WordList(node.at("goldImportant"), ctx)) {
        record.gold_important.insert(std::move(w));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation, ctx + ": " + e.what());
    }
    std::set<std::string> distinct(record.ranked_words.begin(),
                                   record.ranked_words.end());
    if (distinct.size() != record.ranked_words.size()) {
      throw Error(ErrorCode::kValidation, ctx + ": rankedWords has duplicates");
    }
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<AttributionRecord> LoadAttributions(
    const std::filesystem::path& path) {
  return ParseAttributions(ReadFile(path, "attributions"));
}

std::vector<std::pair<int, double>> MapCurve(
    std::span<const AttributionRecord> records, int kmax) {
  if (kmax < 1) throw Error(ErrorCode::kValidation, "kmax must be at least 1");
  for (std::size_t t = 0; t < records.size(); ++t) {
    if (static_cast<int>(records[t].ranked_words.size()) < kmax) {
      const PredictionRecord& f = records[t].fact;
      throw Error(ErrorCode::kValidation,
                  "attribution record " + std::to_string(t) + " (" + f.title +
                      ", " + std::to_string(f.head) + ", " +
                      std::to_string(f.tail) + ", " + f.relation + ") ranks " +
                      std::to_string(records[t].ranked_words.size()) +
                      " words, fewer than K = " + std::to_string(kmax));
    }
  }
  std::vector<std::pair<int, double>> curve;
  for (int k = 1; k <= kmax; ++k) {
    double total = 0.0;
    for (const AttributionRecord& r : records) {
      double ap = 0.0;
      int hits = 0;
      for (int i = 1; i <= k; ++i) {
        if (r.gold_important.count(r.ranked_words[i - 1]) > 0) {
          ++hits;
          ap += static_cast<double>(hits) / static_cast<double>(i);
        }
      }
      total += ap / static_cast<double>(k);
    }
    const double map =
        records.empty() ? 0.0 : total / static_cast<double>(records.size());
    curve.emplace_back(k, map);
  }
  return curve;
}

std::string ScoreReportToJson(const ScoreReport& report,
                              const BucketReport* buckets) {
  ordered_json out;
  out["overall"] = PrfJson(report.overall);
  ordered_json ign;
  ign["precision"] = report.ign_precision.value;
  ign["recall"] = report.overall.recall.value;
  ign["f1"] = report.ign_f1;
  ign["correctInTrain"] = report.correct_in_train;
  ign["undefined"] = report.ign_precision.undefined;
  out["ign"] = std::move(ign);
  out["intra"] = PrfJson(report.intra);
  out["inter"] = PrfJson(report.inter);
  if (buckets != nullptr) {
    ordered_json list = ordered_json::array();
    for (const BucketResult& b : buckets->buckets) {
      ordered_json item;
      item["lo"] = b.lo;
      item["hi"] = b.hi;
      item["midpoint"] = b.midpoint;
      item["documents"] = b.documents;
      item["score"] = PrfJson(b.score);
      list.push_back(std::move(item));
    }
    ordered_json empty = ordered_json::array();
    for (const auto& [lo, hi] : buckets->empty_buckets) {
      empty.push_back(ordered_json::array({lo, hi}));
    }
    ordered_json section;
    section["buckets"] = std::move(list);
    section["emptyBuckets"] = std::move(empty);
    section["slope"] = buckets->slope;
    section["slopeUndefined"] = buckets->slope_undefined;
    out["entityCount"] = std::move(section);
  }
  return out.dump(2);
}

std::string ScoreReportToTable(const ScoreReport& report,
                               const BucketReport* buckets) {
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& p,
                 const std::string& r, const std::string& f) {
    out << std::left << std::setw(12) << name << std::right << std::setw(10)
        << p << std::setw(10) << r << std::setw(10) << f << "\n";
  };
  row("metric", "P", "R", "F1");
  auto prf = [&](const std::string& name, const PrfScore& s) {
    row(name, Percent(s.precision.value), Percent(s.recall.value),
        Percent(s.f1) + (s.f1_undefined ? "*" : ""));
  };
  prf("overall", report.overall);
  row("ign", Percent(report.ign_precision.value),
      Percent(report.overall.recall.value), Percent(report.ign_f1));
  prf("intra", report.intra);
  prf("inter", report.inter);
  if (buckets != nullptr) {
    out << "\n";
    for (const BucketResult& b : buckets->buckets) {
      prf("[" + std::to_string(b.lo) + "," + std::to_string(b.hi) + ")", b.score);
    }
    out << "slope " << (buckets->slope_undefined ? std::string("undefined")
                                                 : std::to_string(buckets->slope))
        << "\n";
  }
  return out.str();
}

}  // namespace envre

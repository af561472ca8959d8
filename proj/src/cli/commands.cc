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

#include "cli/commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "envre/document.h"
#include "envre/error.h"
#include "envre/eval.h"
#include "envre/evrt.h"
#include "envre/kb.h"
#include "envre/kb_wikidata.h"
#include "envre/manifest.h"
#include "envre/prompt.h"
#include "envre/random.h"
#include "envre/relation_inventory.h"
#include "envre/substitution.h"
#include "envre/text_util.h"
#include "json.hpp"

namespace envre::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

template <typename F>
auto Staged(std::string_view stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.code(), e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, ErrorCode::kInternal, std::string("INTERNAL: ") + e.what());
  }
}

void Require(const std::string& value, std::string_view flag) {
  if (value.empty()) {
    throw StageError("config", ErrorCode::kValidation,
                     "VALIDATION: " + std::string(flag) + " is required");
  }
}

std::uint64_t RequireSeed(const std::optional<std::uint64_t>& seed) {
  if (!seed) {
    throw StageError("config", ErrorCode::kValidation,
                     "VALIDATION: --root-seed is required for randomized commands");
  }
  return *seed;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kInternal, "cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Relations {
 public:
  explicit Relations(const CommonSettings& common) {
    if (!common.relations_path.empty()) {
      owned_ = Staged("load", [&] { return RelationInventory::Load(common.relations_path); });
      path_ = common.relations_path;
    }
  }
  const RelationInventory& get() const {
    return path_.empty() ? RelationInventory::Default() : owned_;
  }
  const std::string& path() const { return path_; }

 private:
  RelationInventory owned_;
  std::string path_;
};

std::vector<Document> LoadDocs(const std::string& path,
                               const RelationInventory& relations) {
  std::vector<NameCorrection> corrections;
  ParseOptions options;
  options.relations = &relations;
  options.corrections = &corrections;
  std::vector<Document> docs = LoadCorpus(path, options);
  if (!corrections.empty()) {
    std::clog << "envre: " << path << ": normalized " << corrections.size()
              << " mention name(s) to their span text\n";
  }
  return docs;
}

struct KbSession {
  std::unique_ptr<KbCache> cache;
  std::unique_ptr<KbClient> client;
};

KbSession OpenKb(const KbSettings& kb) {
  const std::string mode = FoldCase(kb.mode);
  if (mode != "offline" && mode != "live") {
    throw Error(ErrorCode::kValidation, "--kb-mode must be offline or live");
  }
  const bool offline = mode == "offline";
  if (offline) {
    if (kb.cache_path.empty()) {
      throw Error(ErrorCode::kCache, "offline mode requires --kb-cache");
    }
    if (!fs::exists(kb.cache_path)) {
      throw Error(ErrorCode::kCache,
                  "cache " + kb.cache_path + " does not exist (offline mode)");
    }
  }
  KbSession session;
  session.cache = kb.cache_path.empty() ? std::make_unique<KbCache>()
                                        : std::make_unique<KbCache>(kb.cache_path);
  KbClientOptions options;
  options.offline = offline;
  options.max_pool = kb.max_pool;
  options.max_in_flight = kb.max_in_flight;
  std::unique_ptr<KbBackend> backend;
  if (!offline) backend = std::make_unique<WikidataBackend>();
  session.client =
      std::make_unique<KbClient>(*session.cache, options, std::move(backend));
  return session;
}

RunManifest NewManifest(const CommonSettings& common, std::string command) {
  RunManifest manifest;
  manifest.command = std::move(command);
  manifest.arguments = common.argv;
  manifest.tool_version = ToolVersion();
  manifest.timestamp = CurrentTimestamp();
  return manifest;
}

void AddInputIfSet(RunManifest& manifest, const std::string& path) {
  if (!path.empty() && fs::exists(path)) manifest.AddInput(path);
}

void WriteManifest(RunManifest& manifest, const std::vector<std::string>& outputs,
                   const fs::path& path) {
  for (const std::string& output : outputs) {
    if (!output.empty()) manifest.AddOutput(output);
  }
  WriteText(path, manifest.ToJson());
}

std::string ManifestPathFor(const std::string& output) {
  return output + ".manifest.json";
}

ordered_json FractionJson(const Fraction& f) {
  return {{"value", f.value},
          {"numerator", f.numerator},
          {"denominator", f.denominator},
          {"undefined", f.undefined}};
}

ordered_json StatsJson(const CorpusStats& stats) {
  return {{"documents", stats.documents},
          {"entities", stats.entities},
          {"triples", stats.triples},
          {"meanEntities", stats.mean_entities},
          {"meanTriples", stats.mean_triples},
          {"undefined", stats.undefined}};
}

ordered_json PlanSummaryJson(std::span<const SubstitutionPlan> plans,
                             std::span<const Document> originals) {
  std::map<std::string, std::size_t> kinds;
  std::map<std::string, std::size_t> reasons;
  for (const SubstitutionPlan& plan : plans) {
    for (const EntityAssignment& a : plan.assignments) {
      ++kinds[std::string(AssignmentKindName(a.kind))];
      if (!a.reason.empty()) ++reasons[a.reason];
    }
  }
  ordered_json out;
  out["plans"] = plans.size();
  out["substitutionRate"] = FractionJson(SubstitutionRate(plans, originals));
  out["assignments"] = kinds;
  out["reasons"] = reasons;
  return out;
}

ordered_json LinkReport(std::span<const Document> docs,
                        const SubstitutionContext& ctx) {
  std::size_t entities = 0, linked = 0, typed = 0;
  std::map<std::string, std::size_t> types;
  for (const Document& doc : docs) {
    for (const Entity& e : doc.entities) {
      ++entities;
      if (!e.kb_id) continue;
      ++linked;
      auto it = ctx.canonical_types.find(*e.kb_id);
      if (it == ctx.canonical_types.end()) continue;
      ++typed;
      ++types[it->second];
    }
  }
  ordered_json pools = ordered_json::object();
  for (const auto& [type, pool] : ctx.pools) {
    pools[type] = {{"candidates", pool.candidates.size()},
                   {"minNameCount", pool.min_name_count}};
  }
  ordered_json out;
  out["documents"] = docs.size();
  out["entities"] = entities;
  out["linked"] = linked;
  out["typed"] = typed;
  out["unlinked"] = entities - linked;
  out["types"] = types;
  out["pools"] = std::move(pools);
  return out;
}

struct LinkedCorpus {
  std::vector<Document> docs;
  SubstitutionContext context;
};

LinkedCorpus LinkAndResolve(const std::string& corpus, const std::string& linking,
                            const RelationInventory& relations, KbClient& client) {
  LinkedCorpus result;
  std::vector<Document> docs = Staged("load", [&] { return LoadDocs(corpus, relations); });
  LinkingMap map = Staged("link", [&] {
    LinkingMap m = LinkingMap::Load(linking);
    m.Validate(docs);
    return m;
  });
  result.docs = Staged("link", [&] { return LinkEntities(std::move(docs), map); });
  result.context = Staged("kb", [&] { return BuildContext(result.docs, client); });
  return result;
}

struct PerturbOutcome {
  LinkedCorpus linked;
  std::vector<std::uint64_t> seeds;
  std::vector<PerturbedDocument> perturbed;
};

PerturbOutcome Perturb(const CommonSettings& common, const RelationInventory& relations,
                       KbClient& client, const PerturbSettings& settings) {
  const std::uint64_t root = RequireSeed(settings.root_seed);
  if (settings.seeds < 1) {
    throw StageError("config", ErrorCode::kValidation,
                     "VALIDATION: --seeds must be at least 1");
  }
  PerturbOutcome outcome;
  outcome.linked = LinkAndResolve(settings.corpus, settings.linking, relations, client);
  ExclusionSet exclusions;
  if (!settings.exclusions.empty()) {
    exclusions = Staged("load", [&] { return ExclusionSet::Load(settings.exclusions); });
  }
  outcome.seeds = DeriveSeeds(root, static_cast<std::size_t>(settings.seeds));
  outcome.perturbed = Staged("perturb", [&] {
    return PerturbCorpus(outcome.linked.docs, outcome.linked.context, outcome.seeds,
                         exclusions, common.threads);
  });
  return outcome;
}

std::vector<Document> DocumentsOf(std::span<const PerturbedDocument> perturbed) {
  std::vector<Document> docs;
  docs.reserve(perturbed.size());
  for (const PerturbedDocument& p : perturbed) docs.push_back(p.document);
  return docs;
}

std::vector<SubstitutionPlan> PlansOf(std::span<const PerturbedDocument> perturbed) {
  std::vector<SubstitutionPlan> plans;
  plans.reserve(perturbed.size());
  for (const PerturbedDocument& p : perturbed) plans.push_back(p.plan);
  return plans;
}

RunManifest PerturbManifest(const CommonSettings& common, const KbSettings& kb,
                            const Relations& relations, const PerturbSettings& s,
                            std::string command) {
  RunManifest manifest = NewManifest(common, std::move(command));
  manifest.root_seed = s.root_seed;
  Staged("manifest", [&] {
    AddInputIfSet(manifest, s.corpus);
    AddInputIfSet(manifest, s.linking);
    AddInputIfSet(manifest, kb.cache_path);
    AddInputIfSet(manifest, s.exclusions);
    AddInputIfSet(manifest, relations.path());
  });
  return manifest;
}

void WritePerturbOutputs(const PerturbOutcome& outcome, const PerturbSettings& s) {
  Staged("write", [&] {
    WriteCorpus(s.out, DocumentsOf(outcome.perturbed));
    if (!s.emit_plans.empty()) WriteText(s.emit_plans, PlansToJsonLines(outcome.perturbed));
    if (!s.emit_exclusions.empty()) {
      WriteText(s.emit_exclusions, CollectUsedNames(outcome.perturbed).ToJson() + "\n");
    }
  });
}

}  // namespace

void RunLink(const CommonSettings& common, const KbSettings& kb,
             const LinkSettings& settings, std::ostream& out) {
  Require(settings.corpus, "--corpus");
  Require(settings.linking, "--linking");
  Relations relations(common);
  RunManifest manifest = NewManifest(common, "link");
  Staged("manifest", [&] {
    AddInputIfSet(manifest, settings.corpus);
    AddInputIfSet(manifest, settings.linking);
    AddInputIfSet(manifest, kb.cache_path);
  });
  KbSession session = Staged("kb", [&] { return OpenKb(kb); });
  LinkedCorpus linked =
      LinkAndResolve(settings.corpus, settings.linking, relations.get(), *session.client);
  const std::string report = LinkReport(linked.docs, linked.context).dump(2) + "\n";
  if (settings.out.empty()) {
    out << report;
    return;
  }
  Staged("write", [&] {
    WriteText(settings.out, report);
    WriteManifest(manifest, {settings.out}, ManifestPathFor(settings.out));
  });
  out << "wrote " << settings.out << "\n";
}

void RunPerturb(const CommonSettings& common, const KbSettings& kb,
                const PerturbSettings& settings, std::ostream& out) {
  Require(settings.corpus, "--corpus");
  Require(settings.linking, "--linking");
  Require(settings.out, "--out");
  RequireSeed(settings.root_seed);
  Relations relations(common);
  RunManifest manifest = PerturbManifest(common, kb, relations, settings, "perturb");
  KbSession session = Staged("kb", [&] { return OpenKb(kb); });
  PerturbOutcome outcome = Perturb(common, relations.get(), *session.client, settings);
  manifest.seeds = outcome.seeds;
  WritePerturbOutputs(outcome, settings);
  const std::string manifest_path =
      settings.manifest.empty() ? ManifestPathFor(settings.out) : settings.manifest;
  Staged("write", [&] {
    WriteManifest(manifest, {settings.out, settings.emit_plans, settings.emit_exclusions},
                  manifest_path);
  });
  out << "perturbed " << outcome.linked.docs.size() << " document(s) x "
      << outcome.seeds.size() << " seed(s) = " << outcome.perturbed.size()
      << " document(s) -> " << settings.out << "\n";
}

void RunPipeline(const CommonSettings& common, const KbSettings& kb,
                 const RunSettings& settings, std::ostream& out) {
  Require(settings.out_dir, "--out-dir");
  Require(settings.perturb.corpus, "--corpus");
  Require(settings.perturb.linking, "--linking");
  RequireSeed(settings.perturb.root_seed);
  const fs::path dir = settings.out_dir;
  Staged("write", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kValidation, "cannot create " + dir.string());
  });
  PerturbSettings perturb = settings.perturb;
  perturb.out = (dir / "perturbed.json").string();
  perturb.emit_plans = (dir / "plans.jsonl").string();
  perturb.emit_exclusions = (dir / "used_names.json").string();
  const std::string link_path = (dir / "link_report.json").string();
  const std::string stats_path = (dir / "stats.json").string();

  Relations relations(common);
  RunManifest manifest = PerturbManifest(common, kb, relations, perturb, "run");
  KbSession session = Staged("kb", [&] { return OpenKb(kb); });
  PerturbOutcome outcome = Perturb(common, relations.get(), *session.client, perturb);
  manifest.seeds = outcome.seeds;

  const std::vector<Document> perturbed_docs = DocumentsOf(outcome.perturbed);
  const std::vector<SubstitutionPlan> plans = PlansOf(outcome.perturbed);
  ordered_json stats = Staged("stats", [&] {
    ordered_json s;
    s["original"] = StatsJson(ComputeCorpusStats(outcome.linked.docs));
    s["perturbed"] = StatsJson(ComputeCorpusStats(perturbed_docs));
    s["substitution"] = PlanSummaryJson(plans, outcome.linked.docs);
    return s;
  });
  WritePerturbOutputs(outcome, perturb);
  Staged("write", [&] {
    WriteText(link_path, LinkReport(outcome.linked.docs, outcome.linked.context).dump(2) + "\n");
    WriteText(stats_path, stats.dump(2) + "\n");
    WriteManifest(manifest,
                  {perturb.out, perturb.emit_plans, perturb.emit_exclusions, link_path,
                   stats_path},
                  dir / "manifest.json");
  });
  out << "run complete: " << outcome.perturbed.size() << " perturbed document(s), "
      << "substitution rate "
      << stats["substitution"]["substitutionRate"]["value"].get<double>() << " -> "
      << dir.string() << "\n";
}

void RunStats(const CommonSettings& common, const KbSettings& kb,
              const StatsSettings& settings, std::ostream& out) {
  Require(settings.corpus, "--corpus");
  Relations relations(common);
  std::vector<Document> docs =
      Staged("load", [&] { return LoadDocs(settings.corpus, relations.get()); });
  ordered_json report;
  report["corpus"] = StatsJson(ComputeCorpusStats(docs));
  if (!settings.plans.empty()) {
    Require(settings.original, "--original");
    auto originals =
        Staged("load", [&] { return LoadDocs(settings.original, relations.get()); });
    auto plans = Staged("load", [&] { return LoadPlans(settings.plans); });
    report["substitution"] = Staged("stats", [&] { return PlanSummaryJson(plans, originals); });
  }
  if (!settings.train.empty()) {
    auto train = Staged("load", [&] { return LoadDocs(settings.train, relations.get()); });
    report["seenMentionProportion"] = FractionJson(SeenMentionProportion(docs, train));
  }
  if (settings.popularity) {
    Require(settings.linking, "--linking");
    KbSession session = Staged("kb", [&] { return OpenKb(kb); });
    LinkingMap map = Staged("link", [&] {
      LinkingMap m = LinkingMap::Load(settings.linking);
      m.Validate(docs);
      return m;
    });
    std::vector<Document> linked = LinkEntities(docs, map);
    std::vector<std::optional<std::string>> ids;
    for (const Document& doc : linked) {
      for (const Entity& e : doc.entities) ids.push_back(e.kb_id);
    }
    PopularitySummary pop = Staged("kb", [&] { return MeanPopularity(ids, *session.client); });
    report["popularity"] = {{"mean", pop.mean},
                            {"counted", pop.counted},
                            {"missing", pop.missing},
                            {"undefined", pop.undefined},
                            {"convention", std::string(kPopularityConvention)}};
  }
  const std::string text = report.dump(2) + "\n";
  if (settings.out.empty()) {
    out << text;
    return;
  }
  RunManifest manifest = NewManifest(common, "stats");
  Staged("write", [&] {
    for (const std::string* p : {&settings.corpus, &settings.plans, &settings.original,
                                 &settings.train, &settings.linking}) {
      AddInputIfSet(manifest, *p);
    }
    WriteText(settings.out, text);
    WriteManifest(manifest, {settings.out}, ManifestPathFor(settings.out));
  });
  out << "wrote " << settings.out << "\n";
}

void RunEval(const CommonSettings& common, const EvalSettings& settings,
             std::ostream& out) {
  Require(settings.gold, "--gold");
  Require(settings.pred, "--pred");
  if (settings.format != "table" && settings.format != "json") {
    throw StageError("config", ErrorCode::kValidation,
                     "VALIDATION: --format must be table or json");
  }
  Relations relations(common);
  auto gold = Staged("load", [&] { return LoadDocs(settings.gold, relations.get()); });
  auto preds = Staged("load", [&] { return LoadPredictions(settings.pred); });
  TrainFacts facts;
  if (!settings.train.empty()) {
    facts = Staged("load", [&] {
      return BuildTrainFacts(LoadDocs(settings.train, relations.get()));
    });
  }
  ScoreReport report = Staged("score", [&] { return Score(gold, preds, facts); });
  std::optional<BucketReport> buckets;
  if (!settings.buckets.empty()) {
    buckets = Staged("score", [&] {
      return BucketByEntityCount(gold, preds, settings.buckets);
    });
  }
  const BucketReport* b = buckets ? &*buckets : nullptr;
  const std::string json = ScoreReportToJson(report, b);
  out << (settings.format == "json" ? json : ScoreReportToTable(report, b));
  if (settings.format == "json" && (json.empty() || json.back() != '\n')) out << "\n";
  if (!settings.out.empty()) {
    RunManifest manifest = NewManifest(common, "eval");
    Staged("write", [&] {
      AddInputIfSet(manifest, settings.gold);
      AddInputIfSet(manifest, settings.pred);
      AddInputIfSet(manifest, settings.train);
      WriteText(settings.out, json + (json.back() == '\n' ? "" : "\n"));
      WriteManifest(manifest, {settings.out}, ManifestPathFor(settings.out));
    });
  }
}

void RunMap(const CommonSettings& common, const MapSettings& settings,
            std::ostream& out) {
  Require(settings.attr, "--attr");
  auto records = Staged("load", [&] { return LoadAttributions(settings.attr); });
  auto curve = Staged("score", [&] { return MapCurve(records, settings.kmax); });
  ordered_json report;
  report["facts"] = records.size();
  report["kmax"] = settings.kmax;
  ordered_json points = ordered_json::array();
  for (const auto& [k, value] : curve) points.push_back({{"k", k}, {"map", value}});
  report["curve"] = std::move(points);
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (!settings.out.empty()) {
    RunManifest manifest = NewManifest(common, "map");
    Staged("write", [&] {
      AddInputIfSet(manifest, settings.attr);
      WriteText(settings.out, text);
      WriteManifest(manifest, {settings.out}, ManifestPathFor(settings.out));
    });
  }
}

void RunEvrt(const CommonSettings& common, const EvrtSettings& settings,
             std::ostream& out) {
  Require(settings.batch, "--batch");
  EvrtConfig config;
  config.alpha = settings.alpha;
  config.beta = settings.beta;
  config.prob_clamp = settings.clamp;
  Staged("config", [&] {
    SetEnabledTerms(settings.enable, config);
    config.Validate();
  });
  const std::string batch = Staged("load", [&] { return ReadText(settings.batch); });
  std::string results;
  Staged("evrt", [&] {
    std::istringstream lines(batch);
    std::string line;
    std::size_t number = 0;
    while (std::getline(lines, line)) {
      ++number;
      if (Trim(line).empty()) continue;
      try {
        EvrtBatchItem item = ParseEvrtBatchLine(line);
        EvrtResult result = EvrtObjective(item.orig, item.pert, item.targets, config);
        results += EvrtResultToJson(item, result) + "\n";
      } catch (const Error& e) {
        throw Error(e.code(), settings.batch + " line " + std::to_string(number) +
                                  ": " + e.message());
      }
    }
  });
  if (settings.out.empty()) {
    out << results;
    return;
  }
  RunManifest manifest = NewManifest(common, "evrt");
  Staged("write", [&] {
    AddInputIfSet(manifest, settings.batch);
    WriteText(settings.out, results);
    WriteManifest(manifest, {settings.out}, ManifestPathFor(settings.out));
  });
  out << "wrote " << settings.out << "\n";
}

void RunPromptBuild(const CommonSettings& common, const KbSettings& kb,
                    const PromptBuildSettings& settings, std::ostream& out) {
  Require(settings.test, "--test");
  Require(settings.train, "--train");
  Require(settings.out_dir, "--out-dir");
  const std::uint64_t seed = RequireSeed(settings.root_seed);
  Relations relations(common);
  RunManifest manifest = NewManifest(common, "prompt build");
  manifest.root_seed = seed;
  Staged("manifest", [&] {
    for (const std::string* p : {&settings.test, &settings.train, &settings.linking,
                                 &settings.exclusions, &kb.cache_path}) {
      AddInputIfSet(manifest, *p);
    }
  });
  auto tests = Staged("load", [&] { return LoadDocs(settings.test, relations.get()); });
  PromptBundleOptions options;
  options.shots = settings.shots;
  options.demonstration_augmentation = settings.demonstration_augmentation;
  options.consistency_guidance = settings.consistency_guidance;
  options.seed = seed;
  options.markers = {settings.marker_open, settings.marker_close};
  options.num_threads = common.threads;

  std::optional<KbSession> session;
  LinkedCorpus train;
  if (settings.demonstration_augmentation) {
    Require(settings.linking, "--linking");
    session = Staged("kb", [&] { return OpenKb(kb); });
    train = LinkAndResolve(settings.train, settings.linking, relations.get(),
                           *session->client);
  } else {
    train.docs = Staged("load", [&] { return LoadDocs(settings.train, relations.get()); });
  }
  ExclusionSet exclusions;
  if (!settings.exclusions.empty()) {
    exclusions = Staged("load", [&] { return ExclusionSet::Load(settings.exclusions); });
  }
  auto entries = Staged("prompt", [&] {
    return BuildPromptBundle(tests, train.docs, options, relations.get(),
                             settings.demonstration_augmentation ? &train.context : nullptr,
                             &exclusions);
  });
  const fs::path dir = settings.out_dir;
  Staged("write", [&] {
    WritePromptBundle(dir, entries, options);
    std::vector<std::string> outputs;
    for (const PromptEntry& e : entries) outputs.push_back((dir / e.prompt_file).string());
    outputs.push_back((dir / "manifest.json").string());
    WriteManifest(manifest, outputs, dir / "run_manifest.json");
  });
  out << "wrote " << entries.size() << " prompt(s) to " << dir.string() << "\n";
}

void RunPromptParse(const CommonSettings& common, const PromptParseSettings& settings,
                    std::ostream& out) {
  Require(settings.manifest, "--manifest");
  Require(settings.outputs, "--outputs");
  Require(settings.test, "--test");
  Require(settings.pred_out, "--pred-out");
  Relations relations(common);
  auto tests = Staged("load", [&] { return LoadDocs(settings.test, relations.get()); });
  BundleParseResult result = Staged("parse", [&] {
    return ParseBundleOutputs(settings.manifest, settings.outputs, tests, relations.get());
  });
  RunManifest manifest = NewManifest(common, "prompt parse");
  Staged("write", [&] {
    AddInputIfSet(manifest, settings.manifest);
    AddInputIfSet(manifest, settings.test);
    WriteText(settings.pred_out, PredictionsToJson(result.predictions) + "\n");
    if (!settings.rejects.empty()) {
      ordered_json rejects = ordered_json::array();
      for (const auto& [title, reject] : result.rejects) {
        rejects.push_back({{"title", title},
                           {"lineNumber", reject.line_number},
                           {"line", reject.line},
                           {"reason", std::string(RejectReasonName(reject.reason))}});
      }
      WriteText(settings.rejects, rejects.dump(2) + "\n");
    }
    WriteManifest(manifest, {settings.pred_out, settings.rejects},
                  ManifestPathFor(settings.pred_out));
  });
  out << "parsed " << result.predictions.size() << " triple(s), "
      << result.rejects.size() << " reject(s), " << result.missing_outputs.size()
      << " missing output file(s)\n";
}

}  // namespace envre::cli

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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "envre/document.h"
#include "envre/error.h"
#include "envre/eval.h"
#include "envre/evrt.h"
#include "envre/kb.h"
#include "envre/prompt.h"
#include "envre/random.h"
#include "envre/relation_inventory.h"
#include "envre/substitution.h"

namespace py = pybind11;

namespace envre {
namespace {

std::vector<Document> ParseText(const std::string& text) {
  return ParseCorpus(text);
}

Document SingleDocument(const std::string& text) {
  std::vector<Document> docs = ParseText(text);
  if (docs.size() != 1) {
    throw Error(ErrorCode::kValidation,
                "expected exactly one document, got " + std::to_string(docs.size()));
  }
  return std::move(docs.front());
}

py::dict FractionDict(const Fraction& f) {
  py::dict d;
  d["value"] = f.value;
  d["numerator"] = f.numerator;
  d["denominator"] = f.denominator;
  d["undefined"] = f.undefined;
  return d;
}

py::dict CorpusStatsDict(const std::string& corpus) {
  std::vector<Document> docs = ParseText(corpus);
  CorpusStats stats = ComputeCorpusStats(docs);
  py::dict d;
  d["documents"] = stats.documents;
  d["entities"] = stats.entities;
  d["triples"] = stats.triples;
  d["mean_entities"] = stats.mean_entities;
  d["mean_triples"] = stats.mean_triples;
  return d;
}

std::string ScoreJson(const std::string& gold, const std::string& predictions,
                      const std::string& train,
                      const std::optional<std::vector<int>>& bucket_edges) {
  std::vector<Document> gold_docs = ParseText(gold);
  std::vector<PredictionRecord> preds = ParsePredictions(predictions);
  std::vector<Document> train_docs = ParseText(train);
  ScoreReport report = Score(gold_docs, preds, BuildTrainFacts(train_docs));
  if (bucket_edges) {
    BucketReport buckets = BucketByEntityCount(gold_docs, preds, *bucket_edges);
    return ScoreReportToJson(report, &buckets);
  }
  return ScoreReportToJson(report, nullptr);
}

py::dict EvrtDict(std::vector<double> z_orig, std::vector<double> z_pert,
                  std::vector<double> probs_orig, std::vector<double> probs_pert,
                  const std::vector<double>& targets, double alpha, double beta,
                  const std::string& enable, double clamp) {
  EvrtConfig config;
  config.alpha = alpha;
  config.beta = beta;
  config.prob_clamp = clamp;
  SetEnabledTerms(enable, config);
  config.Validate();
  PairState orig{std::move(z_orig), std::move(probs_orig)};
  PairState pert{std::move(z_pert), std::move(probs_pert)};
  EvrtResult r = EvrtObjective(orig, pert, targets, config);
  py::dict grad;
  grad["z_orig"] = r.grad.representation_orig;
  grad["z_pert"] = r.grad.representation_pert;
  grad["probs_orig"] = r.grad.probs_orig;
  grad["probs_pert"] = r.grad.probs_pert;
  py::dict d;
  d["total"] = r.total;
  d["clo"] = r.clo;
  d["clp"] = r.clp;
  d["rcr"] = r.rcr;
  d["pcr"] = r.pcr;
  d["grad"] = grad;
  return d;
}

std::tuple<std::string, std::vector<int>> Mark(const std::string& doc,
                                               const std::string& open,
                                               const std::string& close) {
  MarkedDocument marked = MarkEntities(SingleDocument(doc), MarkerStyle{open, close});
  return {marked.text, marked.numbering.number_of};
}

std::string Prompt(const std::string& test_doc, const std::string& demos,
                   int shots) {
  PromptSpec spec;
  spec.shots = shots;
  spec.demonstrations = ParseText(demos);
  spec.test_document = SingleDocument(test_doc);
  return BuildPrompt(spec);
}

py::dict ParseModelOutput(const std::string& text, const std::string& test_doc) {
  Document doc = SingleDocument(test_doc);
  ParsedOutput parsed = ParseOutput(text, doc, RelationInventory::Default());
  py::list triples;
  for (const PredictionRecord& p : parsed.triples) {
    triples.append(py::make_tuple(p.head, p.tail, p.relation));
  }
  py::list rejects;
  for (const OutputReject& r : parsed.rejects) {
    rejects.append(py::make_tuple(r.line_number, r.line,
                                  std::string(RejectReasonName(r.reason))));
  }
  py::dict d;
  d["triples"] = triples;
  d["rejects"] = rejects;
  return d;
}

std::tuple<std::string, std::string> Perturb(const std::string& corpus,
                                             const std::string& linking,
                                             const std::string& cache_path,
                                             std::uint64_t root_seed, int seeds,
                                             int threads) {
  if (seeds < 1) throw Error(ErrorCode::kValidation, "seeds must be at least 1");
  std::vector<Document> docs = ParseText(corpus);
  LinkingMap map = LinkingMap::FromJson(linking);
  map.Validate(docs);
  docs = LinkEntities(std::move(docs), map);
  KbCache cache(cache_path);
  KbClient client(cache, KbClientOptions{});
  SubstitutionContext ctx = BuildContext(docs, client);
  std::vector<std::uint64_t> app_seeds =
      DeriveSeeds(root_seed, static_cast<std::size_t>(seeds));
  std::vector<PerturbedDocument> out;
  {
    py::gil_scoped_release release;
    out = PerturbCorpus(docs, ctx, app_seeds, ExclusionSet{}, threads);
  }
  std::vector<Document> perturbed;
  perturbed.reserve(out.size());
  for (const PerturbedDocument& p : out) perturbed.push_back(p.document);
  return {SerializeCorpus(perturbed), PlansToJsonLines(out)};
}

}  // namespace
}  // namespace envre

PYBIND11_MODULE(_core, m) {
  using namespace envre;
  m.doc() = "Entity-renaming perturbation, evaluation and prompting core";
  m.attr("__version__") = ENVRE_VERSION;

  static PyObject* error_type =
      PyErr_NewException("envre._core.EnvreError", PyExc_RuntimeError, nullptr);
  m.attr("EnvreError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type)(e.what());
      err.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error_type, err.ptr());
    }
  });

  m.def("canonicalize_corpus",
        [](const std::string& text) { return SerializeCorpus(ParseText(text)); },
        py::arg("text"), "Parse and validate a corpus; return canonical JSON.");
  m.def("corpus_stats", &CorpusStatsDict, py::arg("text"));
  m.def("score", &ScoreJson, py::arg("gold"), py::arg("predictions"),
        py::arg("train") = "[]", py::arg("bucket_edges") = std::nullopt,
        "Score predictions against gold; returns the report as JSON.");
  m.def("map_curve",
        [](const std::string& jsonl, int kmax) {
          return MapCurve(ParseAttributions(jsonl), kmax);
        },
        py::arg("attributions"), py::arg("kmax"));
  m.def("substitution_rate",
        [](const std::string& plans_jsonl, const std::string& corpus) {
          std::vector<SubstitutionPlan> plans;
          std::size_t start = 0;
          while (start < plans_jsonl.size()) {
            std::size_t end = plans_jsonl.find('\n', start);
            if (end == std::string::npos) end = plans_jsonl.size();
            if (end > start) {
              plans.push_back(PlanFromJson(
                  std::string_view(plans_jsonl).substr(start, end - start)));
            }
            start = end + 1;
          }
          return FractionDict(SubstitutionRate(plans, ParseText(corpus)));
        },
        py::arg("plans"), py::arg("corpus"));

  m.def("rcr",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return RcrLoss(a, b);
        },
        py::arg("z_orig"), py::arg("z_pert"));
  m.def("skl",
        [](const std::vector<double>& p, const std::vector<double>& q) {
          return SklDivergence(p, q);
        },
        py::arg("p"), py::arg("q"));
  m.def("pcr",
        [](const std::vector<double>& a, const std::vector<double>& b, double clamp) {
          return PcrLoss(a, b, clamp);
        },
        py::arg("probs_orig"), py::arg("probs_pert"), py::arg("clamp") = 1e-7);
  m.def("bce",
        [](const std::vector<double>& probs, const std::vector<double>& targets,
           double clamp) { return BinaryCrossEntropy(probs, targets, clamp); },
        py::arg("probs"), py::arg("targets"), py::arg("clamp") = 1e-7);
  m.def("evrt_objective", &EvrtDict, py::arg("z_orig"), py::arg("z_pert"),
        py::arg("probs_orig"), py::arg("probs_pert"), py::arg("targets"),
        py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        py::arg("enable") = "clp,rcr,pcr", py::arg("clamp") = 1e-7);

  m.def("mark_entities", &Mark, py::arg("document"), py::arg("open") = "[{n}|",
        py::arg("close") = "|{n}]");
  m.def("build_prompt", &Prompt, py::arg("test_document"),
        py::arg("demonstrations"), py::arg("shots") = 1);
  m.def("parse_output", &ParseModelOutput, py::arg("text"),
        py::arg("test_document"));
  m.def("perturb", &Perturb, py::arg("corpus"), py::arg("linking"),
        py::arg("cache"), py::arg("root_seed"), py::arg("seeds") = 1,
        py::arg("threads") = 1,
        "Perturb a corpus offline from a knowledge-base cache. Returns the "
        "perturbed corpus JSON and the plans as JSON lines.");
}

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

#include "envre/evrt.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "envre/error.h"
#include "envre/text_util.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Clamped {
  double value;
  // d(value)/d(raw): 1 inside the clamp range, 0 where it saturates.
  double slope;
};

Clamped Clamp(double p, double eps) {
  if (p < eps) return {eps, 0.0};
  if (p > 1.0 - eps) return {1.0 - eps, 0.0};
  return {p, 1.0};
}

double Logit(double p) { return std::log(p) - std::log1p(-p); }

void CheckSizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kValidation, std::string(what) + " size mismatch: " +
                                            std::to_string(a) + " vs " +
                                            std::to_string(b));
  }
}

}  // namespace

void EvrtConfig::Validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw Error(ErrorCode::kValidation, "alpha and beta must be non-negative");
  }
  if (!(prob_clamp > 0.0 && prob_clamp < 0.5)) {
    throw Error(ErrorCode::kValidation, "probability clamp must lie in (0, 0.5)");
  }
}

double BinaryCrossEntropy(std::span<const double> probs,
                          std::span<const double> targets, double clamp,
                          std::span<double> grad) {
  CheckSizes(probs.size(), targets.size(), "probabilities/targets");
  if (!grad.empty()) CheckSizes(grad.size(), probs.size(), "gradient");
  double loss = 0.0;
  for (std::size_t r = 0; r < probs.size(); ++r) {
    const Clamped p = Clamp(probs[r], clamp);
    const double y = targets[r];
    loss -= y * std::log(p.value) + (1.0 - y) * std::log1p(-p.value);
    if (!grad.empty()) {
      grad[r] = p.slope * (-y / p.value + (1.0 - y) / (1.0 - p.value));
    }
  }
  return loss;
}

double RcrLoss(std::span<const double> z_orig, std::span<const double> z_pert) {
  CheckSizes(z_orig.size(), z_pert.size(), "representation");
  double sum = 0.0;
  for (std::size_t i = 0; i < z_orig.size(); ++i) {
    const double d = z_orig[i] - z_pert[i];
    sum += d * d;
  }
  return sum;
}

double SklDivergence(std::span<const double> p, std::span<const double> q) {
  constexpr double kTolerance = 1e-6;
  for (auto dist : {p, q}) {
    if (dist.size() != 2) {
      throw Error(ErrorCode::kValidation, "expected a two-point distribution");
    }
    for (double v : dist) {
      if (!(v > 0.0 && v < 1.0)) {
        throw Error(ErrorCode::kValidation,
                    "distribution components must lie in (0, 1)");
      }
    }
    if (std::abs(dist[0] + dist[1] - 1.0) > kTolerance) {
      throw Error(ErrorCode::kValidation, "distribution does not sum to 1");
    }
  }
  double d = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    d += p[i] * std::log(p[i] / q[i]) + q[i] * std::log(q[i] / p[i]);
  }
  return d;
}

double PcrLoss(std::span<const double> probs_orig,
               std::span<const double> probs_pert, double clamp,
               std::span<double> grad_orig, std::span<double> grad_pert) {
  CheckSizes(probs_orig.size(), probs_pert.size(), "relation inventory");
  if (!grad_orig.empty()) CheckSizes(grad_orig.size(), probs_orig.size(), "gradient");
  if (!grad_pert.empty()) CheckSizes(grad_pert.size(), probs_pert.size(), "gradient");
  double loss = 0.0;
  for (std::size_t r = 0; r < probs_orig.size(); ++r) {
    const Clamped a = Clamp(probs_orig[r], clamp);
    const Clamped b = Clamp(probs_pert[r], clamp);
    // For Bernoulli pairs the symmetric KL is (a - b)(logit a - logit b).
    const double diff = a.value - b.value;
    const double logit_gap = Logit(a.value) - Logit(b.value);
    loss += diff * logit_gap;
    if (!grad_orig.empty()) {
      grad_orig[r] =
          a.slope * (logit_gap + diff / (a.value * (1.0 - a.value)));
    }
    if (!grad_pert.empty()) {
      grad_pert[r] =
          b.slope * (-logit_gap - diff / (b.value * (1.0 - b.value)));
    }
  }
  return loss;
}

EvrtResult EvrtObjective(const PairState& orig, const PairState& pert,
                         std::span<const double> targets,
                         const EvrtConfig& config, const TaskLoss& task_loss) {
  config.Validate();
  CheckSizes(orig.representation.size(), pert.representation.size(),
             "representation");
  CheckSizes(orig.probs.size(), pert.probs.size(), "relation inventory");
  for (const PairState* s : {&orig, &pert}) {
    for (double v : s->representation) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kValidation, "representation is not finite");
      }
    }
    for (double v : s->probs) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kValidation, "probability is not finite");
      }
    }
  }
  const std::size_t d = orig.representation.size();
  const std::size_t r = orig.probs.size();
  EvrtResult result;
  EvrtGradients& g = result.grad;
  g.representation_orig.assign(d, 0.0);
  g.representation_pert.assign(d, 0.0);
  g.probs_orig.assign(r, 0.0);
  g.probs_pert.assign(r, 0.0);

  std::vector<double> tmp_orig(r, 0.0), tmp_pert(r, 0.0);
  result.clo = task_loss(orig.probs, targets, config.prob_clamp, g.probs_orig);
  result.clp = task_loss(pert.probs, targets, config.prob_clamp, tmp_pert);
  result.rcr = RcrLoss(orig.representation, pert.representation);
  result.total = result.clo;
  if (config.enable_clp) {
    result.total += result.clp;
    for (std::size_t i = 0; i < r; ++i) g.probs_pert[i] += tmp_pert[i];
  }
  if (config.enable_rcr) {
    result.total += config.alpha * result.rcr;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = orig.representation[i] - pert.representation[i];
      g.representation_orig[i] += 2.0 * config.alpha * diff;
      g.representation_pert[i] -= 2.0 * config.alpha * diff;
    }
  }
  result.pcr = PcrLoss(orig.probs, pert.probs, config.prob_clamp, tmp_orig,
                       tmp_pert);
  if (config.enable_pcr) {
    result.total += config.beta * result.pcr;
    for (std::size_t i = 0; i < r; ++i) {
      g.probs_orig[i] += config.beta * tmp_orig[i];
      g.probs_pert[i] += config.beta * tmp_pert[i];
    }
  }
  return result;
}

void SetEnabledTerms(std::string_view terms, EvrtConfig& config) {
  config.enable_clp = config.enable_rcr = config.enable_pcr = false;
  std::string list(terms);
  std::replace(list.begin(), list.end(), ',', ' ');
  for (const std::string& term : SplitWhitespace(list)) {
    const std::string t = FoldCase(term);
    if (t == "clp") {
      config.enable_clp = true;
    } else if (t == "rcr") {
      config.enable_rcr = true;
    } else if (t == "pcr") {
      config.enable_pcr = true;
    } else if (t != "none") {
      throw Error(ErrorCode::kValidation, "unknown loss term '" + term + "'");
    }
  }
}

EvrtBatchItem ParseEvrtBatchLine(std::string_view line) {
  json node;
  try {
    node = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "batch record malformed at byte " + std::to_string(e.byte));
  }
  EvrtBatchItem item;
  try {
    item.orig.representation = node.at("zOrig").get<std::vector<double>>();
    item.pert.representation = node.at("zPert").get<std::vector<double>>();
    const auto probs_orig =
        node.at("probsOrig").get<std::map<std::string, double>>();
    const auto probs_pert =
        node.at("probsPert").get<std::map<std::string, double>>();
    const auto gold = node.value("gold", std::vector<std::string>());
    if (probs_orig.size() != probs_pert.size() ||
        !std::equal(probs_orig.begin(), probs_orig.end(), probs_pert.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorCode::kValidation,
                  "probsOrig and probsPert cover different relations");
    }
    for (const auto& [rel, p] : probs_orig) {
      item.relations.push_back(rel);
      item.orig.probs.push_back(p);
      item.pert.probs.push_back(probs_pert.at(rel));
    }
    item.targets.assign(item.relations.size(), 0.0);
    for (const std::string& rel : gold) {
      auto it = std::lower_bound(item.relations.begin(), item.relations.end(), rel);
      if (it == item.relations.end() || *it != rel) {
        throw Error(ErrorCode::kValidation,
                    "gold relation '" + rel + "' has no probability");
      }
      item.targets[it - item.relations.begin()] = 1.0;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("batch record: ") + e.what());
  }
  return item;
}

std::string EvrtResultToJson(const EvrtBatchItem& item, const EvrtResult& result) {
  auto by_relation = [&](const std::vector<double>& values) {
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < item.relations.size(); ++i) {
      out[item.relations[i]] = values[i];
    }
    return out;
  };
  ordered_json grad;
  grad["zOrig"] = result.grad.representation_orig;
  grad["zPert"] = result.grad.representation_pert;
  grad["probsOrig"] = by_relation(result.grad.probs_orig);
  grad["probsPert"] = by_relation(result.grad.probs_pert);
  ordered_json out;
  out["total"] = result.total;
  out["clo"] = result.clo;
  out["clp"] = result.clp;
  out["rcr"] = result.rcr;
  out["pcr"] = result.pcr;
  out["grad"] = std::move(grad);
  return out.dump();
}

}  // namespace envre

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

// Loss kernel for entity-variation-robust training: task loss on the
// original and the renamed pair, squared-L2 representation consistency and
// summed symmetric-KL prediction consistency, with analytic gradients.
//
// The kernel works on caller-supplied pair representations and per-relation
// probabilities; it does not own an encoder.

#ifndef ENVRE_EVRT_H_
#define ENVRE_EVRT_H_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace envre {

struct PairState {
  std::vector<double> representation;
  // P_r for each relation r, aligned with a relation order fixed by the caller.
  std::vector<double> probs;
};

struct EvrtConfig {
  double alpha = 1.0;
  double beta = 1.0;
  bool enable_clp = true;
  bool enable_rcr = true;
  bool enable_pcr = true;
  double prob_clamp = 1e-7;

  // Throws Error(kValidation) on negative weights or a clamp outside (0, 0.5).
  void Validate() const;
};

struct EvrtGradients {
  std::vector<double> representation_orig;
  std::vector<double> representation_pert;
  std::vector<double> probs_orig;
  std::vector<double> probs_pert;
};

struct EvrtResult {
  double total = 0.0;
  double clo = 0.0;
  double clp = 0.0;
  double rcr = 0.0;
  double pcr = 0.0;
  // Gradients of `total`.
  EvrtGradients grad;
};

// Task-loss strategy: returns the loss of `probs` against 0/1 `targets` and,
// when `grad` is non-empty, writes dLoss/dP_r into it. Probabilities arrive
// unclamped; `clamp` is the configured epsilon.
using TaskLoss = std::function<double(std::span<const double> probs,
                                      std::span<const double> targets,
                                      double clamp, std::span<double> grad)>;

// Summed per-relation binary cross-entropy on probabilities clamped to
// [clamp, 1 - clamp]. The gradient is zero where clamping is active.
double BinaryCrossEntropy(std::span<const double> probs,
                          std::span<const double> targets, double clamp,
                          std::span<double> grad = {});

// Squared Euclidean distance. Throws Error(kValidation) on a size mismatch.
double RcrLoss(std::span<const double> z_orig, std::span<const double> z_pert);

// KL(p||q) + KL(q||p), natural log, for two-point distributions. Throws
// Error(kValidation) unless both are normalized within 1e-6 with components
// in (0, 1).
double SklDivergence(std::span<const double> p, std::span<const double> q);

// Sum over relations of the symmetric KL between [P_r, 1 - P_r] of the two
// pairs, after clamping. Optional outputs receive the gradients.
double PcrLoss(std::span<const double> probs_orig,
               std::span<const double> probs_pert, double clamp = 1e-7,
               std::span<double> grad_orig = {},
               std::span<double> grad_pert = {});

EvrtResult EvrtObjective(const PairState& orig, const PairState& pert,
                         std::span<const double> targets,
                         const EvrtConfig& config,
                         const TaskLoss& task_loss = BinaryCrossEntropy);

// Parses "clp,rcr,pcr" style toggles; "none" or "" disables all three.
void SetEnabledTerms(std::string_view terms, EvrtConfig& config);

// One JSON-lines batch record:
// {"zOrig":[...],"zPert":[...],"probsOrig":{"r":p},"probsPert":{...},"gold":["r"]}
struct EvrtBatchItem {
  std::vector<std::string> relations;  // sorted relation ids
  PairState orig;
  PairState pert;
  std::vector<double> targets;
};

EvrtBatchItem ParseEvrtBatchLine(std::string_view line);
std::string EvrtResultToJson(const EvrtBatchItem& item, const EvrtResult& result);

}  // namespace envre

#endif  // ENVRE_EVRT_H_

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

// Command implementations behind the envre command line. Each command takes
// a fully resolved settings struct; flag parsing lives in app.cc.

#ifndef ENVRE_CLI_COMMANDS_H_
#define ENVRE_CLI_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "envre/error.h"

namespace envre::cli {

// A failure attributed to one pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string_view stage, ErrorCode code, const std::string& message)
      : std::runtime_error(message), stage_(stage), code_(code) {}

  const std::string& stage() const { return stage_; }
  ErrorCode code() const { return code_; }

 private:
  std::string stage_;
  ErrorCode code_;
};

struct KbSettings {
  std::string cache_path;
  std::string mode = "offline";  // offline | live
  std::size_t max_pool = 10000;
  int max_in_flight = 4;
};

struct CommonSettings {
  std::vector<std::string> argv;
  std::string relations_path;
  int threads = 1;
};

struct LinkSettings {
  std::string corpus;
  std::string linking;
  std::string out;
};

struct PerturbSettings {
  std::string corpus;
  std::string linking;
  int seeds = 5;
  std::optional<std::uint64_t> root_seed;
  std::string exclusions;
  std::string out;
  std::string emit_plans;
  std::string emit_exclusions;
  std::string manifest;
};

struct RunSettings {
  PerturbSettings perturb;
  std::string out_dir;
};

struct StatsSettings {
  std::string corpus;
  std::string plans;
  std::string original;
  std::string train;
  std::string linking;
  bool popularity = false;
  std::string out;
};

struct EvalSettings {
  std::string gold;
  std::string pred;
  std::string train;
  std::vector<int> buckets;
  std::string format = "table";  // table | json
  std::string out;
};

struct MapSettings {
  std::string attr;
  int kmax = 10;
  std::string out;
};

struct EvrtSettings {
  std::string batch;
  double alpha = 1.0;
  double beta = 1.0;
  std::string enable = "clp,rcr,pcr";
  double clamp = 1e-7;
  std::string out;
};

struct PromptBuildSettings {
  std::string test;
  std::string train;
  int shots = 1;
  std::optional<std::uint64_t> root_seed;
  bool demonstration_augmentation = false;
  bool consistency_guidance = false;
  std::string linking;
  std::string exclusions;
  std::string marker_open = "[{n}|";
  std::string marker_close = "|{n}]";
  std::string out_dir;
};

struct PromptParseSettings {
  std::string manifest;
  std::string outputs;
  std::string test;
  std::string pred_out;
  std::string rejects;
};

// Each command returns normally on success and throws StageError otherwise.
void RunLink(const CommonSettings& common, const KbSettings& kb,
             const LinkSettings& settings, std::ostream& out);
void RunPerturb(const CommonSettings& common, const KbSettings& kb,
                const PerturbSettings& settings, std::ostream& out);
void RunPipeline(const CommonSettings& common, const KbSettings& kb,
                 const RunSettings& settings, std::ostream& out);
void RunStats(const CommonSettings& common, const KbSettings& kb,
              const StatsSettings& settings, std::ostream& out);
void RunEval(const CommonSettings& common, const EvalSettings& settings,
             std::ostream& out);
void RunMap(const CommonSettings& common, const MapSettings& settings,
            std::ostream& out);
void RunEvrt(const CommonSettings& common, const EvrtSettings& settings,
             std::ostream& out);
void RunPromptBuild(const CommonSettings& common, const KbSettings& kb,
                    const PromptBuildSettings& settings, std::ostream& out);
void RunPromptParse(const CommonSettings& common,
                    const PromptParseSettings& settings, std::ostream& out);

}  // namespace envre::cli

#endif  // ENVRE_CLI_COMMANDS_H_

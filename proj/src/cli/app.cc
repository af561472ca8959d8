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

#include "cli/app.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "cli/commands.h"
#include "envre/error.h"
#include "envre/manifest.h"

namespace envre::cli {
namespace {

constexpr char kFooter[] = R"(Settings are resolved in this order, first match wins:
  1. command-line flags
  2. environment variables ENVRE_<FLAG>, e.g. ENVRE_KB_CACHE, ENVRE_KB_MODE
  3. the INI file given by --config (or ENVRE_CONFIG): keys in the
     top-level section apply to every command, keys under [perturb],
     [prompt.build] and so on apply to that command only
  4. built-in defaults

Exit status: 0 success, 2 invalid input, 3 knowledge base or cache failure,
4 internal error.)";

std::string EnvName(const std::string& flag) {
  std::string name = "ENVRE_";
  for (char c : flag) {
    name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return name;
}

using ConfigValues = std::map<std::string, std::vector<std::string>>;

ConfigValues ReadConfig(const std::string& path) {
  ConfigValues values;
  if (path.empty()) return values;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read config " + path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    std::string key;
    for (const std::string& parent : item.parents) {
      if (parent == "default") continue;
      key += parent + ".";
    }
    key += item.name;
    values[key] = item.inputs;
  }
  return values;
}

// Fills options the command line left unset, from the environment first and
// the config file second. `section` is the dotted subcommand path.
void ApplyLayers(CLI::App& app, const std::string& section,
                 const ConfigValues& config) {
  for (CLI::Option* opt : app.get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const std::string& flag = opt->get_lnames().front();
    if (flag == "help" || flag == "help-all" || flag == "config" || flag == "version") {
      continue;
    }
    std::vector<std::string> inputs;
    if (const char* env = std::getenv(EnvName(flag).c_str()); env != nullptr && *env) {
      inputs.push_back(env);
    } else if (auto it = config.find(section.empty() ? flag : section + "." + flag);
               it != config.end()) {
      inputs = it->second;
    } else if (auto top = config.find(flag); top != config.end()) {
      inputs = top->second;
    }
    if (inputs.empty()) continue;
    for (const std::string& input : inputs) opt->add_result(input);
    opt->run_callback();
  }
}

void AddKbFlags(CLI::App& app, KbSettings& kb) {
  app.add_option("--kb-cache", kb.cache_path,
                 "Knowledge-base cache file (JSON lines); required offline");
  app.add_option("--kb-mode", kb.mode, "offline (cache only) or live")
      ->check(CLI::IsMember({"offline", "live"}, CLI::ignore_case));
  app.add_option("--max-pool", kb.max_pool,
                 "Cap on type members fetched per candidate pool");
  app.add_option("--max-in-flight", kb.max_in_flight,
                 "Concurrent knowledge-base requests in live mode");
}

void AddPerturbFlags(CLI::App& app, PerturbSettings& p, bool with_outputs) {
  app.add_option("--corpus", p.corpus, "Input corpus in DocRED JSON");
  app.add_option("--linking", p.linking, "Linking map JSON {title: {entity: id|null}}");
  app.add_option("--seeds", p.seeds, "Number of seeded applications per document");
  app.add_option("--root-seed", p.root_seed, "Root seed (required)");
  app.add_option("--exclusions", p.exclusions,
                 "Item ids and names that must not be chosen (JSON)");
  if (with_outputs) {
    app.add_option("--out", p.out, "Perturbed corpus output path");
    app.add_option("--emit-plans", p.emit_plans, "Write substitution plans (JSON lines)");
    app.add_option("--emit-exclusions", p.emit_exclusions,
                   "Write every chosen item id and name as an exclusion set");
    app.add_option("--manifest", p.manifest,
                   "Run manifest path (default: <out>.manifest.json)");
  }
}

// Expands nested subcommands too, so `prompt build` and `prompt parse` show
// their flags in the top-level help.
class NestedHelpFormatter : public CLI::Formatter {
 public:
  std::string make_expanded(const CLI::App* sub) const override {
    std::string out = CLI::Formatter::make_expanded(sub);
    for (const CLI::App* child : sub->get_subcommands({})) {
      if (child->get_name().empty()) continue;
      out += "\n" + sub->get_name() + " " + make_expanded(child);
    }
    return out;
  }
};

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("envre: entity-name-variation benchmarks for document-level relation "
               "extraction",
               "envre");
  app.footer(kFooter);
  app.formatter(std::make_shared<NestedHelpFormatter>());
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", ToolVersion());

  CommonSettings common;
  common.argv = args;
  KbSettings kb;
  std::string config_path;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--relations", common.relations_path,
                 "Relation inventory JSON {id: label} (default: bundled 96 types)");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  AddKbFlags(app, kb);

  LinkSettings link;
  auto* link_cmd = app.add_subcommand("link", "Apply a linking map and resolve types and "
                                              "candidate pools, warming the cache");
  link_cmd->add_option("--corpus", link.corpus, "Input corpus in DocRED JSON");
  link_cmd->add_option("--linking", link.linking, "Linking map JSON");
  link_cmd->add_option("--out", link.out, "Link report path (default: stdout)");

  PerturbSettings perturb;
  auto* perturb_cmd =
      app.add_subcommand("perturb", "Rename entities with knowledge-base names, once per seed");
  AddPerturbFlags(*perturb_cmd, perturb, true);

  RunSettings run;
  auto* run_cmd = app.add_subcommand(
      "run", "Full pipeline: link, resolve candidates, perturb and report statistics");
  AddPerturbFlags(*run_cmd, run.perturb, false);
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for every artifact of the run");

  StatsSettings stats;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics and substitution rate");
  stats_cmd->add_option("--corpus", stats.corpus, "Corpus to describe");
  stats_cmd->add_option("--plans", stats.plans, "Substitution plans (JSON lines)");
  stats_cmd->add_option("--original", stats.original, "Original corpus the plans refer to");
  stats_cmd->add_option("--train", stats.train, "Training corpus for seen-mention share");
  stats_cmd->add_option("--linking", stats.linking, "Linking map for popularity");
  stats_cmd->add_flag("--popularity", stats.popularity, "Report mean entity popularity");
  stats_cmd->add_option("--out", stats.out, "Report path (default: stdout)");

  EvalSettings eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions: P/R/F1, Ign F1, Intra/Inter");
  eval_cmd->add_option("--gold", eval.gold, "Gold corpus in DocRED JSON");
  eval_cmd->add_option("--pred", eval.pred, "Predictions [{title,h_idx,t_idx,r}]");
  eval_cmd->add_option("--train", eval.train, "Training corpus for Ign F1");
  eval_cmd->add_option("--buckets", eval.buckets, "Entity-count bucket edges, e.g. 1,5,10")
      ->delimiter(',');
  eval_cmd->add_option("--format", eval.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  eval_cmd->add_option("--out", eval.out, "Also write the JSON report here");

  MapSettings map;
  auto* map_cmd = app.add_subcommand("map", "MAP(K) of attribution rankings");
  map_cmd->add_option("--attr", map.attr, "Attribution records (JSON lines)");
  map_cmd->add_option("--kmax", map.kmax, "Largest K")->check(CLI::PositiveNumber);
  map_cmd->add_option("--out", map.out, "Also write the report here");

  EvrtSettings evrt;
  auto* evrt_cmd = app.add_subcommand("evrt", "Evaluate the robust-training objective");
  evrt_cmd->add_option("--batch", evrt.batch, "Batch file (JSON lines)");
  evrt_cmd->add_option("--alpha", evrt.alpha, "Weight of representation consistency");
  evrt_cmd->add_option("--beta", evrt.beta, "Weight of prediction consistency");
  evrt_cmd->add_option("--enable", evrt.enable,
                       "Enabled terms among clp,rcr,pcr (or none)");
  evrt_cmd->add_option("--clamp", evrt.clamp, "Probability clamp epsilon");
  evrt_cmd->add_option("--out", evrt.out, "Result path (default: stdout)");

  auto* prompt_cmd = app.add_subcommand("prompt", "In-context-learning prompts");
  prompt_cmd->require_subcommand(1);
  PromptBuildSettings build;
  auto* build_cmd = prompt_cmd->add_subcommand("build", "Write a prompt bundle");
  build_cmd->add_option("--test", build.test, "Test corpus");
  build_cmd->add_option("--train", build.train, "Training corpus for demonstrations");
  build_cmd->add_option("--shots", build.shots, "Demonstrations per prompt (1 or 3)")
      ->check(CLI::IsMember({1, 3}));
  build_cmd->add_option("--root-seed", build.root_seed, "Root seed (required)");
  build_cmd->add_flag("--da", build.demonstration_augmentation,
                      "Add an entity-renamed twin of each demonstration");
  build_cmd->add_flag("--cg", build.consistency_guidance,
                      "Add consistency guidance (requires --da)");
  build_cmd->add_option("--linking", build.linking, "Linking map of the training corpus");
  build_cmd->add_option("--exclusions", build.exclusions, "Names withheld from twins");
  build_cmd->add_option("--marker-open", build.marker_open, "Opening marker, {n} = number");
  build_cmd->add_option("--marker-close", build.marker_close, "Closing marker");
  build_cmd->add_option("--out-dir", build.out_dir, "Bundle directory");
  PromptParseSettings parse;
  auto* parse_cmd = prompt_cmd->add_subcommand("parse", "Parse model outputs of a bundle");
  parse_cmd->add_option("--manifest", parse.manifest, "Bundle manifest.json");
  parse_cmd->add_option("--outputs", parse.outputs, "Directory with the output files");
  parse_cmd->add_option("--test", parse.test, "Test corpus");
  parse_cmd->add_option("--pred-out", parse.pred_out, "Predictions output path");
  parse_cmd->add_option("--rejects", parse.rejects, "Rejected lines report path");

  // Subcommands keep their own -h; at the top level it lists every command.
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every command and exit");

  for (CLI::App* sub : {link_cmd, perturb_cmd, run_cmd, stats_cmd, eval_cmd, map_cmd,
                        evrt_cmd, build_cmd, parse_cmd}) {
    sub->footer(kFooter);
  }

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(),
                                    args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("ENVRE_CONFIG"); env != nullptr) config_path = env;
    }
    const ConfigValues config = ReadConfig(config_path);
    ApplyLayers(app, "", config);
    CLI::App* selected = app.get_subcommands().front();
    std::string section = selected->get_name();
    ApplyLayers(*selected, section, config);
    if (selected == prompt_cmd) {
      selected = prompt_cmd->get_subcommands().front();
      section += "." + selected->get_name();
      ApplyLayers(*selected, section, config);
    }

    if (selected == link_cmd) {
      RunLink(common, kb, link, out);
    } else if (selected == perturb_cmd) {
      RunPerturb(common, kb, perturb, out);
    } else if (selected == run_cmd) {
      RunPipeline(common, kb, run, out);
    } else if (selected == stats_cmd) {
      RunStats(common, kb, stats, out);
    } else if (selected == eval_cmd) {
      RunEval(common, eval, out);
    } else if (selected == map_cmd) {
      RunMap(common, map, out);
    } else if (selected == evrt_cmd) {
      RunEvrt(common, evrt, out);
    } else if (selected == build_cmd) {
      RunPromptBuild(common, kb, build, out);
    } else if (selected == parse_cmd) {
      RunPromptParse(common, parse, out);
    }
  } catch (const StageError& e) {
    err << "envre: stage " << e.stage() << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const CLI::ParseError& e) {
    err << "envre: stage config: VALIDATION: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "envre: stage config: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "envre: INTERNAL: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace envre::cli

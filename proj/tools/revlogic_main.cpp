// Copyright 2026 The revlogic Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// revlogic command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "revlogic/error.hpp"
#include "revlogic/pipeline.hpp"
#include "revlogic/synthetic.hpp"

namespace fs = std::filesystem;
using namespace revlogic;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  std::optional<std::string> only;
  std::optional<std::string> arg;
  std::optional<std::size_t> concurrency;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Override the configured seed");
  cmd->add_flag("--resume", f.resume, "Reuse items already recorded as done or skipped");
  cmd->add_option("--only", f.only, "Restrict to one paper id");
  cmd->add_option("--arg", f.arg, "Restrict to one ARG");
  cmd->add_option("--concurrency", f.concurrency, "Parallel items per stage");
}

Pipeline open(const CommonFlags& f) {
  auto config = load_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.concurrency) config.concurrency = std::max<std::size_t>(1, *f.concurrency);
  RunOptions opts;
  opts.resume = f.resume;
  opts.only_paper = f.only;
  opts.only_arg = f.arg;
  return Pipeline(std::move(config), std::move(opts));
}

void print(const StageSummary& s) {
  std::fprintf(stderr, "%-8s done=%zu skipped=%zu failed=%zu reused=%zu\n", std::string(to_string(s.stage)).c_str(),
               s.done, s.skipped, s.failed, s.reused);
}

int failures_of(Pipeline& p, Stage stage) {
  int failed = 0;
  for (const auto& s : p.manifest().items(stage))
    if (s.state == ItemState::Failed) {
      std::fprintf(stderr, "  failed %s: %s\n", s.item.c_str(), s.reason.c_str());
      ++failed;
    }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual evaluation of automatic review generators"};
  app.require_subcommand(1);

  CommonFlags flags;
  struct StageCmd {
    const char* name;
    const char* help;
    Stage stage;
  };
  const StageCmd stages[] = {
      {"ingest", "Parse the Markdown corpus", Stage::Ingest},
      {"perturb", "Extract research logic and generate counterfactuals", Stage::Perturb},
      {"review", "Run every ARG over originals and counterfactuals", Stage::Review},
      {"analyze", "Compute features, effects and the ranking", Stage::Analyze},
  };
  std::map<CLI::App*, Stage> stage_of;
  for (const auto& s : stages) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, flags);
    stage_of[cmd] = s.stage;
  }
  auto* run = app.add_subcommand("run", "Run all stages in order");
  add_common(run, flags);

  std::string format = "text";
  auto* report = app.add_subcommand("report", "Print the analysis");
  add_common(report, flags);
  report->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::size_t synth_count = 12;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus for the mock backend");
  synth->add_option("--count", synth_count, "Number of papers");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      synthetic::write_corpus(synthetic::generate_corpus(synth_count, synth_seed), synth_out);
      return 0;
    }
    auto pipeline = open(flags);
    if (report->parsed()) {
      if (format == "json") {
        std::ifstream in(pipeline.config().workspace_dir / "analysis" / "analysis.json");
        if (!in) throw Error(ErrorCode::PreconditionViolated, "no analysis yet; run analyze first");
        std::cout << in.rdbuf();
      } else {
        std::cout << pipeline.report();
      }
      return 0;
    }
    int failed = 0;
    if (run->parsed()) {
      for (const auto& s : pipeline.run_all()) {
        print(s);
        failed += failures_of(pipeline, s.stage);
      }
      std::cout << pipeline.report();
    } else {
      for (const auto& [cmd, stage] : stage_of) {
        if (!cmd->parsed()) continue;
        StageSummary s;
        switch (stage) {
          case Stage::Ingest: s = pipeline.ingest(); break;
          case Stage::Perturb: s = pipeline.perturb(); break;
          case Stage::Review: s = pipeline.review(); break;
          default: s = pipeline.analyze(); break;
        }
        print(s);
        failed += failures_of(pipeline, stage);
      }
    }
    return failed == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "revlogic: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ConfigMismatch ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "revlogic: %s\n", e.what());
    return 1;
  }
}

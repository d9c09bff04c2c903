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


// Resumable three-stage pipeline: ingest and perturb papers, review the
// originals and counterfactuals with every ARG, analyze the review deltas.
//
// Workspace layout:
//   manifest.jsonl          append-only run and item log
//   prompts.jsonl           every prompt sent to a model
//   documents/<paper>.json  parsed papers
//   logic/<paper>.json      research-logic graphs
//   cfs/<paper>/            counterfactual bundles
//   reviews/<arg>/<ref>.json
//   features/<arg>/<ref>.json
//   analysis/               deltas.jsonl, analysis.json, report.txt

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/arg_suite.hpp"
#include "revlogic/counterfactual.hpp"
#include "revlogic/llm_gateway.hpp"
#include "revlogic/review_analysis.hpp"
#include "revlogic/stats.hpp"

namespace revlogic {

struct RoleProfiles {
  BackendProfile extraction;
  BackendProfile perturbation;
  BackendProfile judging;
  BackendProfile features;
};

struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path workspace_dir;
  std::uint64_t seed = 0;
  std::string venue;  // venue recorded on ingested papers
  RoleProfiles profiles;
  std::vector<ArgSpec> args;
  std::map<std::string, std::filesystem::path> venues;  // venue id -> asset file
  std::optional<std::filesystem::path> taxonomy;
  std::optional<std::filesystem::path> aspect_labels;  // external classifier output
  std::optional<std::filesystem::path> prompts_dir;
  std::vector<std::filesystem::path> mock_truth_dirs;  // default: corpus_dir
  std::size_t concurrency = 1;
  ShareDenominator share_denominator = ShareDenominator::AllAssertions;
  SdMode sd_mode = SdMode::PerCounterfactual;
  LanguageErrorMode language_errors = LanguageErrorMode::Llm;
  int max_attempts = 3;
  bool cache = true;
};

/// Relative paths resolve against `base_dir`. Throws Error{ConfigError}
/// for unknown enum values, duplicate ARG names, dangling venue or base-ARG
/// references and missing asset files.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const RunConfig& c);

/// Digest of everything that influences results (not concurrency).
std::string config_digest(const RunConfig& c);

enum class Stage { Ingest, Perturb, Review, Analyze, Report };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

enum class ItemState { Done, Skipped, Failed };

std::string_view to_string(ItemState s);

struct ItemStatus {
  Stage stage = Stage::Ingest;
  std::string item;
  ItemState state = ItemState::Done;
  std::string reason;
};

/// Append-only JSONL log of a run. The last record of an item wins.
class RunManifest {
 public:
  /// Opens or creates workspace/manifest.jsonl. Throws Error{ConfigMismatch}
  /// when an existing manifest was written under another config digest.
  RunManifest(const std::filesystem::path& workspace, const std::string& config_digest);

  const std::string& run_id() const { return run_id_; }
  std::optional<ItemStatus> status(Stage stage, std::string_view item) const;
  std::vector<ItemStatus> items(Stage stage) const;
  bool stage_complete(Stage stage) const;

  void record(const ItemStatus& status);
  void complete_stage(Stage stage);

 private:
  void append(const nlohmann::json& line);

  std::filesystem::path file_;
  std::string run_id_;
  mutable std::mutex mu_;
  std::map<std::pair<Stage, std::string>, ItemStatus> latest_;
  std::map<Stage, bool> complete_;
};

struct RunOptions {
  bool resume = false;                  // keep items already done or skipped
  std::optional<std::string> only_paper;
  std::optional<std::string> only_arg;
  std::optional<std::size_t> item_budget;  // Interrupted after this many new items
  std::shared_ptr<ChatBackend> backend;    // default: mock or HTTP by endpoint
};

struct StageSummary {
  Stage stage = Stage::Ingest;
  std::size_t done = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t reused = 0;  // served from the manifest on resume

  bool ok() const { return failed == 0; }
};

/// Chat backend routing "mock://" endpoints to a mock and everything else
/// to HTTP.
class RoutingBackend : public ChatBackend {
 public:
  RoutingBackend(std::shared_ptr<ChatBackend> mock, std::shared_ptr<ChatBackend> http);
  std::string chat(const BackendProfile& profile, const PromptTask& task) override;

 private:
  std::shared_ptr<ChatBackend> mock_;
  std::shared_ptr<ChatBackend> http_;
};

/// Stage that writes a workspace-relative path (by its top directory).
Stage producing_stage(const std::filesystem::path& rel);

class Pipeline {
 public:
  Pipeline(RunConfig config, RunOptions options = {});

  StageSummary ingest();
  StageSummary perturb();
  StageSummary review();
  StageSummary analyze();
  /// Plain-text report of the last analysis.
  std::string report();

  /// All four stages in order.
  std::vector<StageSummary> run_all();

  const RunConfig& config() const { return config_; }
  const RunManifest& manifest() const { return *manifest_; }
  Gateway& gateway() { return *gateway_; }

  /// Every workspace file read, with the stage that read it.
  std::vector<std::pair<Stage, std::filesystem::path>> reads() const;

 private:
  using Work = std::function<ItemStatus()>;
  StageSummary run_items(Stage stage, const std::vector<std::pair<std::string, Work>>& items);
  nlohmann::json read_json(Stage stage, const std::filesystem::path& rel) const;
  bool exists(const std::filesystem::path& rel) const;
  void write_file(const std::filesystem::path& rel, std::string_view data) const;
  std::vector<std::string> ingested_papers() const;
  std::vector<std::string> perturbed_papers() const;
  std::vector<std::string> cf_ids(Stage stage, const std::string& paper) const;
  const VenueAssets& venue_for(const ArgSpec& spec);
  bool selected_paper(std::string_view paper) const;
  bool selected_arg(std::string_view arg) const;

  RunConfig config_;
  RunOptions options_;
  std::unique_ptr<RunManifest> manifest_;
  std::unique_ptr<Gateway> gateway_;
  std::map<std::string, VenueAssets> venues_;
  AspectTaxonomy taxonomy_;
  std::map<std::string, std::unique_ptr<std::mutex>> external_locks_;  // one per external_cmd ARG
  std::size_t new_items_ = 0;
  mutable std::mutex reads_mu_;
  mutable std::vector<std::pair<Stage, std::filesystem::path>> reads_;
  std::mutex prompt_log_mu_;
};

/// analysis.json from the per-ARG delta samples.
nlohmann::json analyze_deltas(const std::vector<ReviewDelta>& deltas, const std::vector<std::string>& arg_order,
                              SdMode sd_mode);

/// Plain-text tables of an analysis.json document.
std::string render_report(const nlohmann::json& analysis);

}  // namespace revlogic

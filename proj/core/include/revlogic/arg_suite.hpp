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


// Automatic review generators (ARGs): zero-shot prompting, external
// commands and the oracle, plus truncation and review parsing.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/counterfactual.hpp"
#include "revlogic/llm_gateway.hpp"
#include "revlogic/paper_model.hpp"

namespace revlogic {

enum class ArgKind { ZeroGeneric, ZeroGuided, ExternalCmd, Oracle };

std::string_view to_string(ArgKind k);
ArgKind arg_kind_from_string(std::string_view s);

struct ScoreRange {
  double min = 1;
  double max = 10;
  bool integer = true;
};

struct VenueAssets {
  std::string venue;
  std::string description;
  std::string guidelines;
  std::string review_template;
  std::map<std::string, ScoreRange> score_ranges;
  std::string overall_score = "Overall";

  /// Template section names (lines "Name: ...") that are not scores, in order.
  std::vector<std::string> sections() const;
  /// Throws Error{ConfigError} when a score field is missing from the
  /// template or the overall score has no range.
  void validate() const;
};

void to_json(nlohmann::json& j, const VenueAssets& v);
void from_json(const nlohmann::json& j, VenueAssets& v);
VenueAssets load_venue_assets(const std::filesystem::path& file);

struct ArgSpec {
  std::string name;
  ArgKind kind = ArgKind::ZeroGeneric;
  BackendProfile backend;
  std::string venue_assets_id;
  std::optional<std::string> command_template;  // external_cmd: uses {paper} and {output}
  std::string base_arg;                          // oracle: ARG whose original reviews are paraphrased
  bool reacts = true;                            // oracle: false gives the paraphrase-only null ARG
};

void to_json(nlohmann::json& j, const ArgSpec& s);
void from_json(const nlohmann::json& j, ArgSpec& s);

enum class ParseStatus { Full, PartialNoScores, RawOnly };

std::string_view to_string(ParseStatus s);
ParseStatus parse_status_from_string(std::string_view s);

struct ReviewReport {
  std::string review_id;
  std::string arg_name;
  std::string paper_ref_id;
  std::string raw_text;
  std::map<std::string, std::string> sections;
  std::map<std::string, double> scores;
  ParseStatus parse_status = ParseStatus::RawOnly;

  std::optional<double> score(std::string_view name) const;
};

void to_json(nlohmann::json& j, const ReviewReport& r);
void from_json(const nlohmann::json& j, ReviewReport& r);

/// Estimated tokens of the rendered document.
std::size_t document_tokens(const PaperDocument& doc);

/// Fits the document into window_tokens: unchanged when it already fits,
/// otherwise appendix blocks go first, then tail blocks; only the final kept
/// text block may be cut (at a word boundary). Throws Error{WindowTooSmall}
/// when title and abstract alone exceed the window.
PaperDocument truncate(const PaperDocument& doc, std::size_t window_tokens);

/// User prompt for a zero-shot ARG (generic omits the guidelines block).
PromptTask review_prompt(ArgKind kind, const VenueAssets& venue, const PaperDocument& doc, const Gateway& gateway);

struct ParsedReview {
  std::map<std::string, std::string> sections;
  std::map<std::string, double> scores;
  ParseStatus status = ParseStatus::RawOnly;
};

/// Pattern pass, then (when sections or scores are missing and a gateway is
/// given) one structuring pass through the gateway. Out-of-range scores are
/// dropped. Never throws on malformed input.
ParsedReview parse_review(std::string_view raw, const VenueAssets& venue, Gateway* gateway,
                          const BackendProfile& profile);

struct ReviewContext {
  Gateway& gateway;
  const VenueAssets& venue;
  std::filesystem::path scratch_dir;  // external commands exchange files here
  BackendProfile parse_profile;       // gateway fallback of parse_review
};

/// Runs a zero-shot or external ARG. Throws Error{ExternalCommandFailed} and
/// gateway errors; the oracle kind goes through oracle_review instead.
ReviewReport generate_review(const ArgSpec& spec, const PaperDocument& doc, const std::string& paper_ref_id,
                             ReviewContext& ctx);

/// Oracle review of a counterfactual from the base ARG's review of the
/// original paper. Throws Error{MissingOriginalReview}.
ReviewReport oracle_review(const ReviewReport& original, const Counterfactual& cf, const ArgSpec& spec,
                           std::uint64_t seed, ReviewContext& ctx);

/// Score reduction drawn for a critical oracle review, in {1, 2}.
int oracle_score_drop(std::uint64_t seed, std::string_view cf_id);

/// Soundness comment the oracle adds for a critical counterfactual.
std::string oracle_comment(const Counterfactual& cf);

}  // namespace revlogic

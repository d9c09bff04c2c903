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


// Counterfactual papers. Soundness-critical operators compromise one
// building block of the research logic and project the revision onto the
// anchored spans; soundness-neutral operators change surface form only.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/llm_gateway.hpp"
#include "revlogic/paper_model.hpp"
#include "revlogic/research_logic.hpp"

namespace revlogic {

enum class ClaimType { Correlational, Causal, Conditional, None };
enum class Condition { Critical, Neutral };
enum class CfOperator { FindingEdit, ConclusionEdit, ResultEdit, ActivePassive, AmericanBritish, LanguageError, Layout };

std::string_view to_string(ClaimType t);
std::string_view to_string(Condition c);
std::string_view to_string(CfOperator op);
ClaimType claim_type_from_string(std::string_view s);
Condition condition_from_string(std::string_view s);
CfOperator cf_operator_from_string(std::string_view s);

bool is_critical(CfOperator op);
inline constexpr CfOperator kCriticalOperators[] = {CfOperator::FindingEdit, CfOperator::ConclusionEdit,
                                                    CfOperator::ResultEdit};
inline constexpr CfOperator kNeutralOperators[] = {CfOperator::ActivePassive, CfOperator::AmericanBritish,
                                                   CfOperator::LanguageError, CfOperator::Layout};

struct Counterfactual {
  std::string cf_id;
  std::string paper_id;
  Condition condition = Condition::Neutral;
  CfOperator op = CfOperator::Layout;
  std::optional<std::string> target_block_id;
  std::optional<std::string> original_block_text;
  std::optional<std::string> revised_block_text;
  std::vector<TextEdit> edits;
  std::vector<std::string> relocated_block_ids;  // layout only
  EditStats stats;
  std::optional<JudgeVerdict> verdict;
  std::uint64_t seed = 0;
  std::vector<std::string> allowed_block_ids;  // blocks the operator may touch
  int attempts = 0;
};

void to_json(nlohmann::json& j, const Counterfactual& cf);
void from_json(const nlohmann::json& j, Counterfactual& cf);

struct ValueChange {
  std::string old_value;
  std::string new_value;
  bool operator==(const ValueChange&) const = default;
};

struct CellDirective {
  std::string table_id;
  std::size_t row = 0;
  std::size_t column = 0;
  std::string old_value;
  std::string new_value;
};

/// One revised building block and the spans that state it.
struct BlockRevision {
  std::string building_block_id;
  std::string original;
  std::string revised;
  std::vector<SpanAnchor> anchors;  // primary + coreference anchors
};

struct Revision {
  CfOperator op = CfOperator::FindingEdit;
  std::string target_id;
  std::vector<BlockRevision> blocks;  // blocks[0] is the target
  std::vector<ValueChange> values;    // result edits
  std::vector<CellDirective> cells;   // result edits on tables
  std::string hypothesis;             // conclusion edits
};

enum class LanguageErrorMode { Llm, Rules };

struct CfContext {
  Gateway& gateway;
  BackendProfile perturb_profile;
  BackendProfile judge_profile;
  int max_attempts = 3;
  LanguageErrorMode language_errors = LanguageErrorMode::Llm;
};

/// Priority causal > conditional > correlational when several apply.
ClaimType classify_claim(const BuildingBlock& finding, CfContext& ctx);

/// Throws Error{PreconditionViolated} for ClaimType::None or a non-finding.
Revision compromise_finding(const ResearchLogicGraph& graph, const BuildingBlock& finding, ClaimType type,
                            CfContext& ctx);

/// Hypothetical unsupported result added to the conclusion and to the finding
/// it supports. Throws Error{PreconditionViolated} when the conclusion has
/// no supporting result.
Revision compromise_conclusion(const ResearchLogicGraph& graph, const BuildingBlock& conclusion, CfContext& ctx);

/// Weakened result with value changes and table-cell directives. Throws
/// Error{TableCellNotFound} for directives naming absent cells.
Revision compromise_result(const PaperDocument& doc, const ResearchLogicGraph& graph, const BuildingBlock& result,
                           CfContext& ctx);

/// Edits realizing a revision. Value changes are substituted
/// deterministically in every anchored mention; other spans are rewritten by
/// the projection prompt. Overlapping anchors are merged to one edit.
std::vector<TextEdit> project_edits(const PaperDocument& doc, const Revision& revision, CfContext& ctx);

/// Blocks the revision may touch.
std::vector<std::string> edit_envelope(const Revision& revision);

/// True when every changed block lies in cf.allowed_block_ids.
bool minimality_holds(const Counterfactual& cf, const PaperDocument& before, const PaperDocument& after);

/// Judge verdict; a failed machine minimality check forces minimal = false.
JudgeVerdict validate(const Counterfactual& cf, const PaperDocument& before, const PaperDocument& after,
                      CfContext& ctx);

struct GeneratedCf {
  Counterfactual cf;
  PaperDocument document;
};

struct SkippedOperator {
  CfOperator op;
  std::string reason;
};

struct CriticalSet {
  std::vector<GeneratedCf> counterfactuals;
  std::vector<SkippedOperator> skipped;
};

/// Up to one counterfactual per critical operator. Candidates follow
/// finding_rank; a finding where the operator does not apply is passed over,
/// a rejected or failed candidate uses one of max_attempts.
CriticalSet generate_critical_set(const PaperDocument& doc, const ResearchLogicGraph& graph, std::uint64_t seed,
                                  CfContext& ctx);

/// Fractions of text blocks sampled by the neutral operators.
inline constexpr double kVoiceFraction = 0.4;
inline constexpr double kSpellingFraction = 0.4;
inline constexpr double kLanguageErrorFraction = 0.2;
inline constexpr double kLayoutFraction = 0.4;

/// ctx may be null for the rule-based operators (american_british, layout,
/// and language_error in Rules mode).
GeneratedCf apply_neutral(const PaperDocument& doc, CfOperator op, std::uint64_t seed, CfContext* ctx);

/// Indices of the text blocks an operator samples at `fraction` with `seed`.
std::vector<std::size_t> sample_text_blocks(const PaperDocument& doc, double fraction, std::uint64_t seed);

/// Counterfactual id: "<paper_id>.<operator>".
std::string make_cf_id(std::string_view paper_id, CfOperator op);

}  // namespace revlogic

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


// Research-logic graph of a paper: ranked empirical findings supported by
// conclusions, conclusions supported by results, results produced by the
// method. Extraction is LLM-driven; every building block is anchored to
// verbatim spans of the source document.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/llm_gateway.hpp"
#include "revlogic/paper_model.hpp"

namespace revlogic {

enum class BlockRole { Method, Result, Conclusion, Finding };

std::string_view to_string(BlockRole role);
BlockRole block_role_from_string(std::string_view s);
/// method 0 < result 1 < conclusion 2 < finding 3.
int level(BlockRole role);
/// Role implied by an id prefix (f-, c-, r-, m-); nullopt for anything else.
std::optional<BlockRole> role_of_id(std::string_view id);

struct BuildingBlock {
  std::string id;
  BlockRole kind = BlockRole::Finding;
  std::string summary;
  std::vector<SpanAnchor> anchors;
  std::vector<SpanAnchor> coreference_anchors;

  bool operator==(const BuildingBlock&) const = default;
};

/// child_ids jointly support parent_id. Children are kept sorted.
struct SupportEdge {
  std::vector<std::string> child_ids;
  std::string parent_id;

  bool operator==(const SupportEdge&) const = default;
};

struct ResearchLogicGraph {
  std::string paper_id;
  std::string goal_summary;
  std::vector<SpanAnchor> goal_anchors;
  std::vector<BuildingBlock> blocks;
  std::vector<SupportEdge> edges;
  std::vector<std::string> finding_rank;
  std::vector<std::string> unsupported_findings;

  const BuildingBlock* find(std::string_view id) const;
  std::vector<const BuildingBlock*> of_kind(BlockRole kind) const;
  /// Children supporting `parent_id`, empty when it has no incoming edge.
  std::vector<std::string> children_of(std::string_view parent_id) const;
  /// Parents that `child_id` supports, in edge order.
  std::vector<std::string> parents_of(std::string_view child_id) const;

  bool operator==(const ResearchLogicGraph&) const = default;
};

void to_json(nlohmann::json& j, const BuildingBlock& b);
void from_json(const nlohmann::json& j, BuildingBlock& b);
void to_json(nlohmann::json& j, const SupportEdge& e);
void from_json(const nlohmann::json& j, SupportEdge& e);
void to_json(nlohmann::json& j, const ResearchLogicGraph& g);
void from_json(const nlohmann::json& j, ResearchLogicGraph& g);

struct ExtractionContext {
  Gateway& gateway;
  BackendProfile profile;
  bool refine = true;  // one self-refinement cycle per extraction prompt
};

struct GoalSummary {
  std::string summary;
  std::vector<SpanAnchor> anchors;
};

struct ConclusionLayer {
  std::vector<BuildingBlock> conclusions;
  std::vector<SupportEdge> edges;
  std::vector<std::string> unsupported_findings;
};

struct ResultLayer {
  std::vector<BuildingBlock> results;
  BuildingBlock method;
  std::vector<SupportEdge> edges;  // results -> conclusion and method -> result
};

/// Throws QuoteNotFound / UnknownBlock when a cited span is absent.
GoalSummary extract_goal(const PaperDocument& doc, ExtractionContext& ctx);

/// Empirical findings ranked by relevance to the goal (ties: document order
/// of the first anchor). Throws Error{NoEmpiricalFindings}.
std::vector<BuildingBlock> extract_findings(const PaperDocument& doc, const GoalSummary& goal,
                                            ExtractionContext& ctx);

/// Throws Error{DanglingLink} for links naming unknown ids.
ConclusionLayer extract_conclusions(const PaperDocument& doc, const std::vector<BuildingBlock>& findings,
                                    ExtractionContext& ctx);

ResultLayer extract_results_and_method(const PaperDocument& doc,
                                       const std::vector<BuildingBlock>& conclusions,
                                       ExtractionContext& ctx);

/// Adds coreference anchors to the graph's blocks. Mentions that do not
/// resolve, or duplicate a primary anchor, are dropped.
void extract_coreferences(const PaperDocument& doc, ResearchLogicGraph& graph, ExtractionContext& ctx);

/// Runs all extraction steps and validates the result. Errors are annotated
/// with the failing step's name.
ResearchLogicGraph extract_research_logic(const PaperDocument& doc, ExtractionContext& ctx);

/// Structural checks: DanglingLink, then CycleDetected, then
/// LayeringViolation; finding_rank must be a permutation of the findings
/// (PreconditionViolated). When doc is given every anchor must resolve.
void validate_graph(const ResearchLogicGraph& graph, const PaperDocument* doc = nullptr);

}  // namespace revlogic

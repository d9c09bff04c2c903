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

#include "revlogic/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "revlogic/error.hpp"

namespace revlogic {
namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Length of "{ident}" starting at pos, or 0 when pos does not open a placeholder.
std::size_t placeholder_length(std::string_view s, std::size_t pos) {
  if (pos + 2 >= s.size() || s[pos] != '{' || !is_ident_start(s[pos + 1])) return 0;
  std::size_t k = pos + 2;
  while (k < s.size() && is_ident_char(s[k])) ++k;
  if (k >= s.size() || s[k] != '}') return 0;
  return k + 1 - pos;
}

constexpr std::string_view kSystem =
    R"(You are a meticulous research assistant who analyzes scientific papers. Papers are given as Markdown where every paragraph, table, caption and heading is prefixed with its id in square brackets, for example [p-0007] or [t-001]. When you cite evidence, copy the quote verbatim from a single block and give that block's id. Reply with JSON only when JSON is requested.)";

constexpr std::string_view kRefineCritique =
    R"(Below is a task and a draft answer. Check the draft carefully against the task: are all quotes verbatim, are block ids correct, is anything missing or wrong, is the JSON well formed?
If the draft needs no changes, reply with exactly NO_CHANGES. Otherwise list the concrete problems.

## Task
{task}

## Draft
{draft})";

constexpr std::string_view kRefineRevise =
    R"(Revise the draft answer so that it fixes every problem raised in the critique. Keep everything that was correct. Reply with the revised answer only, in the same format as the draft.

## Task
{task}

## Draft
{draft}

## Critique
{critique})";

constexpr std::string_view kStructuredReask =
    R"(Your previous answer could not be used: {error}
Answer the same request again and reply with valid JSON only, following the requested structure exactly.

## Previous answer
{previous})";

constexpr std::string_view kJudgeReask =
    R"(Your previous verdict could not be parsed: {error}
Reply again. The first line must contain exactly four comma-separated words, each pass or fail, for relevant, minimal, plausible, diverse (in that order). Put your rationale on the following lines.

## Previous answer
{previous})";

constexpr std::string_view kLogicGoal =
    R"(Read the paper below and summarize its research goal in one paragraph. Support the summary with one verbatim quote from the paper.
Reply with JSON: {{"summary": "...", "anchors": [{{"block_id": "p-0001", "quote": "..."}}]}}

Title: {title}

{paper})";

constexpr std::string_view kLogicContributions =
    R"(List every contribution the paper claims. For each contribution, give a one-sentence summary, whether it is an empirical finding (supported by experiments or measurements) or not (theoretical result, resource, opinion), and one or more verbatim quotes where the paper states it.
Reply with JSON: {{"contributions": [{{"summary": "...", "empirical": true, "anchors": [{{"block_id": "...", "quote": "..."}}]}}]}}

Title: {title}

{paper})";

constexpr std::string_view kLogicRank =
    R"(The research goal of a paper is:
{goal}

Rate how central each of the following findings is to that goal on a scale from 0 (peripheral) to 10 (the main finding).
{findings}

Reply with JSON: {{"scores": [{{"id": "f-1", "relevance": 7}}]}})";

constexpr std::string_view kLogicConclusions =
    R"(Extract all conclusions the paper draws from its experimental results. A conclusion interprets one or more results (for example "method A is more robust than B under noise"). Give a one-sentence summary and verbatim quotes for each.
Reply with JSON: {{"items": [{{"summary": "...", "anchors": [{{"block_id": "...", "quote": "..."}}]}}]}}

Title: {title}

{paper})";

constexpr std::string_view kLogicLinkConclusions =
    R"(Link each conclusion to the findings it supports. The conclusions linked to one finding must jointly support it.

Findings:
{findings}

Conclusions:
{conclusions}

Reply with JSON: {{"links": [{{"child": "c-1", "parents": ["f-1"]}}]}})";

constexpr std::string_view kLogicResults =
    R"(Identify all empirical results reported in the paper, whether in tables, figure captions, or the text. Quote each place the result is reported verbatim; for tables quote the cell value exactly as written and give the table id.
Reply with JSON: {{"items": [{{"summary": "...", "anchors": [{{"block_id": "...", "quote": "..."}}]}}]}}

Title: {title}

{paper})";

constexpr std::string_view kLogicLinkResults =
    R"(Link each result to the conclusions it supports. The results linked to one conclusion must jointly support it.

Conclusions:
{conclusions}

Results:
{results}

Reply with JSON: {{"links": [{{"child": "r-1", "parents": ["c-1"]}}]}})";

constexpr std::string_view kLogicMethod =
    R"(Summarize the experimental methodology of the paper (data, models, evaluation protocol) in one paragraph, with verbatim quotes of the passages that describe it.
Reply with JSON: {{"summary": "...", "anchors": [{{"block_id": "...", "quote": "..."}}]}}

Title: {title}

{paper})";

constexpr std::string_view kLogicLinkMethod =
    R"(The methodology of the paper is:
{method}

Which of the following results does this methodology produce?
{results}

Reply with JSON: {{"results": ["r-1"]}})";

constexpr std::string_view kLogicCoreferences =
    R"(For each building block below, find every other place in the paper that mentions the same claim or value (coreferences), such as a number repeated in the text and in a table or caption. Quote each mention verbatim with its block id. Do not repeat the passages already listed.

Building blocks:
{blocks}

{paper}

Reply with JSON: {{"coreferences": [{{"block": "r-1", "anchors": [{{"block_id": "...", "quote": "..."}}]}}]}})";

constexpr std::string_view kCfClassify =
    R"(Classify the following finding as a correlational claim, a causal claim, or a conditional claim (a claim that only holds under stated conditions). Several classes may apply. If none applies, return an empty list.

Finding: {finding}
Evidence: {evidence}

Reply with JSON: {{"classes": ["correlational" | "causal" | "conditional"]}})";

constexpr std::string_view kCfFindingCorrelational =
    R"(The following finding states a correlation. Rephrase it as a causal claim that the paper's conclusions do not support, while keeping its topic, style, and length.

Finding: {finding}
Supporting conclusions:
{conclusions}

Reply with JSON: {{"revised": "..."}})";

constexpr std::string_view kCfFindingCausal =
    R"(The following finding states a causal relation. Invert the direction of causality while keeping its topic, style, and length.

Finding: {finding}
Supporting conclusions:
{conclusions}

Reply with JSON: {{"revised": "..."}})";

constexpr std::string_view kCfFindingConditional =
    R"(The following finding only holds under stated conditions. Remove the conditions so that the claim is stated in general, keeping its topic and style.

Finding: {finding}
Supporting conclusions:
{conclusions}

Reply with JSON: {{"revised": "..."}})";

constexpr std::string_view kCfConclusionHypothesis =
    R"(The conclusion below is supported by the listed results. Invent one additional, hypothetical result that fits the scope of the paper but is NOT supported by any experiment in the paper. It must not duplicate an existing result.

Conclusion: {conclusion}
Results:
{results}

Reply with JSON: {{"hypothetical_result": "..."}})";

constexpr std::string_view kCfConclusion =
    R"(Augment the conclusion and the finding it supports so that both additionally claim the hypothetical result below, stated as if it had been observed. Keep the original wording otherwise.

Conclusion: {conclusion}
Finding: {finding}
Hypothetical result: {hypothesis}

Reply with JSON: {{"revised_conclusion": "...", "revised_finding": "..."}})";

constexpr std::string_view kCfResult =
    R"(Negate or weaken the following result so that the conclusions drawn from it are no longer supported, for example by reducing a strong gain to a marginal one. List every number that changes as an old/new pair, with the old value exactly as written in the paper.

Result: {result}
Evidence: {evidence}
Conclusions that depend on it:
{conclusions}

Reply with JSON: {{"revised": "...", "values": [{{"old": "0.907", "new": "0.807"}}]}})";

constexpr std::string_view kCfTable =
    R"(A result reported in the table below has been revised. First reason step by step about the structure of the table: what the rows and columns mean and which cells report the revised result. Then list the cells to change. Rows are numbered from 0 (header row), skipping the delimiter row; columns from 0.

Table {table_id}:
{table}

Revised result: {revised}
Value changes: {values}

Reply with JSON: {{"reasoning": "...", "cells": [{{"table_id": "{table_id}", "row": 1, "column": 2, "old": "...", "new": "..."}}]}})";

constexpr std::string_view kCfProject =
    R"(A building block of the paper's research logic has been revised. Rewrite the quoted passage so that it reflects the revision. Change as little as possible, keep the style fluent and consistent with the surrounding paragraph, and return only the replacement for the quoted passage.

Original building block: {original}
Revised building block: {revised}
Value changes: {values}

Paragraph [{block_id}]:
{paragraph}

Passage to rewrite:
{quote}

Reply with JSON: {{"replacement": "..."}})";

constexpr std::string_view kCfJudge =
    R"(You are checking an edited version of a research paper. The edit is meant to break the paper's research logic. Judge it against four criteria:
A. relevant: the edit directly harms the soundness of the paper.
B. minimal: only passages tied to the edited building block changed; everything else is preserved.
C. plausible: the edited text is fluent, on topic, and coherent with the rest of the paper.
D. diverse: the edit is of the stated type ({operator}) and not a trivial variation.

Edited building block ({operator}):
Original: {original}
Revised: {revised}

Edits:
{edits}

Reply with four comma-separated words on the first line, each pass or fail, in the order relevant, minimal, plausible, diverse. Give your rationale on the following lines.)";

constexpr std::string_view kNeutralVoice =
    R"(Rewrite the following paragraph, changing sentences from active to passive voice and from passive to active voice where natural. Do not change the meaning, the numbers, citations, or the Markdown formatting.

{paragraph}

Reply with JSON: {{"rewritten": "..."}})";

constexpr std::string_view kNeutralErrors =
    R"(Introduce two or three minor spelling or grammar mistakes into the following paragraph, like a hurried author would make. Do not change the meaning, the numbers, or citations.

{paragraph}

Reply with JSON: {{"rewritten": "..."}})";

constexpr std::string_view kArgGeneric =
    R"(You are an expert peer reviewer with extensive experience in academic publishing.
Your goal is to provide a rigorous, objective, and constructive review strictly adhering to the provided template.
You are reviewing for {venue}. {venue} has the following focus: {venue_description}

## Input Paper
{paper}

## Reviewer Instructions
* Read the entire paper carefully and critically
* Systematically evaluate the paper using the provided template
* Ensure each section of the template is completed precisely and substantively
* Ground your assessment in specific evidence from the paper
* Maintain an objective, professional tone

## Output Format
-----
Review Report
{template}

## Evaluation Approach
* Analyze the paper comprehensively across multiple dimensions
* Provide specific, actionable feedback
* Support all assessments with direct references to the paper
* Be precise in addressing each required template section
* Critically assess the paper's scientific merit and contribution

## Final Reminder:
* Strictly follow the output structure
* Provide substantive content for each template section
* Ensure your scores align with your qualitative assessment
* For each score, pick only numbers from the respective range and by its meaning explained above
* Make sure to start your review report with "-----")";

constexpr std::string_view kArgGuided =
    R"(You are an expert peer reviewer with extensive experience in academic publishing.
Your goal is to provide a rigorous, objective, and constructive review strictly adhering to the provided template.
You are reviewing for {venue}. {venue} has the following focus: {venue_description}

## Input Paper
{paper}

## Reviewing Guidelines
You should closely follow the guidelines of the conference provided below while reviewing.

{venue_guidelines}

## Output Format
-----
Review Report
{template}

## Evaluation Approach
* Analyze the paper comprehensively across multiple dimensions
* Provide specific, actionable feedback
* Support all assessments with direct references to the paper
* Be precise in addressing each required template section
* Critically assess the paper's scientific merit and contribution

## Final Reminder:
* Strictly follow the output format
* Provide substantive content for each template section
* Closely follow the review guidelines
* Ensure your scores align with your qualitative assessment
* For each score, pick only numbers from the respective range and by its meaning explained above
* Make sure to start your review report with "-----")";

constexpr std::string_view kArgSystem =
    R"(You are an expert peer reviewer. Follow the instructions in the user message exactly.)";

constexpr std::string_view kOracleParaphrase =
    R"(Paraphrase the following peer review. Keep its structure, its section headings, every score line, and every point it makes; change only the wording.

{review})";

constexpr std::string_view kReviewParse =
    R"(The following peer review should follow this template:
{template}

Extract the text of each template section and the numeric value of each score ({score_names}). If a score is written in prose ("8 out of 10"), return the number. Omit anything that is not present.

Review:
{review}

Reply with JSON: {{"sections": {{"Summary": "..."}}, "scores": {{"Overall": 6}}}})";

constexpr std::string_view kAssertExtract =
    R"(Split the following peer review into assertions: minimal evaluative statements about the paper. Classify each as positive, negative, or neutral with respect to the paper. Ignore headings and score lines.

{review}

Reply with JSON: {{"assertions": [{{"text": "...", "polarity": "positive"}}]}})";

constexpr std::string_view kAssertAspects =
    R"(For each numbered assertion from a peer review, list the aspects of the paper it discusses. Use only these labels: {labels}. An assertion may have zero, one, or several labels.

{assertions}

Reply with JSON: {{"labels": [["soundness"], []]}} with one list per assertion, in order.)";

constexpr std::string_view kAssertAlign =
    R"(Below are two lists of assertions from two reviews of the same paper. Pair assertions that make the same point (same aspect, same judgment), each assertion in at most one pair.

List A:
{left}

List B:
{right}

Reply with JSON: {{"pairs": [[0, 2]]}} using the zero-based indices.)";

}  // namespace

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      ++i;
      continue;
    }
    if (std::size_t len = placeholder_length(tmpl, i); len > 0) {
      std::string name(tmpl.substr(i + 1, len - 2));
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      i += len - 1;
    }
  }
  return names;
}

std::string substitute(std::string_view tmpl, const TemplateParams& params) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const char c = tmpl[i];
    if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
      out.push_back(c);
      ++i;
      continue;
    }
    if (std::size_t len = placeholder_length(tmpl, i); len > 0) {
      const std::string name(tmpl.substr(i + 1, len - 2));
      auto it = params.find(name);
      if (it == params.end()) {
        throw Error(ErrorCode::UnresolvedPlaceholder, "template placeholder {" + name + "} has no value");
      }
      out += it->second;
      i += len - 1;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

PromptLibrary::PromptLibrary() {
  const std::pair<std::string_view, std::string_view> builtins[] = {
      {"system", kSystem},
      {"refine.critique", kRefineCritique},
      {"refine.revise", kRefineRevise},
      {"structured.reask", kStructuredReask},
      {"judge.reask", kJudgeReask},
      {"logic.goal", kLogicGoal},
      {"logic.contributions", kLogicContributions},
      {"logic.rank", kLogicRank},
      {"logic.conclusions", kLogicConclusions},
      {"logic.link_conclusions", kLogicLinkConclusions},
      {"logic.results", kLogicResults},
      {"logic.link_results", kLogicLinkResults},
      {"logic.method", kLogicMethod},
      {"logic.link_method", kLogicLinkMethod},
      {"logic.coreferences", kLogicCoreferences},
      {"cf.classify", kCfClassify},
      {"cf.finding.correlational", kCfFindingCorrelational},
      {"cf.finding.causal", kCfFindingCausal},
      {"cf.finding.conditional", kCfFindingConditional},
      {"cf.conclusion.hypothesis", kCfConclusionHypothesis},
      {"cf.conclusion", kCfConclusion},
      {"cf.result", kCfResult},
      {"cf.table", kCfTable},
      {"cf.project", kCfProject},
      {"cf.judge", kCfJudge},
      {"neutral.voice", kNeutralVoice},
      {"neutral.errors", kNeutralErrors},
      {"arg.system", kArgSystem},
      {"arg.generic", kArgGeneric},
      {"arg.guided", kArgGuided},
      {"oracle.paraphrase", kOracleParaphrase},
      {"review.parse", kReviewParse},
      {"assert.extract", kAssertExtract},
      {"assert.aspects", kAssertAspects},
      {"assert.align", kAssertAlign},
  };
  for (auto [name, body] : builtins) templates_.emplace(std::string(name), std::string(body));
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib;
  return lib;
}

void PromptLibrary::load_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "prompt directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    templates_[file.stem().string()] = std::move(body);
  }
}

void PromptLibrary::set(std::string name, std::string tmpl) {
  templates_[std::move(name)] = std::move(tmpl);
}

bool PromptLibrary::contains(std::string_view name) const {
  return templates_.find(name) != templates_.end();
}

const std::string& PromptLibrary::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::ConfigError, "no prompt template named '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, body] : templates_) out.push_back(name);
  return out;
}

}  // namespace revlogic

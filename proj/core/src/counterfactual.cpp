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


#include "revlogic/counterfactual.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/text.hpp"

namespace revlogic {

using nlohmann::json;

std::string_view to_string(ClaimType t) {
  switch (t) {
    case ClaimType::Correlational: return "correlational";
    case ClaimType::Causal: return "causal";
    case ClaimType::Conditional: return "conditional";
    case ClaimType::None: return "none";
  }
  return "none";
}

std::string_view to_string(Condition c) { return c == Condition::Critical ? "critical" : "neutral"; }

std::string_view to_string(CfOperator op) {
  switch (op) {
    case CfOperator::FindingEdit: return "finding_edit";
    case CfOperator::ConclusionEdit: return "conclusion_edit";
    case CfOperator::ResultEdit: return "result_edit";
    case CfOperator::ActivePassive: return "active_passive";
    case CfOperator::AmericanBritish: return "american_british";
    case CfOperator::LanguageError: return "language_error";
    case CfOperator::Layout: return "layout";
  }
  return "layout";
}

ClaimType claim_type_from_string(std::string_view s) {
  for (auto t : {ClaimType::Correlational, ClaimType::Causal, ClaimType::Conditional, ClaimType::None})
    if (to_string(t) == s) return t;
  throw Error(ErrorCode::SchemaViolation, "unknown claim type '" + std::string(s) + "'");
}

Condition condition_from_string(std::string_view s) {
  if (s == "critical") return Condition::Critical;
  if (s == "neutral") return Condition::Neutral;
  throw Error(ErrorCode::SchemaViolation, "unknown condition '" + std::string(s) + "'");
}

CfOperator cf_operator_from_string(std::string_view s) {
  for (auto op : kCriticalOperators)
    if (to_string(op) == s) return op;
  for (auto op : kNeutralOperators)
    if (to_string(op) == s) return op;
  throw Error(ErrorCode::ConfigError, "unknown counterfactual operator '" + std::string(s) + "'");
}

bool is_critical(CfOperator op) {
  return op == CfOperator::FindingEdit || op == CfOperator::ConclusionEdit || op == CfOperator::ResultEdit;
}

std::string make_cf_id(std::string_view paper_id, CfOperator op) {
  return std::string(paper_id) + "." + std::string(to_string(op));
}

void to_json(json& j, const Counterfactual& cf) {
  j = json{{"cf_id", cf.cf_id},
           {"paper_id", cf.paper_id},
           {"condition", to_string(cf.condition)},
           {"operator", to_string(cf.op)},
           {"target_block_id", cf.target_block_id ? json(*cf.target_block_id) : json(nullptr)},
           {"original_block_text", cf.original_block_text ? json(*cf.original_block_text) : json(nullptr)},
           {"revised_block_text", cf.revised_block_text ? json(*cf.revised_block_text) : json(nullptr)},
           {"edits", cf.edits},
           {"relocated_block_ids", cf.relocated_block_ids},
           {"stats", cf.stats},
           {"verdict", cf.verdict ? json(*cf.verdict) : json(nullptr)},
           {"seed", cf.seed},
           {"allowed_block_ids", cf.allowed_block_ids},
           {"attempts", cf.attempts}};
}

void from_json(const json& j, Counterfactual& cf) {
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
  };
  cf.cf_id = j.at("cf_id").get<std::string>();
  cf.paper_id = j.at("paper_id").get<std::string>();
  cf.condition = condition_from_string(j.at("condition").get<std::string>());
  cf.op = cf_operator_from_string(j.at("operator").get<std::string>());
  cf.target_block_id = opt_string("target_block_id");
  cf.original_block_text = opt_string("original_block_text");
  cf.revised_block_text = opt_string("revised_block_text");
  cf.edits = j.at("edits").get<std::vector<TextEdit>>();
  cf.relocated_block_ids = j.value("relocated_block_ids", std::vector<std::string>{});
  cf.stats = j.at("stats").get<EditStats>();
  if (j.contains("verdict") && !j["verdict"].is_null()) cf.verdict = j["verdict"].get<JudgeVerdict>();
  else cf.verdict.reset();
  cf.seed = j.at("seed").get<std::uint64_t>();
  cf.allowed_block_ids = j.value("allowed_block_ids", std::vector<std::string>{});
  cf.attempts = j.value("attempts", 0);
}

// ---------------------------------------------------------------------------

namespace {

json ask(CfContext& ctx, std::string_view name, TemplateParams params, std::string schema, bool refine = false) {
  auto task = ctx.gateway.make_task(name, std::move(params), std::move(schema));
  return ctx.gateway.complete_structured(task, ctx.perturb_profile, refine);
}

std::string quotes_of(const BuildingBlock& b) {
  std::string out;
  for (const auto& a : b.anchors) out += "[" + a.block_id + "] \"" + a.quote + "\"\n";
  return out;
}

std::string describe_ids(const ResearchLogicGraph& g, const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids)
    if (const auto* b = g.find(id)) out += "[" + b->id + "] " + b->summary + "\n";
  return out;
}

std::vector<SpanAnchor> all_anchors(const BuildingBlock& b) {
  auto out = b.anchors;
  out.insert(out.end(), b.coreference_anchors.begin(), b.coreference_anchors.end());
  return out;
}

std::string describe_values(const std::vector<ValueChange>& values) {
  if (values.empty()) return "none";
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += "; ";
    out += v.old_value + " -> " + v.new_value;
  }
  return out;
}

bool number_char(char c) { return (c >= '0' && c <= '9') || c == '.' || c == ','; }

// Replaces whole-token occurrences of `from` (no adjacent digits/decimal marks).
std::string replace_value(std::string_view text, std::string_view from, std::string_view to, std::size_t* count) {
  std::string out;
  std::size_t i = 0;
  *count = 0;
  while (i < text.size()) {
    const auto pos = from.empty() ? std::string_view::npos : text.find(from, i);
    if (pos == std::string_view::npos) break;
    const bool left_ok = pos == 0 || !(std::isdigit(static_cast<unsigned char>(text[pos - 1])) ||
                                       (text[pos - 1] == '.' && pos >= 2 &&
                                        std::isdigit(static_cast<unsigned char>(text[pos - 2]))));
    const std::size_t after = pos + from.size();
    const bool right_ok = after >= text.size() || !(std::isdigit(static_cast<unsigned char>(text[after])) ||
                                                    (number_char(text[after]) && after + 1 < text.size() &&
                                                     std::isdigit(static_cast<unsigned char>(text[after + 1]))));
    if (left_ok && right_ok) {
      out.append(text.substr(i, pos - i));
      out.append(to);
      ++*count;
    } else {
      out.append(text.substr(i, after - i));
    }
    i = after;
  }
  out.append(text.substr(std::min(i, text.size())));
  return out;
}

std::string apply_values(std::string_view text, const std::vector<ValueChange>& values, std::size_t* total) {
  std::string out(text);
  *total = 0;
  for (const auto& v : values) {
    std::size_t n = 0;
    out = replace_value(out, v.old_value, v.new_value, &n);
    *total += n;
  }
  return out;
}

bool overlaps(const SpanAnchor& a, const SpanAnchor& b) {
  if (a.block_id != b.block_id) return false;
  if (a.start == a.end || b.start == b.end) return a.start >= b.start && a.start <= b.end;
  return a.start < b.end && b.start < a.end;
}

const TableCell* cell_at(const std::vector<TableCell>& cells, std::size_t row, std::size_t column) {
  for (const auto& c : cells)
    if (c.row == row && c.column == column) return &c;
  return nullptr;
}

}  // namespace

ClaimType classify_claim(const BuildingBlock& finding, CfContext& ctx) {
  if (finding.kind != BlockRole::Finding)
    throw Error(ErrorCode::PreconditionViolated, "classify_claim needs a finding, got " + finding.id);
  const auto reply = ask(ctx, "cf.classify", {{"finding", finding.summary}, {"evidence", quotes_of(finding)}},
                         "cf.classify");
  bool correlational = false, causal = false, conditional = false;
  for (const auto& c : reply.at("classes")) {
    const auto s = c.get<std::string>();
    correlational = correlational || s == "correlational";
    causal = causal || s == "causal";
    conditional = conditional || s == "conditional";
  }
  if (causal) return ClaimType::Causal;
  if (conditional) return ClaimType::Conditional;
  if (correlational) return ClaimType::Correlational;
  return ClaimType::None;
}

Revision compromise_finding(const ResearchLogicGraph& graph, const BuildingBlock& finding, ClaimType type,
                            CfContext& ctx) {
  if (finding.kind != BlockRole::Finding)
    throw Error(ErrorCode::PreconditionViolated, "compromise_finding needs a finding, got " + finding.id);
  if (type == ClaimType::None)
    throw Error(ErrorCode::PreconditionViolated, "finding " + finding.id + " has no editable claim type");
  const std::string task = "cf.finding." + std::string(to_string(type));
  const auto reply = ask(ctx, task,
                         {{"finding", finding.summary}, {"conclusions", describe_ids(graph, graph.children_of(finding.id))}},
                         "cf.finding");
  Revision rev;
  rev.op = CfOperator::FindingEdit;
  rev.target_id = finding.id;
  rev.blocks.push_back({finding.id, finding.summary, reply.at("revised").get<std::string>(), all_anchors(finding)});
  return rev;
}

Revision compromise_conclusion(const ResearchLogicGraph& graph, const BuildingBlock& conclusion, CfContext& ctx) {
  if (conclusion.kind != BlockRole::Conclusion)
    throw Error(ErrorCode::PreconditionViolated, "compromise_conclusion needs a conclusion, got " + conclusion.id);
  const auto results = graph.children_of(conclusion.id);
  if (results.empty())
    throw Error(ErrorCode::PreconditionViolated, "conclusion " + conclusion.id + " has no supporting result");
  const BuildingBlock* finding = nullptr;
  for (const auto& p : graph.parents_of(conclusion.id))
    if (const auto* b = graph.find(p); b && b->kind == BlockRole::Finding) {
      finding = b;
      break;
    }

  const auto hyp = ask(ctx, "cf.conclusion.hypothesis",
                       {{"conclusion", conclusion.summary}, {"results", describe_ids(graph, results)}}, "cf.hypothesis");
  Revision rev;
  rev.op = CfOperator::ConclusionEdit;
  rev.target_id = conclusion.id;
  rev.hypothesis = hyp.at("hypothetical_result").get<std::string>();
  const auto reply = ask(ctx, "cf.conclusion",
                         {{"conclusion", conclusion.summary},
                          {"finding", finding ? finding->summary : std::string("(none)")},
                          {"hypothesis", rev.hypothesis}},
                         "cf.conclusion");
  rev.blocks.push_back(
      {conclusion.id, conclusion.summary, reply.at("revised_conclusion").get<std::string>(), all_anchors(conclusion)});
  if (finding) {
    const auto revised_finding = reply.at("revised_finding").get<std::string>();
    if (!revised_finding.empty() && revised_finding != finding->summary)
      rev.blocks.push_back({finding->id, finding->summary, revised_finding, all_anchors(*finding)});
  }
  return rev;
}

Revision compromise_result(const PaperDocument& doc, const ResearchLogicGraph& graph, const BuildingBlock& result,
                           CfContext& ctx) {
  if (result.kind != BlockRole::Result)
    throw Error(ErrorCode::PreconditionViolated, "compromise_result needs a result, got " + result.id);
  const auto reply = ask(ctx, "cf.result",
                         {{"result", result.summary},
                          {"evidence", quotes_of(result)},
                          {"conclusions", describe_ids(graph, graph.parents_of(result.id))}},
                         "cf.result");
  Revision rev;
  rev.op = CfOperator::ResultEdit;
  rev.target_id = result.id;
  for (const auto& v : reply.at("values")) {
    ValueChange vc{v.at("old").get<std::string>(), v.at("new").get<std::string>()};
    if (!vc.old_value.empty() && vc.old_value != vc.new_value) rev.values.push_back(std::move(vc));
  }
  rev.blocks.push_back({result.id, result.summary, reply.at("revised").get<std::string>(), all_anchors(result)});

  std::vector<std::string> tables;
  for (const auto& a : rev.blocks.front().anchors) {
    const auto* b = doc.find(a.block_id);
    if (b && b->kind == BlockKind::Table && std::find(tables.begin(), tables.end(), a.block_id) == tables.end())
      tables.push_back(a.block_id);
  }
  for (const auto& tid : tables) {
    const auto* table = doc.find(tid);
    const auto cells_reply = ask(ctx, "cf.table",
                                 {{"table_id", tid},
                                  {"table", table->content},
                                  {"revised", rev.blocks.front().revised},
                                  {"values", describe_values(rev.values)}},
                                 "cf.table");
    for (const auto& c : cells_reply.at("cells")) {
      CellDirective d{c.at("table_id").get<std::string>(), c.at("row").get<std::size_t>(),
                      c.at("column").get<std::size_t>(), c.at("old").get<std::string>(), c.at("new").get<std::string>()};
      const auto* target = doc.find(d.table_id);
      if (!target || target->kind != BlockKind::Table)
        throw Error(ErrorCode::TableCellNotFound, "directive names missing table " + d.table_id);
      const auto cells = table_cells(target->content);
      const auto* cell = cell_at(cells, d.row, d.column);
      if (!cell)
        throw Error(ErrorCode::TableCellNotFound, "table " + d.table_id + " has no cell (" + std::to_string(d.row) +
                                                      ", " + std::to_string(d.column) + ")");
      const auto text = std::string_view(target->content).substr(cell->start, cell->end - cell->start);
      if (d.old_value.empty() || text.find(d.old_value) == std::string_view::npos)
        throw Error(ErrorCode::TableCellNotFound, "cell (" + std::to_string(d.row) + ", " + std::to_string(d.column) +
                                                      ") of " + d.table_id + " does not hold '" + d.old_value + "'");
      rev.cells.push_back(std::move(d));
    }
  }
  return rev;
}

std::vector<std::string> edit_envelope(const Revision& revision) {
  std::set<std::string> ids;
  for (const auto& b : revision.blocks)
    for (const auto& a : b.anchors) ids.insert(a.block_id);
  for (const auto& c : revision.cells) ids.insert(c.table_id);
  return {ids.begin(), ids.end()};
}

std::vector<TextEdit> project_edits(const PaperDocument& doc, const Revision& revision, CfContext& ctx) {
  std::vector<TextEdit> edits;
  const std::string tag(to_string(revision.op));
  auto add = [&](TextEdit e) {
    if (e.replacement == e.anchor.quote) return;
    for (const auto& existing : edits)
      if (overlaps(existing.anchor, e.anchor)) return;
    edits.push_back(std::move(e));
  };

  for (const auto& c : revision.cells) {
    const auto* table = doc.find(c.table_id);
    if (!table) throw Error(ErrorCode::TableCellNotFound, "missing table " + c.table_id);
    const auto cells = table_cells(table->content);
    const auto* cell = cell_at(cells, c.row, c.column);
    if (!cell) throw Error(ErrorCode::TableCellNotFound, "missing cell in " + c.table_id);
    const std::string cell_text = table->content.substr(cell->start, cell->end - cell->start);
    std::size_t n = 0;
    std::string replaced = replace_value(cell_text, c.old_value, c.new_value, &n);
    if (n == 0) replaced = text::replace_all(cell_text, c.old_value, c.new_value);
    add({SpanAnchor{c.table_id, cell->start, cell->end, cell_text}, replaced, tag});
  }

  for (const auto& block : revision.blocks) {
    for (const auto& raw : block.anchors) {
      const auto anchor = bind_anchor(doc, raw);
      const auto* source = doc.find(anchor.block_id);
      if (revision.op == CfOperator::ResultEdit && source->kind == BlockKind::Table && !revision.cells.empty())
        continue;  // tables change through cell directives
      if (revision.op == CfOperator::ResultEdit && !revision.values.empty()) {
        std::size_t n = 0;
        auto replaced = apply_values(anchor.quote, revision.values, &n);
        if (n > 0) {
          add({anchor, std::move(replaced), tag});
          continue;
        }
        if (source->kind == BlockKind::Table) continue;
      }
      const auto reply = ask(ctx, "cf.project",
                             {{"original", block.original},
                              {"revised", block.revised},
                              {"values", describe_values(revision.values)},
                              {"block_id", anchor.block_id},
                              {"paragraph", source->content},
                              {"quote", anchor.quote}},
                             "cf.project", true);
      add({anchor, reply.at("replacement").get<std::string>(), tag});
    }
  }
  return edits;
}

bool minimality_holds(const Counterfactual& cf, const PaperDocument& before, const PaperDocument& after) {
  for (const auto& id : changed_block_ids(before, after))
    if (std::find(cf.allowed_block_ids.begin(), cf.allowed_block_ids.end(), id) == cf.allowed_block_ids.end())
      return false;
  return true;
}

JudgeVerdict validate(const Counterfactual& cf, const PaperDocument& before, const PaperDocument& after,
                      CfContext& ctx) {
  if (cf.condition != Condition::Critical)
    throw Error(ErrorCode::PreconditionViolated, "validate applies to critical counterfactuals only");
  std::string edits;
  for (const auto& e : cf.edits)
    edits += "[" + e.anchor.block_id + "] \"" + e.anchor.quote + "\" -> \"" + e.replacement + "\"\n";
  auto task = ctx.gateway.make_task("cf.judge", {{"operator", std::string(to_string(cf.op))},
                                                 {"original", cf.original_block_text.value_or("")},
                                                 {"revised", cf.revised_block_text.value_or("")},
                                                 {"edits", edits.empty() ? "(none)" : edits}});
  auto verdict = ctx.gateway.judge("", task, ctx.judge_profile);
  if (!minimality_holds(cf, before, after)) {
    verdict.minimal = false;
    std::string stray;
    for (const auto& id : changed_block_ids(before, after))
      if (std::find(cf.allowed_block_ids.begin(), cf.allowed_block_ids.end(), id) == cf.allowed_block_ids.end())
        stray += (stray.empty() ? "" : ", ") + id;
    verdict.rationale += (verdict.rationale.empty() ? "" : "\n") +
                         std::string("machine minimality check failed: blocks changed outside the edit envelope: ") + stray;
  }
  return verdict;
}

// ---------------------------------------------------------------------------

namespace {

// Candidate building block for `op` under finding `fid`, or nullptr when the
// operator does not apply there.
const BuildingBlock* candidate_for(const ResearchLogicGraph& g, CfOperator op, const std::string& fid) {
  const auto* finding = g.find(fid);
  if (!finding) return nullptr;
  if (op == CfOperator::FindingEdit) return finding;
  const auto conclusions = g.children_of(fid);
  if (op == CfOperator::ConclusionEdit) {
    for (const auto& cid : conclusions)
      if (!g.children_of(cid).empty()) return g.find(cid);
    return nullptr;
  }
  for (const auto& cid : conclusions)
    for (const auto& rid : g.children_of(cid))
      if (const auto* r = g.find(rid); r && r->kind == BlockRole::Result && !r->anchors.empty()) return r;
  return nullptr;
}

}  // namespace

CriticalSet generate_critical_set(const PaperDocument& doc, const ResearchLogicGraph& graph, std::uint64_t seed,
                                  CfContext& ctx) {
  CriticalSet out;
  std::vector<std::string> candidates;
  for (const auto& fid : graph.finding_rank)
    if (std::find(graph.unsupported_findings.begin(), graph.unsupported_findings.end(), fid) ==
        graph.unsupported_findings.end())
      candidates.push_back(fid);

  for (const auto op : kCriticalOperators) {
    int attempts = 0;
    bool accepted = false;
    std::string reason = "no ranked finding the operator applies to";
    for (const auto& fid : candidates) {
      if (attempts >= ctx.max_attempts) break;
      const auto* target = candidate_for(graph, op, fid);
      if (!target) continue;
      try {
        ClaimType type = ClaimType::None;
        if (op == CfOperator::FindingEdit) {
          type = classify_claim(*target, ctx);
          if (type == ClaimType::None) {
            reason = "finding " + fid + " has claim type none";
            continue;
          }
        }
        ++attempts;
        Revision rev = op == CfOperator::FindingEdit      ? compromise_finding(graph, *target, type, ctx)
                       : op == CfOperator::ConclusionEdit ? compromise_conclusion(graph, *target, ctx)
                                                          : compromise_result(doc, graph, *target, ctx);
        GeneratedCf gen;
        auto& cf = gen.cf;
        cf.cf_id = make_cf_id(doc.paper_id, op);
        cf.paper_id = doc.paper_id;
        cf.condition = Condition::Critical;
        cf.op = op;
        cf.target_block_id = rev.target_id;
        cf.original_block_text = rev.blocks.front().original;
        cf.revised_block_text = rev.blocks.front().revised;
        cf.seed = derive_seed(seed, cf.cf_id);
        cf.attempts = attempts;
        cf.allowed_block_ids = edit_envelope(rev);
        cf.edits = project_edits(doc, rev, ctx);
        if (cf.edits.empty()) {
          reason = "revision of " + rev.target_id + " produced no edit";
          continue;
        }
        gen.document = apply_edits(doc, cf.edits);
        cf.stats = edit_stats(doc, gen.document, std::span<const TextEdit>(cf.edits));
        cf.verdict = validate(cf, doc, gen.document, ctx);
        if (cf.verdict->pass()) {
          out.counterfactuals.push_back(std::move(gen));
          accepted = true;
          break;
        }
        reason = "rejected on " + fid + ": " + cf.verdict->rationale;
      } catch (const Error& e) {
        reason = "failed on " + fid + ": " + std::string(e.what());
      }
    }
    if (!accepted) out.skipped.push_back({op, reason});
  }
  return out;
}

}  // namespace revlogic

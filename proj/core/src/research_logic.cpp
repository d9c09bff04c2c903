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


#include "revlogic/research_logic.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "revlogic/error.hpp"

namespace revlogic {

using nlohmann::json;

std::string_view to_string(BlockRole role) {
  switch (role) {
    case BlockRole::Method: return "method";
    case BlockRole::Result: return "result";
    case BlockRole::Conclusion: return "conclusion";
    case BlockRole::Finding: return "finding";
  }
  return "finding";
}

BlockRole block_role_from_string(std::string_view s) {
  if (s == "method") return BlockRole::Method;
  if (s == "result") return BlockRole::Result;
  if (s == "conclusion") return BlockRole::Conclusion;
  if (s == "finding") return BlockRole::Finding;
  throw Error(ErrorCode::SchemaViolation, "unknown building block kind '" + std::string(s) + "'");
}

int level(BlockRole role) { return static_cast<int>(role); }

std::optional<BlockRole> role_of_id(std::string_view id) {
  if (id.size() < 3 || id[1] != '-') return std::nullopt;
  switch (id[0]) {
    case 'f': return BlockRole::Finding;
    case 'c': return BlockRole::Conclusion;
    case 'r': return BlockRole::Result;
    case 'm': return BlockRole::Method;
    default: return std::nullopt;
  }
}

namespace {

// Orders ids by role (findings first) and then numerically, so "r-10" follows "r-9".
bool id_less(const std::string& a, const std::string& b) {
  const auto ra = role_of_id(a), rb = role_of_id(b);
  const int la = ra ? level(*ra) : -1, lb = rb ? level(*rb) : -1;
  if (la != lb) return la > lb;
  const auto na = a.size() > 2 ? std::strtoll(a.c_str() + 2, nullptr, 10) : 0;
  const auto nb = b.size() > 2 ? std::strtoll(b.c_str() + 2, nullptr, 10) : 0;
  if (na != nb) return na < nb;
  return a < b;
}

}  // namespace

const BuildingBlock* ResearchLogicGraph::find(std::string_view id) const {
  for (const auto& b : blocks)
    if (b.id == id) return &b;
  return nullptr;
}

std::vector<const BuildingBlock*> ResearchLogicGraph::of_kind(BlockRole kind) const {
  std::vector<const BuildingBlock*> out;
  for (const auto& b : blocks)
    if (b.kind == kind) out.push_back(&b);
  return out;
}

std::vector<std::string> ResearchLogicGraph::children_of(std::string_view parent_id) const {
  for (const auto& e : edges)
    if (e.parent_id == parent_id) return e.child_ids;
  return {};
}

std::vector<std::string> ResearchLogicGraph::parents_of(std::string_view child_id) const {
  std::vector<std::string> out;
  for (const auto& e : edges)
    if (std::find(e.child_ids.begin(), e.child_ids.end(), child_id) != e.child_ids.end())
      out.push_back(e.parent_id);
  return out;
}

void to_json(json& j, const BuildingBlock& b) {
  j = json{{"id", b.id},
           {"kind", to_string(b.kind)},
           {"summary", b.summary},
           {"anchors", b.anchors},
           {"coreference_anchors", b.coreference_anchors}};
}

void from_json(const json& j, BuildingBlock& b) {
  b.id = j.at("id").get<std::string>();
  b.kind = block_role_from_string(j.at("kind").get<std::string>());
  b.summary = j.at("summary").get<std::string>();
  b.anchors = j.at("anchors").get<std::vector<SpanAnchor>>();
  b.coreference_anchors = j.value("coreference_anchors", std::vector<SpanAnchor>{});
}

void to_json(json& j, const SupportEdge& e) { j = json{{"child_ids", e.child_ids}, {"parent_id", e.parent_id}}; }

void from_json(const json& j, SupportEdge& e) {
  e.child_ids = j.at("child_ids").get<std::vector<std::string>>();
  e.parent_id = j.at("parent_id").get<std::string>();
}

void to_json(json& j, const ResearchLogicGraph& g) {
  j = json{{"paper_id", g.paper_id},
           {"goal", g.goal_summary},
           {"goal_anchors", g.goal_anchors},
           {"blocks", g.blocks},
           {"edges", g.edges},
           {"finding_rank", g.finding_rank},
           {"unsupported_findings", g.unsupported_findings}};
}

void from_json(const json& j, ResearchLogicGraph& g) {
  g.paper_id = j.value("paper_id", "");
  g.goal_summary = j.at("goal").get<std::string>();
  g.goal_anchors = j.value("goal_anchors", std::vector<SpanAnchor>{});
  g.blocks = j.at("blocks").get<std::vector<BuildingBlock>>();
  g.edges = j.at("edges").get<std::vector<SupportEdge>>();
  g.finding_rank = j.at("finding_rank").get<std::vector<std::string>>();
  g.unsupported_findings = j.value("unsupported_findings", std::vector<std::string>{});
}

// ---------------------------------------------------------------------------

namespace {

json ask(ExtractionContext& ctx, std::string_view name, TemplateParams params, std::string schema) {
  auto task = ctx.gateway.make_task(name, std::move(params), std::move(schema));
  return ctx.gateway.complete_structured(task, ctx.profile, ctx.refine);
}

TemplateParams paper_params(const PaperDocument& doc) {
  return {{"title", doc.title}, {"paper", render_with_ids(doc)}};
}

std::vector<SpanAnchor> bind_all(const PaperDocument& doc, const json& anchors) {
  std::vector<SpanAnchor> out;
  for (const auto& a : anchors) {
    SpanAnchor raw;
    raw.block_id = a.at("block_id").get<std::string>();
    raw.quote = a.at("quote").get<std::string>();
    raw.start = raw.end = 0;
    out.push_back(bind_anchor(doc, raw));
  }
  return out;
}

BuildingBlock make_block(const PaperDocument& doc, std::string id, BlockRole kind, const json& item) {
  BuildingBlock b;
  b.id = std::move(id);
  b.kind = kind;
  b.summary = item.at("summary").get<std::string>();
  b.anchors = bind_all(doc, item.at("anchors"));
  if (b.summary.empty())
    throw Error(ErrorCode::SchemaViolation, std::string(to_string(kind)) + " " + b.id + " has an empty summary");
  if (b.anchors.empty())
    throw Error(ErrorCode::SchemaViolation, std::string(to_string(kind)) + " " + b.id + " has no anchor");
  return b;
}

std::string describe(const std::vector<BuildingBlock>& blocks) {
  std::string out;
  for (const auto& b : blocks) out += "[" + b.id + "] " + b.summary + "\n";
  return out;
}

std::pair<std::size_t, std::size_t> doc_position(const PaperDocument& doc, const BuildingBlock& b) {
  std::pair<std::size_t, std::size_t> best{SIZE_MAX, SIZE_MAX};
  for (const auto& a : b.anchors) {
    const auto idx = doc.index_of(a.block_id).value_or(SIZE_MAX);
    best = std::min(best, std::pair{idx, a.start});
  }
  return best;
}

// Groups (child, parent) links into one edge per parent. Every id must be known.
std::vector<SupportEdge> group_links(const json& links, const std::set<std::string>& known,
                                     std::string_view child_key = "child") {
  std::map<std::string, std::set<std::string>, std::function<bool(const std::string&, const std::string&)>>
      by_parent(id_less);
  for (const auto& link : links) {
    const auto child = link.at(std::string(child_key)).get<std::string>();
    if (!known.count(child)) throw Error(ErrorCode::DanglingLink, "link names unknown block '" + child + "'");
    for (const auto& p : link.at("parents")) {
      const auto parent = p.get<std::string>();
      if (!known.count(parent)) throw Error(ErrorCode::DanglingLink, "link names unknown block '" + parent + "'");
      by_parent[parent].insert(child);
    }
  }
  std::vector<SupportEdge> edges;
  for (auto& [parent, children] : by_parent) {
    SupportEdge e;
    e.parent_id = parent;
    e.child_ids.assign(children.begin(), children.end());
    std::sort(e.child_ids.begin(), e.child_ids.end(), id_less);
    edges.push_back(std::move(e));
  }
  return edges;
}

template <typename F>
auto step(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(name);
  }
}

bool spans_overlap(const SpanAnchor& a, const SpanAnchor& b) {
  return a.block_id == b.block_id && a.start < b.end && b.start < a.end;
}

}  // namespace

GoalSummary extract_goal(const PaperDocument& doc, ExtractionContext& ctx) {
  const auto reply = ask(ctx, "logic.goal", paper_params(doc), "logic.summary");
  GoalSummary g;
  g.summary = reply.at("summary").get<std::string>();
  g.anchors = bind_all(doc, reply.at("anchors"));
  if (g.summary.empty()) throw Error(ErrorCode::SchemaViolation, "empty goal summary");
  if (g.anchors.empty()) throw Error(ErrorCode::SchemaViolation, "goal summary has no anchor");
  return g;
}

std::vector<BuildingBlock> extract_findings(const PaperDocument& doc, const GoalSummary& goal,
                                            ExtractionContext& ctx) {
  const auto reply = ask(ctx, "logic.contributions", paper_params(doc), "logic.contributions");
  std::vector<BuildingBlock> findings;
  for (const auto& c : reply.at("contributions")) {
    if (!c.at("empirical").get<bool>()) continue;
    findings.push_back(make_block(doc, "f-" + std::to_string(findings.size() + 1), BlockRole::Finding, c));
  }
  if (findings.empty())
    throw Error(ErrorCode::NoEmpiricalFindings, "paper " + doc.paper_id + " has no empirical findings");

  std::map<std::string, double> relevance;
  if (findings.size() > 1) {
    const auto ranked = ask(ctx, "logic.rank", {{"goal", goal.summary}, {"findings", describe(findings)}},
                            "logic.rank");
    for (const auto& s : ranked.at("scores")) relevance[s.at("id").get<std::string>()] = s.at("relevance").get<double>();
  }
  std::vector<std::pair<std::size_t, std::size_t>> pos;
  for (const auto& f : findings) pos.push_back(doc_position(doc, f));
  std::vector<std::size_t> order(findings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = relevance.count(findings[a].id) ? relevance[findings[a].id] : 0.0;
    const double rb = relevance.count(findings[b].id) ? relevance[findings[b].id] : 0.0;
    if (ra != rb) return ra > rb;
    return pos[a] < pos[b];
  });
  std::vector<BuildingBlock> out;
  for (auto i : order) out.push_back(findings[i]);
  return out;
}

ConclusionLayer extract_conclusions(const PaperDocument& doc, const std::vector<BuildingBlock>& findings,
                                    ExtractionContext& ctx) {
  ConclusionLayer layer;
  const auto reply = ask(ctx, "logic.conclusions", paper_params(doc), "logic.items");
  for (const auto& item : reply.at("items"))
    layer.conclusions.push_back(
        make_block(doc, "c-" + std::to_string(layer.conclusions.size() + 1), BlockRole::Conclusion, item));

  if (!layer.conclusions.empty()) {
    std::vector<BuildingBlock> by_id = findings;
    std::sort(by_id.begin(), by_id.end(), [](const auto& a, const auto& b) { return id_less(a.id, b.id); });
    const auto links = ask(ctx, "logic.link_conclusions",
                           {{"findings", describe(by_id)}, {"conclusions", describe(layer.conclusions)}},
                           "logic.links");
    std::set<std::string> known;
    for (const auto& f : findings) known.insert(f.id);
    for (const auto& c : layer.conclusions) known.insert(c.id);
    layer.edges = group_links(links.at("links"), known);
  }
  for (const auto& f : findings) {
    bool supported = false;
    for (const auto& e : layer.edges) supported = supported || e.parent_id == f.id;
    if (!supported) layer.unsupported_findings.push_back(f.id);
  }
  std::sort(layer.unsupported_findings.begin(), layer.unsupported_findings.end(), id_less);
  return layer;
}

ResultLayer extract_results_and_method(const PaperDocument& doc, const std::vector<BuildingBlock>& conclusions,
                                       ExtractionContext& ctx) {
  ResultLayer layer;
  const auto reply = ask(ctx, "logic.results", paper_params(doc), "logic.items");
  for (const auto& item : reply.at("items"))
    layer.results.push_back(make_block(doc, "r-" + std::to_string(layer.results.size() + 1), BlockRole::Result, item));

  std::set<std::string> known;
  for (const auto& c : conclusions) known.insert(c.id);
  for (const auto& r : layer.results) known.insert(r.id);

  if (!layer.results.empty() && !conclusions.empty()) {
    const auto links = ask(ctx, "logic.link_results",
                           {{"conclusions", describe(conclusions)}, {"results", describe(layer.results)}},
                           "logic.links");
    layer.edges = group_links(links.at("links"), known);
  }

  const auto method = ask(ctx, "logic.method", paper_params(doc), "logic.summary");
  layer.method = make_block(doc, "m-1", BlockRole::Method, method);
  known.insert("m-1");

  if (!layer.results.empty()) {
    const auto produced = ask(ctx, "logic.link_method",
                              {{"method", layer.method.summary}, {"results", describe(layer.results)}},
                              "logic.link_method");
    json links = json::array();
    for (const auto& r : produced.at("results"))
      links.push_back(json{{"child", "m-1"}, {"parents", json::array({r})}});
    for (auto& e : group_links(links, known)) layer.edges.push_back(std::move(e));
  }
  return layer;
}

void extract_coreferences(const PaperDocument& doc, ResearchLogicGraph& graph, ExtractionContext& ctx) {
  std::string listing;
  for (const auto& b : graph.blocks) {
    if (b.kind == BlockRole::Method) continue;
    listing += "[" + b.id + "] " + b.summary + "\n";
    for (const auto& a : b.anchors) listing += "  - [" + a.block_id + "] \"" + a.quote + "\"\n";
  }
  const auto reply = ask(ctx, "logic.coreferences", {{"blocks", listing}, {"paper", render_with_ids(doc)}},
                         "logic.coreferences");
  for (const auto& entry : reply.at("coreferences")) {
    const auto id = entry.at("block").get<std::string>();
    auto it = std::find_if(graph.blocks.begin(), graph.blocks.end(), [&](const auto& b) { return b.id == id; });
    if (it == graph.blocks.end()) continue;
    for (const auto& a : entry.at("anchors")) {
      SpanAnchor raw{a.at("block_id").get<std::string>(), 0, 0, a.at("quote").get<std::string>()};
      SpanAnchor bound;
      try {
        bound = bind_anchor(doc, raw);
      } catch (const Error&) {
        continue;
      }
      bool duplicate = false;
      for (const auto& existing : it->anchors) duplicate = duplicate || spans_overlap(existing, bound);
      for (const auto& existing : it->coreference_anchors) duplicate = duplicate || spans_overlap(existing, bound);
      if (!duplicate) it->coreference_anchors.push_back(bound);
    }
  }
}

ResearchLogicGraph extract_research_logic(const PaperDocument& doc, ExtractionContext& ctx) {
  ResearchLogicGraph g;
  g.paper_id = doc.paper_id;

  const auto goal = step("extract_goal", [&] { return extract_goal(doc, ctx); });
  g.goal_summary = goal.summary;
  g.goal_anchors = goal.anchors;

  const auto findings = step("extract_findings", [&] { return extract_findings(doc, goal, ctx); });
  auto concl = step("extract_conclusions", [&] { return extract_conclusions(doc, findings, ctx); });
  auto results = step("extract_results_and_method",
                      [&] { return extract_results_and_method(doc, concl.conclusions, ctx); });

  for (const auto& f : findings) g.finding_rank.push_back(f.id);
  std::vector<BuildingBlock> all = findings;
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return id_less(a.id, b.id); });
  for (auto& c : concl.conclusions) all.push_back(std::move(c));
  for (auto& r : results.results) all.push_back(std::move(r));
  all.push_back(std::move(results.method));
  g.blocks = std::move(all);

  g.edges = std::move(concl.edges);
  for (auto& e : results.edges) g.edges.push_back(std::move(e));
  std::stable_sort(g.edges.begin(), g.edges.end(),
                   [](const auto& a, const auto& b) { return id_less(a.parent_id, b.parent_id); });
  g.unsupported_findings = std::move(concl.unsupported_findings);

  step("extract_coreferences", [&] { extract_coreferences(doc, g, ctx); });
  step("validate", [&] { validate_graph(g, &doc); });
  return g;
}

void validate_graph(const ResearchLogicGraph& g, const PaperDocument* doc) {
  std::map<std::string, BlockRole> kinds;
  for (const auto& b : g.blocks) {
    if (!kinds.emplace(b.id, b.kind).second)
      throw Error(ErrorCode::PreconditionViolated, "duplicate building block id " + b.id);
    if (b.summary.empty() || b.anchors.empty())
      throw Error(ErrorCode::PreconditionViolated, "building block " + b.id + " lacks summary or anchor");
  }
  for (const auto& e : g.edges) {
    if (!kinds.count(e.parent_id)) throw Error(ErrorCode::DanglingLink, "edge parent " + e.parent_id + " unknown");
    for (const auto& c : e.child_ids)
      if (!kinds.count(c)) throw Error(ErrorCode::DanglingLink, "edge child " + c + " unknown");
  }

  // Cycle detection over child -> parent arcs.
  std::map<std::string, std::vector<std::string>> up;
  for (const auto& e : g.edges)
    for (const auto& c : e.child_ids) up[c].push_back(e.parent_id);
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    state[id] = 1;
    for (const auto& p : up[id]) {
      if (state[p] == 1) throw Error(ErrorCode::CycleDetected, "support cycle through " + id + " and " + p);
      if (state[p] == 0) visit(p);
    }
    state[id] = 2;
  };
  for (const auto& [id, kind] : kinds)
    if (state[id] == 0) visit(id);

  for (const auto& e : g.edges) {
    const int lp = level(kinds.at(e.parent_id));
    for (const auto& c : e.child_ids)
      if (level(kinds.at(c)) + 1 != lp)
        throw Error(ErrorCode::LayeringViolation,
                    std::string(to_string(kinds.at(c))) + " " + c + " cannot support " +
                        std::string(to_string(kinds.at(e.parent_id))) + " " + e.parent_id);
  }

  std::vector<std::string> finding_ids;
  for (const auto& b : g.blocks)
    if (b.kind == BlockRole::Finding) finding_ids.push_back(b.id);
  auto rank = g.finding_rank;
  std::sort(rank.begin(), rank.end());
  std::sort(finding_ids.begin(), finding_ids.end());
  if (rank != finding_ids) throw Error(ErrorCode::PreconditionViolated, "finding_rank is not a permutation of the findings");

  if (doc) {
    for (const auto& a : g.goal_anchors) resolve_anchor(*doc, a);
    for (const auto& b : g.blocks) {
      for (const auto& a : b.anchors) resolve_anchor(*doc, a);
      for (const auto& a : b.coreference_anchors) resolve_anchor(*doc, a);
    }
  }
}

}  // namespace revlogic

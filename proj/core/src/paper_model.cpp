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

#include "revlogic/paper_model.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <utility>

#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/levenshtein.hpp"
#include "revlogic/text.hpp"

namespace revlogic {
namespace {

struct Line {
  std::size_t begin = 0;  // offset of first character
  std::size_t end = 0;    // offset of '\n' (or text end)
  std::string_view view;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back({pos, nl, text.substr(pos, nl - pos)});
    pos = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

std::size_t indent_of(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && line[n] == ' ') ++n;
  return n;
}

// ATX heading level, or 0.
int heading_level(std::string_view line) {
  const std::size_t ind = indent_of(line);
  if (ind > 3) return 0;
  std::size_t i = ind;
  int level = 0;
  while (i < line.size() && line[i] == '#') {
    ++level;
    ++i;
  }
  if (level == 0 || level > 6) return 0;
  if (i < line.size() && line[i] != ' ' && line[i] != '\t') return 0;
  return level;
}

std::string heading_text(std::string_view line) {
  std::string_view s = text::trim(line);
  while (!s.empty() && s.front() == '#') s.remove_prefix(1);
  s = text::trim(s);
  // Optional closing sequence of '#'.
  std::size_t e = s.size();
  while (e > 0 && s[e - 1] == '#') --e;
  if (e < s.size() && (e == 0 || s[e - 1] == ' ')) s = text::trim(s.substr(0, e));
  return std::string(s);
}

bool is_fence(std::string_view line, std::string_view* marker) {
  const std::size_t ind = indent_of(line);
  if (ind > 3) return false;
  std::string_view s = line.substr(ind);
  for (std::string_view m : {std::string_view("```"), std::string_view("~~~")}) {
    if (s.substr(0, 3) == m) {
      if (marker) *marker = m;
      return true;
    }
  }
  return false;
}

bool is_table_line(std::string_view line) {
  const std::size_t ind = indent_of(line);
  return ind <= 3 && ind < line.size() && line[ind] == '|';
}

// Splits a table row into cell spans (relative to the row), honoring "\|".
std::vector<std::pair<std::size_t, std::size_t>> row_cells(std::string_view row) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<std::size_t> pipes;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == '\\') {
      ++i;
      continue;
    }
    if (row[i] == '|') pipes.push_back(i);
  }
  std::size_t b = 0;
  std::size_t e = row.size();
  while (b < e && text::is_space(row[b])) ++b;
  while (e > b && text::is_space(row[e - 1])) --e;
  std::vector<std::size_t> bounds;
  const bool leading = !pipes.empty() && pipes.front() == b;
  const bool trailing = !pipes.empty() && pipes.back() + 1 == e && pipes.back() != b;
  if (!leading) bounds.push_back(b == 0 ? std::size_t(-1) : b - 1);
  for (std::size_t p : pipes) bounds.push_back(p);
  if (!trailing) bounds.push_back(e);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    std::size_t cb = bounds[k] + 1;  // wraps to 0 for the synthetic leading bound
    std::size_t ce = bounds[k + 1];
    while (cb < ce && text::is_space(row[cb])) ++cb;
    while (ce > cb && text::is_space(row[ce - 1])) --ce;
    cells.emplace_back(cb, ce);
  }
  return cells;
}

bool is_delimiter_row(std::string_view row) {
  const auto cells = row_cells(row);
  if (cells.empty()) return false;
  static const std::regex kDelim(R"(^:?-+:?$)");
  for (auto [b, e] : cells) {
    if (!std::regex_match(std::string(row.substr(b, e - b)), kDelim)) return false;
  }
  return true;
}

void validate_table(std::string_view content, std::string_view id) {
  const auto lines = split_lines(content);
  if (lines.size() < 2) {
    throw Error(ErrorCode::MalformedTable,
                "table " + std::string(id) + " has no delimiter row");
  }
  if (!is_delimiter_row(lines[1].view)) {
    throw Error(ErrorCode::MalformedTable,
                "table " + std::string(id) + ": second row is not a delimiter row");
  }
  if (row_cells(lines[0].view).size() != row_cells(lines[1].view).size()) {
    throw Error(ErrorCode::MalformedTable,
                "table " + std::string(id) + ": header and delimiter column counts differ");
  }
}

bool is_caption(std::string_view paragraph) {
  static const std::regex kCaption(
      R"(^\s{0,3}(\*\*|\*|_)?(Figure|Fig\.|Table)\s+[A-Z]?\d+[a-z]?(\*\*|\*|_)?\s*[:.|])");
  const std::string head(paragraph.substr(0, std::min<std::size_t>(paragraph.size(), 64)));
  return std::regex_search(head, kCaption);
}

bool is_appendix_heading(std::string_view title) {
  return text::istarts_with(title, "appendix") || text::istarts_with(title, "appendices") ||
         text::istarts_with(title, "supplementary material");
}

std::string strip_emphasis(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != '*' && c != '_') out.push_back(c);
  }
  std::string_view v = text::trim(out);
  while (!v.empty() && (v.back() == ':' || v.back() == '.')) v.remove_suffix(1);
  return std::string(text::trim(v));
}

std::string make_id(char prefix, int number, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c-%0*d", prefix, width, number);
  return buf;
}

// Abstract written inline as "**Abstract**: text" or "Abstract. text".
std::optional<std::string> inline_abstract(std::string_view paragraph) {
  static const std::regex kInline(R"(^\s*(\*\*|__)?Abstract(\*\*|__)?\s*[:.—-]?\s*(\*\*|__)?\s*)",
                                  std::regex::icase);
  std::string p(paragraph);
  std::smatch m;
  if (!std::regex_search(p, m, kInline)) return std::nullopt;
  std::string rest(text::trim(std::string_view(p).substr(m.length(0))));
  if (rest.empty()) return std::nullopt;
  return rest;
}

}  // namespace

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Heading: return "heading";
    case BlockKind::Text: return "text";
    case BlockKind::Table: return "table";
    case BlockKind::FigureCaption: return "figure_caption";
  }
  return "text";
}

BlockKind block_kind_from_string(std::string_view s) {
  if (s == "heading") return BlockKind::Heading;
  if (s == "text") return BlockKind::Text;
  if (s == "table") return BlockKind::Table;
  if (s == "figure_caption") return BlockKind::FigureCaption;
  throw Error(ErrorCode::ConfigError, "unknown block kind: " + std::string(s));
}

const Block* PaperDocument::find(std::string_view block_id) const {
  for (const auto& b : blocks) {
    if (b.id == block_id) return &b;
  }
  return nullptr;
}

std::optional<std::size_t> PaperDocument::index_of(std::string_view block_id) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].id == block_id) return i;
  }
  return std::nullopt;
}

PaperDocument parse_markdown(std::string_view text, std::string paper_id, std::string venue) {
  PaperDocument doc;
  doc.paper_id = std::move(paper_id);
  doc.venue = std::move(venue);
  doc.source_hash = sha256_hex(text);

  const auto lines = split_lines(text);
  struct RawBlock {
    BlockKind kind;
    std::size_t begin;
    std::size_t end;
    int level;
  };
  std::vector<RawBlock> raw;

  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& line = lines[i];
    if (is_blank(line.view)) {
      ++i;
      continue;
    }
    std::string_view fence;
    if (is_fence(line.view, &fence)) {
      std::size_t j = i + 1;
      while (j < lines.size()) {
        std::string_view closing;
        if (is_fence(lines[j].view, &closing) && closing == fence) break;
        ++j;
      }
      const std::size_t last = std::min(j, lines.size() - 1);
      raw.push_back({BlockKind::Text, line.begin, lines[last].end, 0});
      i = last + 1;
      continue;
    }
    if (int level = heading_level(line.view); level > 0) {
      raw.push_back({BlockKind::Heading, line.begin, line.end, level});
      ++i;
      continue;
    }
    if (is_table_line(line.view)) {
      std::size_t j = i;
      while (j + 1 < lines.size() && is_table_line(lines[j + 1].view)) ++j;
      raw.push_back({BlockKind::Table, line.begin, lines[j].end, 0});
      i = j + 1;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < lines.size()) {
      std::string_view next = lines[j + 1].view;
      if (is_blank(next) || heading_level(next) > 0 || is_fence(next, nullptr) ||
          is_table_line(next)) {
        break;
      }
      ++j;
    }
    const std::string_view para = text.substr(line.begin, lines[j].end - line.begin);
    raw.push_back({is_caption(para) ? BlockKind::FigureCaption : BlockKind::Text, line.begin,
                   lines[j].end, 0});
    i = j + 1;
  }

  int n_heading = 0, n_text = 0, n_table = 0, n_caption = 0;
  std::vector<std::pair<int, std::string>> stack;
  bool in_appendix = false;
  bool title_found = false;
  bool in_abstract = false;
  std::vector<std::string> abstract_parts;
  int sections = 0;

  doc.leading = std::string(text.substr(0, raw.empty() ? text.size() : raw.front().begin));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const RawBlock& rb = raw[k];
    Block b;
    b.kind = rb.kind;
    b.content = std::string(text.substr(rb.begin, rb.end - rb.begin));
    const std::size_t next = k + 1 < raw.size() ? raw[k + 1].begin : text.size();
    b.trailing = std::string(text.substr(rb.end, next - rb.end));

    switch (rb.kind) {
      case BlockKind::Heading: {
        b.id = make_id('h', n_heading++, 3);
        b.heading_level = rb.level;
        const std::string title = heading_text(b.content);
        while (!stack.empty() && stack.back().first >= rb.level) stack.pop_back();
        stack.emplace_back(rb.level, title);
        if (!in_appendix && is_appendix_heading(title)) in_appendix = true;
        const bool is_abstract = text::iequals(strip_emphasis(title), "abstract");
        in_abstract = is_abstract;
        if (!title_found && rb.level == 1) {
          title_found = true;
          doc.title = title;
        } else if (!is_abstract && !in_appendix && rb.level <= 2) {
          ++sections;
        }
        break;
      }
      case BlockKind::Text:
        b.id = make_id('p', n_text++, 4);
        if (in_abstract) {
          abstract_parts.emplace_back(text::trim(b.content));
        } else if (abstract_parts.empty() && doc.abstract.empty()) {
          if (auto inline_abs = inline_abstract(b.content)) doc.abstract = *inline_abs;
        }
        break;
      case BlockKind::Table:
        b.id = make_id('t', n_table++, 3);
        validate_table(b.content, b.id);
        in_abstract = false;
        break;
      case BlockKind::FigureCaption:
        b.id = make_id('c', n_caption++, 3);
        in_abstract = false;
        break;
    }
    for (const auto& [lvl, name] : stack) b.section_path.push_back(name);
    b.is_appendix = in_appendix;
    doc.blocks.push_back(std::move(b));
  }

  if (!abstract_parts.empty()) {
    std::string joined;
    for (const auto& part : abstract_parts) {
      if (!joined.empty()) joined += "\n\n";
      joined += part;
    }
    doc.abstract = joined;
  }
  if (doc.title.empty() || doc.abstract.empty()) {
    throw Error(ErrorCode::MissingTitleOrAbstract,
                "paper '" + doc.paper_id + "': title or abstract could not be identified");
  }
  if (sections < 3) {
    throw Error(ErrorCode::TooFewSections, "paper '" + doc.paper_id + "' has " +
                                               std::to_string(sections) +
                                               " section headings (need at least 3)");
  }
  return doc;
}

std::string render_markdown(const PaperDocument& doc) {
  std::string out = doc.leading;
  for (const auto& b : doc.blocks) {
    out += b.content;
    out += b.trailing;
  }
  return out;
}

std::string render_with_ids(const PaperDocument& doc, bool include_appendix) {
  std::string out;
  for (const auto& b : doc.blocks) {
    if (b.is_appendix && !include_appendix) continue;
    out += '[';
    out += b.id;
    out += "] ";
    out += b.content;
    out += "\n\n";
  }
  return out;
}

ResolvedSpan resolve_anchor(const PaperDocument& doc, const SpanAnchor& anchor) {
  const Block* block = doc.find(anchor.block_id);
  if (!block) throw Error(ErrorCode::UnknownBlock, "unknown block id: " + anchor.block_id);
  const std::string& content = block->content;
  if (anchor.quote.empty()) {
    throw Error(ErrorCode::QuoteNotFound, "empty quote for block " + anchor.block_id);
  }

  if (anchor.end > anchor.start && anchor.end <= content.size() &&
      std::string_view(content).substr(anchor.start, anchor.end - anchor.start) == anchor.quote) {
    return {anchor.start, anchor.end, MatchMode::Exact};
  }
  if (auto pos = content.find(anchor.quote); pos != std::string::npos) {
    return {pos, pos + anchor.quote.size(), MatchMode::Exact};
  }

  // Whitespace-normalized fallback. norm_to_src maps each character of the
  // normalized content back to its source offset.
  const std::string needle = text::normalize_whitespace(anchor.quote);
  if (!needle.empty()) {
    std::string norm;
    std::vector<std::size_t> norm_to_src;
    bool pending = false;
    std::size_t pending_at = 0;
    for (std::size_t k = 0; k < content.size(); ++k) {
      if (text::is_space(content[k])) {
        if (!pending) pending_at = k;
        pending = !norm.empty();
        continue;
      }
      if (pending) {
        norm.push_back(' ');
        norm_to_src.push_back(pending_at);
        pending = false;
      }
      norm.push_back(content[k]);
      norm_to_src.push_back(k);
    }
    if (auto pos = norm.find(needle); pos != std::string::npos) {
      const std::size_t start = norm_to_src[pos];
      const std::size_t end = norm_to_src[pos + needle.size() - 1] + 1;
      return {start, end, MatchMode::Normalized};
    }
  }
  throw Error(ErrorCode::QuoteNotFound,
              "quote not found in block " + anchor.block_id + ": \"" + anchor.quote + "\"");
}

SpanAnchor bind_anchor(const PaperDocument& doc, const SpanAnchor& anchor) {
  const ResolvedSpan span = resolve_anchor(doc, anchor);
  SpanAnchor bound = anchor;
  bound.start = span.start;
  bound.end = span.end;
  bound.quote = doc.find(anchor.block_id)->content.substr(span.start, span.end - span.start);
  return bound;
}

PaperDocument apply_edits(const PaperDocument& doc, std::span<const TextEdit> edits) {
  struct Resolved {
    std::size_t start;
    std::size_t end;
    const TextEdit* edit;
  };
  std::map<std::string, std::vector<Resolved>> per_block;
  for (const auto& e : edits) {
    const ResolvedSpan span = resolve_anchor(doc, e.anchor);
    per_block[e.anchor.block_id].push_back({span.start, span.end, &e});
  }

  PaperDocument out = doc;
  for (auto& [block_id, spans] : per_block) {
    std::sort(spans.begin(), spans.end(), [](const Resolved& a, const Resolved& b) {
      return a.start != b.start ? a.start > b.start : a.end > b.end;
    });
    for (std::size_t k = 1; k < spans.size(); ++k) {
      const Resolved& later = spans[k - 1];
      const Resolved& earlier = spans[k];
      const bool same_point = earlier.start == later.start && earlier.end == later.end;
      if (earlier.end > later.start || same_point) {
        throw Error(ErrorCode::OverlappingEdits,
                    "overlapping edits in block " + block_id + " at offsets " +
                        std::to_string(earlier.start) + " and " + std::to_string(later.start));
      }
    }
    Block& block = out.blocks[*out.index_of(block_id)];
    for (const auto& r : spans) {
      block.content.replace(r.start, r.end - r.start, r.edit->replacement);
    }
  }
  if (!edits.empty()) out.source_hash = sha256_hex(render_markdown(out));
  return out;
}

EditStats edit_stats(const PaperDocument& original, const PaperDocument& edited,
                     std::size_t edit_operations) {
  return {edit_operations, levenshtein(render_markdown(original), render_markdown(edited))};
}

EditStats edit_stats(const PaperDocument& original, const PaperDocument& edited,
                     std::span<const TextEdit> edits) {
  return edit_stats(original, edited, edits.size());
}

std::vector<std::string> changed_block_ids(const PaperDocument& before,
                                           const PaperDocument& after) {
  std::vector<std::string> changed;
  std::set<std::string> seen;
  for (const auto& b : before.blocks) {
    seen.insert(b.id);
    const Block* other = after.find(b.id);
    if (!other || other->content != b.content || other->kind != b.kind) changed.push_back(b.id);
  }
  for (const auto& b : after.blocks) {
    if (!seen.count(b.id)) changed.push_back(b.id);
  }
  return changed;
}

bool blocks_identical(const PaperDocument& a, const PaperDocument& b) {
  return a.leading == b.leading && a.blocks == b.blocks && a.title == b.title &&
         a.abstract == b.abstract;
}

PaperDocument move_blocks_to_body_end(const PaperDocument& doc,
                                      std::span<const std::string> block_ids) {
  const std::set<std::string> moving(block_ids.begin(), block_ids.end());
  if (moving.empty() || doc.blocks.empty()) return doc;
  const std::string final_ws = doc.blocks.back().trailing;

  std::vector<Block> body, moved, appendix;
  for (const auto& b : doc.blocks) {
    if (b.is_appendix) {
      appendix.push_back(b);
    } else if (moving.count(b.id)) {
      moved.push_back(b);
    } else {
      body.push_back(b);
    }
  }
  PaperDocument out = doc;
  out.blocks.clear();
  for (auto* part : {&body, &moved, &appendix}) {
    for (auto& b : *part) out.blocks.push_back(std::move(b));
  }
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    std::string& ws = out.blocks[k].trailing;
    if (k + 1 == out.blocks.size()) {
      ws = final_ws;
    } else if (std::count(ws.begin(), ws.end(), '\n') < 2) {
      ws = "\n\n";
    }
  }
  out.source_hash = sha256_hex(render_markdown(out));
  return out;
}

PaperDocument without_appendix(const PaperDocument& doc) {
  PaperDocument out = doc;
  std::erase_if(out.blocks, [](const Block& b) { return b.is_appendix; });
  if (!out.blocks.empty() && out.blocks.size() != doc.blocks.size()) {
    out.blocks.back().trailing = "\n";
  }
  return out;
}

std::vector<TableCell> table_cells(std::string_view table_content) {
  std::vector<TableCell> cells;
  const auto lines = split_lines(table_content);
  std::size_t row = 0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (k == 1) continue;  // delimiter row
    const auto spans = row_cells(lines[k].view);
    for (std::size_t c = 0; c < spans.size(); ++c) {
      cells.push_back({row, c, lines[k].begin + spans[c].first, lines[k].begin + spans[c].second});
    }
    ++row;
  }
  return cells;
}

void to_json(nlohmann::json& j, const Block& b) {
  j = nlohmann::json{{"id", b.id},
                     {"kind", to_string(b.kind)},
                     {"section_path", b.section_path},
                     {"content", b.content},
                     {"is_appendix", b.is_appendix},
                     {"heading_level", b.heading_level},
                     {"trailing", b.trailing}};
}

void from_json(const nlohmann::json& j, Block& b) {
  b.id = j.at("id").get<std::string>();
  b.kind = block_kind_from_string(j.at("kind").get<std::string>());
  b.section_path = j.at("section_path").get<std::vector<std::string>>();
  b.content = j.at("content").get<std::string>();
  b.is_appendix = j.value("is_appendix", false);
  b.heading_level = j.value("heading_level", 0);
  b.trailing = j.value("trailing", std::string("\n\n"));
}

void to_json(nlohmann::json& j, const PaperDocument& d) {
  j = nlohmann::json{{"paper_id", d.paper_id}, {"venue", d.venue},
                     {"title", d.title},       {"abstract", d.abstract},
                     {"leading", d.leading},   {"source_hash", d.source_hash},
                     {"blocks", d.blocks}};
}

void from_json(const nlohmann::json& j, PaperDocument& d) {
  d.paper_id = j.at("paper_id").get<std::string>();
  d.venue = j.value("venue", std::string());
  d.title = j.at("title").get<std::string>();
  d.abstract = j.at("abstract").get<std::string>();
  d.leading = j.value("leading", std::string());
  d.source_hash = j.value("source_hash", std::string());
  d.blocks = j.at("blocks").get<std::vector<Block>>();
}

void to_json(nlohmann::json& j, const SpanAnchor& a) {
  j = nlohmann::json{{"block_id", a.block_id}, {"start", a.start}, {"end", a.end}, {"quote", a.quote}};
}

void from_json(const nlohmann::json& j, SpanAnchor& a) {
  a.block_id = j.at("block_id").get<std::string>();
  a.start = j.value("start", std::size_t{0});
  a.end = j.value("end", std::size_t{0});
  a.quote = j.at("quote").get<std::string>();
}

void to_json(nlohmann::json& j, const TextEdit& e) {
  j = nlohmann::json{{"anchor", e.anchor}, {"replacement", e.replacement}, {"operator", e.operator_tag}};
}

void from_json(const nlohmann::json& j, TextEdit& e) {
  e.anchor = j.at("anchor").get<SpanAnchor>();
  e.replacement = j.at("replacement").get<std::string>();
  e.operator_tag = j.value("operator", std::string());
}

void to_json(nlohmann::json& j, const EditStats& s) {
  j = nlohmann::json{{"edit_count", s.edit_count}, {"levenshtein", s.levenshtein}};
}

void from_json(const nlohmann::json& j, EditStats& s) {
  s.edit_count = j.at("edit_count").get<std::size_t>();
  s.levenshtein = j.at("levenshtein").get<std::size_t>();
}

}  // namespace revlogic

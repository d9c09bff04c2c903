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

// Span-addressable model of a Markdown research paper.
//
// A paper is split into an ordered list of blocks (headings, text paragraphs,
// pipe tables and figure/table captions). Every block carries the exact
// whitespace that followed it in the source, so rendering is byte-exact and
// edits can be expressed as character spans inside single blocks. Block ids
// are assigned once at parse time (h-000, p-0000, t-000, c-000) and are never
// renumbered by edits or relocation.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace revlogic {

enum class BlockKind { Heading, Text, Table, FigureCaption };

std::string_view to_string(BlockKind kind);
BlockKind block_kind_from_string(std::string_view s);

struct Block {
  std::string id;
  BlockKind kind = BlockKind::Text;
  std::vector<std::string> section_path;
  std::string content;
  bool is_appendix = false;
  int heading_level = 0;
  std::string trailing;  // whitespace that followed the block in the source

  bool operator==(const Block&) const = default;
};

struct PaperDocument {
  std::string paper_id;
  std::string venue;
  std::string title;
  std::string abstract;
  std::string leading;  // whitespace before the first block
  std::vector<Block> blocks;
  std::string source_hash;

  const Block* find(std::string_view block_id) const;
  std::optional<std::size_t> index_of(std::string_view block_id) const;
};

struct SpanAnchor {
  std::string block_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string quote;

  bool operator==(const SpanAnchor&) const = default;
};

struct TextEdit {
  SpanAnchor anchor;
  std::string replacement;
  std::string operator_tag;

  bool operator==(const TextEdit&) const = default;
};

struct EditStats {
  std::size_t edit_count = 0;
  std::size_t levenshtein = 0;

  bool operator==(const EditStats&) const = default;
};

enum class MatchMode { Exact, Normalized };

struct ResolvedSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  MatchMode mode = MatchMode::Exact;
};

/// Parses CommonMark-style Markdown with pipe tables.
/// Throws Error{MissingTitleOrAbstract | TooFewSections | MalformedTable}.
PaperDocument parse_markdown(std::string_view text, std::string paper_id, std::string venue);

/// Byte-exact inverse of parse_markdown.
std::string render_markdown(const PaperDocument& doc);

/// Prompt rendering: every block prefixed with its id in brackets so a model
/// can cite "[p-0003]" passages. Appendix blocks are optional.
std::string render_with_ids(const PaperDocument& doc, bool include_appendix = true);

/// Locates an anchor's quote in its block. Exact match first (the stored
/// offsets win when they still hold the quote), then whitespace-normalized.
/// Throws Error{UnknownBlock | QuoteNotFound}.
ResolvedSpan resolve_anchor(const PaperDocument& doc, const SpanAnchor& anchor);

/// Returns the anchor with start/end filled in from resolve_anchor and the
/// quote replaced by the exact source text.
SpanAnchor bind_anchor(const PaperDocument& doc, const SpanAnchor& anchor);

/// Splices all edits into a new document. Blocks not referenced by any edit
/// are byte-identical. Throws Error{OverlappingEdits | QuoteNotFound | UnknownBlock}.
PaperDocument apply_edits(const PaperDocument& doc, std::span<const TextEdit> edits);

/// edit_count = number of edit operations; levenshtein over rendered texts.
EditStats edit_stats(const PaperDocument& original, const PaperDocument& edited,
                     std::size_t edit_operations);
EditStats edit_stats(const PaperDocument& original, const PaperDocument& edited,
                     std::span<const TextEdit> edits);

/// Ids of blocks whose content differs, or which exist in only one document.
std::vector<std::string> changed_block_ids(const PaperDocument& before,
                                           const PaperDocument& after);

/// Block-wise identity: same ids, kinds, paths, contents and separators.
bool blocks_identical(const PaperDocument& a, const PaperDocument& b);

/// Moves the given blocks (keeping their relative order) behind the last
/// non-appendix block. Ids are unchanged.
PaperDocument move_blocks_to_body_end(const PaperDocument& doc,
                                      std::span<const std::string> block_ids);

/// Drops all appendix blocks.
PaperDocument without_appendix(const PaperDocument& doc);

// Pipe-table cell addressing. Row 0 is the header row; the delimiter row is
// skipped, so data rows start at 1. Offsets are into the block content and
// exclude the padding around the cell text.
struct TableCell {
  std::size_t row = 0;
  std::size_t column = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

std::vector<TableCell> table_cells(std::string_view table_content);

void to_json(nlohmann::json& j, const Block& b);
void from_json(const nlohmann::json& j, Block& b);
void to_json(nlohmann::json& j, const PaperDocument& d);
void from_json(const nlohmann::json& j, PaperDocument& d);
void to_json(nlohmann::json& j, const SpanAnchor& a);
void from_json(const nlohmann::json& j, SpanAnchor& a);
void to_json(nlohmann::json& j, const TextEdit& e);
void from_json(const nlohmann::json& j, TextEdit& e);
void to_json(nlohmann::json& j, const EditStats& s);
void from_json(const nlohmann::json& j, EditStats& s);

}  // namespace revlogic

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


#include <doctest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "revlogic/error.hpp"
#include "revlogic/paper_model.hpp"
#include "revlogic/rng.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;

namespace {

const char* kFourSections = R"(# Graph Pruning at Scale

## Abstract

We prune message-passing graphs before training and keep accuracy.

## 1 Introduction

Large graphs are slow to train on.

## 2 Method

We drop edges with low attention mass.

## 3 Experiments

| Graph | Edges kept | Acc |
|---|---|---|
| ogbn-arxiv | 40% | 0.712 |

Table 1: Accuracy after pruning.

## 4 Conclusion

Pruning is cheap.
)";

ErrorCode parse_error(const std::string& text) {
  try {
    parse_markdown(text, "x", "v");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::IoError;
}

std::vector<fs::path> all_fixture_papers() {
  auto out = markdown_files(fixtures_dir() / "corpus");
  for (auto& p : markdown_files(fixtures_dir() / "roundtrip")) out.push_back(p);
  return out;
}

PaperDocument toy(const std::string& body) {
  return parse_markdown("# T\n\n## Abstract\n\nA.\n\n## 1 One\n\n" + body + "\n\n## 2 Two\n\nx\n\n## 3 Three\n\ny\n",
                        "toy", "v");
}

std::string cell_text(const std::string& table, std::size_t row, std::size_t col) {
  for (const auto& c : table_cells(table))
    if (c.row == row && c.column == col) return table.substr(c.start, c.end - c.start);
  return "<none>";
}

}  // namespace

TEST_SUITE("paper_model") {
  TEST_CASE("grammar: four sections and one table") {
    const auto doc = parse_markdown(kFourSections, "prune", "iclr");
    CHECK(doc.title == "Graph Pruning at Scale");
    CHECK(doc.abstract.find("prune message-passing") != std::string::npos);
    std::vector<const Block*> tables;
    for (const auto& b : doc.blocks)
      if (b.kind == BlockKind::Table) tables.push_back(&b);
    REQUIRE(tables.size() == 1);
    CHECK(tables[0]->id == "t-000");
    const auto* caption = doc.find("c-000");
    REQUIRE(caption != nullptr);
    CHECK(caption->kind == BlockKind::FigureCaption);
    CHECK(caption->content.rfind("Table 1", 0) == 0);
    CHECK(render_markdown(doc) == kFourSections);
  }

  TEST_CASE("rejects: missing abstract, too few sections, malformed table") {
    const auto dir = fixtures_dir() / "invalid";
    CHECK(parse_error(read_file(dir / "no-abstract.md")) == ErrorCode::MissingTitleOrAbstract);
    CHECK(parse_error(read_file(dir / "two-sections.md")) == ErrorCode::TooFewSections);
    CHECK(parse_error(read_file(dir / "malformed-table.md")) == ErrorCode::MalformedTable);
    CHECK(parse_error("") == ErrorCode::MissingTitleOrAbstract);
  }

  TEST_CASE("round trip over every fixture paper") {
    const auto files = all_fixture_papers();
    REQUIRE(files.size() >= 10);
    for (const auto& f : files) {
      CAPTURE(f);
      const auto src = read_file(f);
      const auto doc = parse_markdown(src, f.stem().string(), "v");
      CHECK(render_markdown(doc) == src);
      // ids unique and stable under a second parse of the rendering
      std::set<std::string> ids;
      for (const auto& b : doc.blocks) CHECK(ids.insert(b.id).second);
      const auto again = parse_markdown(render_markdown(doc), doc.paper_id, doc.venue);
      CHECK(blocks_identical(doc, again));
      for (const auto& b : doc.blocks) {
        if (b.kind == BlockKind::Table) CHECK_FALSE(table_cells(b.content).empty());
      }
    }
  }

  TEST_CASE("json round trip preserves the document") {
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "sparse-attention.md");
    const PaperDocument back = nlohmann::json(doc).get<PaperDocument>();
    CHECK(blocks_identical(doc, back));
    CHECK(render_markdown(back) == render_markdown(doc));
  }

  TEST_CASE("appendix handling") {
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "sparse-attention.md");
    int appendix = 0;
    for (const auto& b : doc.blocks) appendix += b.is_appendix ? 1 : 0;
    CHECK(appendix > 0);
    const auto bare = without_appendix(doc);
    for (const auto& b : bare.blocks) CHECK_FALSE(b.is_appendix);
    CHECK(render_markdown(bare).find("Appendix") == std::string::npos);
  }

  TEST_CASE("resolve_anchor: exact, normalized, absent") {
    const auto doc = toy("The model  reaches 0.907 on the test set.");
    const auto* p = doc.find("p-0001");
    REQUIRE(p != nullptr);
    const auto exact = resolve_anchor(doc, {"p-0001", 0, 0, "reaches 0.907"});
    CHECK(exact.mode == MatchMode::Exact);
    CHECK(p->content.substr(exact.start, exact.end - exact.start) == "reaches 0.907");

    const auto loose = resolve_anchor(doc, {"p-0001", 0, 0, "The model reaches"});
    CHECK(loose.mode == MatchMode::Normalized);
    CHECK(p->content.substr(loose.start, loose.end - loose.start) == "The model  reaches");

    CHECK_THROWS_WITH_AS(resolve_anchor(doc, {"p-0001", 0, 0, "not there"}), doctest::Contains("not"), Error);
    try {
      resolve_anchor(doc, {"p-9999", 0, 0, "x"});
      FAIL("expected UnknownBlock");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownBlock);
    }
    try {
      resolve_anchor(doc, {"p-0001", 0, 0, "absent quote"});
      FAIL("expected QuoteNotFound");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::QuoteNotFound);
    }
    const auto bound = bind_anchor(doc, {"p-0001", 0, 0, "reaches 0.907"});
    CHECK(bound.quote == p->content.substr(bound.start, bound.end - bound.start));
  }

  TEST_CASE("apply_edits: identity and single table cell") {
    const auto doc = load_paper(fixtures_dir() / "corpus" / "table-result.md");
    const auto same = apply_edits(doc, {});
    CHECK(blocks_identical(doc, same));
    CHECK(render_markdown(same) == render_markdown(doc));

    const auto* table = doc.find("t-000");
    REQUIRE(table != nullptr);
    const std::vector<TextEdit> edits{{{"t-000", 0, 0, "0.907"}, "0.807", "test"}};
    const auto edited = apply_edits(doc, edits);
    CHECK(changed_block_ids(doc, edited) == std::vector<std::string>{"t-000"});
    const auto before = table_cells(table->content);
    const auto& after_content = edited.find("t-000")->content;
    const auto after = table_cells(after_content);
    REQUIRE(before.size() == after.size());
    int differing = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      const auto a = table->content.substr(before[i].start, before[i].end - before[i].start);
      const auto b = after_content.substr(after[i].start, after[i].end - after[i].start);
      if (a != b) {
        ++differing;
        CHECK(a == "0.907");
        CHECK(b == "0.807");
      }
    }
    CHECK(differing == 1);
    CHECK(cell_text(after_content, 2, 1) == "0.807");
  }

  TEST_CASE("apply_edits matches a brute-force re-splice") {
    SeededRng rng(4);
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "calibrated-retrieval.md");
    std::vector<const Block*> texts;
    for (const auto& b : doc.blocks)
      if (b.kind == BlockKind::Text && b.content.size() > 20) texts.push_back(&b);
    REQUIRE_FALSE(texts.empty());
    for (int round = 0; round < 200; ++round) {
      const Block& b = *texts[rng.below(texts.size())];
      const std::size_t n = b.content.size();
      // two disjoint spans [s1,e1) < [s2,e2)
      std::size_t cuts[4];
      for (auto& c : cuts) c = rng.below(n + 1);
      std::sort(std::begin(cuts), std::end(cuts));
      if (cuts[0] == cuts[1] || cuts[2] == cuts[3]) continue;
      const std::string r1 = "<" + std::to_string(round) + ">", r2 = "[x]";
      std::vector<TextEdit> edits{
          {{b.id, cuts[2], cuts[3], b.content.substr(cuts[2], cuts[3] - cuts[2])}, r2, "t"},
          {{b.id, cuts[0], cuts[1], b.content.substr(cuts[0], cuts[1] - cuts[0])}, r1, "t"}};
      const auto edited = apply_edits(doc, edits);
      std::string expect = b.content;
      expect.replace(cuts[2], cuts[3] - cuts[2], r2);  // later span first keeps earlier offsets
      expect.replace(cuts[0], cuts[1] - cuts[0], r1);
      REQUIRE(edited.find(b.id)->content == expect);
      const auto rendered = render_markdown(edited);
      CHECK(rendered.find(r1) != std::string::npos);
      CHECK(rendered.find(r2) != std::string::npos);
      CHECK(changed_block_ids(doc, edited) == std::vector<std::string>{b.id});
    }
  }

  TEST_CASE("apply_edits rejects overlaps") {
    const auto doc = toy("alpha beta gamma");
    std::vector<TextEdit> edits{{{"p-0001", 0, 10, "alpha beta"}, "x", "t"}, {{"p-0001", 6, 16, "beta gamma"}, "y", "t"}};
    try {
      apply_edits(doc, edits);
      FAIL("expected OverlappingEdits");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OverlappingEdits);
    }
  }

  TEST_CASE("edit_stats") {
    const auto doc = toy("kitten");
    CHECK(edit_stats(doc, doc, std::size_t{0}) == EditStats{0, 0});
    const std::vector<TextEdit> edits{{{"p-0001", 0, 6, "kitten"}, "sitting", "t"}};
    const auto edited = apply_edits(doc, edits);
    const auto stats = edit_stats(doc, edited, std::span<const TextEdit>(edits));
    CHECK(stats.edit_count == 1);
    CHECK(stats.levenshtein == 3);
  }

  TEST_CASE("move_blocks_to_body_end keeps ids and content") {
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "sparse-attention.md");
    const std::vector<std::string> ids{"t-000", "c-000"};
    const auto moved = move_blocks_to_body_end(doc, ids);
    std::multiset<std::string> a, b;
    for (const auto& x : doc.blocks) a.insert(x.id + x.content);
    for (const auto& x : moved.blocks) b.insert(x.id + x.content);
    CHECK(a == b);
    std::size_t last_body = 0;
    for (std::size_t i = 0; i < moved.blocks.size(); ++i)
      if (!moved.blocks[i].is_appendix) last_body = i;
    CHECK(moved.blocks[last_body].id == "c-000");
    CHECK(moved.blocks[last_body - 1].id == "t-000");
  }

  TEST_CASE("render_with_ids tags every block") {
    const auto doc = parse_markdown(kFourSections, "prune", "iclr");
    const auto tagged = render_with_ids(doc);
    for (const auto& b : doc.blocks) CHECK(tagged.find("[" + b.id + "]") != std::string::npos);
  }
}

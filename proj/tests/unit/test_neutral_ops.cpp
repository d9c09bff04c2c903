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

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "revlogic/counterfactual.hpp"
#include "revlogic/error.hpp"
#include "revlogic/rng.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;
using nlohmann::json;

namespace {

std::multiset<std::string> tokens(const std::string& s) {
  std::multiset<std::string> out;
  std::istringstream in(s);
  for (std::string t; in >> t;) out.insert(t);
  return out;
}

std::vector<PaperDocument> corpus() {
  std::vector<PaperDocument> docs;
  for (const auto& f : markdown_files(fixtures_dir() / "corpus")) docs.push_back(load_paper(f));
  return docs;
}

std::string spelling_paper() {
  std::string md = "# Colors\n\n## Abstract\n\nWe optimize the color model.\n\n";
  for (int s = 1; s <= 3; ++s) {
    md += "## " + std::to_string(s) + " Part\n\n";
    for (int p = 0; p < 3; ++p) md += "We analyze the behavior of the color model in `color` code.\n\n";
  }
  return md;
}

}  // namespace

TEST_SUITE("neutral_ops") {
  TEST_CASE("block sampling picks text blocks only, deterministically") {
    for (const auto& doc : corpus()) {
      std::size_t n_text = 0;
      for (const auto& b : doc.blocks) n_text += b.kind == BlockKind::Text;
      for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto picks = sample_text_blocks(doc, 0.4, seed);
        CHECK(picks.size() == fraction_count(n_text, 0.4));
        CHECK(std::set<std::size_t>(picks.begin(), picks.end()).size() == picks.size());
        for (auto i : picks) CHECK(doc.blocks.at(i).kind == BlockKind::Text);
        CHECK(picks == sample_text_blocks(doc, 0.4, seed));
      }
    }
  }

  TEST_CASE("critical operators are refused") {
    const auto doc = corpus().front();
    CHECK_THROWS_AS(apply_neutral(doc, CfOperator::ResultEdit, 1, nullptr), Error);
    CHECK_THROWS_AS(apply_neutral(doc, CfOperator::ActivePassive, 1, nullptr), Error);
  }

  TEST_CASE("american to british spelling on sampled blocks") {
    const auto doc = parse_markdown(spelling_paper(), "colors", "test");
    const auto gen = apply_neutral(doc, CfOperator::AmericanBritish, 4, nullptr);
    const auto picks = sample_text_blocks(doc, kSpellingFraction, 4);
    REQUIRE_FALSE(picks.empty());
    std::set<std::string> picked;
    for (auto i : picks) picked.insert(doc.blocks[i].id);
    for (const auto& id : changed_block_ids(doc, gen.document)) CHECK(picked.count(id) == 1);
    for (auto i : picks) {
      const auto& after = gen.document.blocks[i].content;
      CHECK(after.find("colour model") != std::string::npos);
      CHECK(after.find("`color`") != std::string::npos);
    }
    CHECK(tokens(render_markdown(doc)).size() == tokens(render_markdown(gen.document)).size());
    CHECK(gen.cf.condition == Condition::Neutral);
    CHECK(gen.cf.stats.edit_count == gen.cf.edits.size());
    CHECK(minimality_holds(gen.cf, doc, gen.document));

    // british-majority papers go the other way
    auto british = spelling_paper();
    for (auto [from, to] : {std::pair{"color", "colour"}, {"analyze", "analyse"}, {"behavior", "behaviour"},
                            {"optimize", "optimise"}}) {
      std::size_t pos = 0;
      while ((pos = british.find(from, pos)) != std::string::npos) {
        british.replace(pos, std::string_view(from).size(), to);
        pos += std::string_view(to).size();
      }
    }
    const auto bdoc = parse_markdown(british, "colours", "test");
    const auto bgen = apply_neutral(bdoc, CfOperator::AmericanBritish, 4, nullptr);
    for (auto i : sample_text_blocks(bdoc, kSpellingFraction, 4))
      CHECK(bgen.document.blocks[i].content.find("color model") != std::string::npos);
  }

  TEST_CASE("voice rewrites replace whole sampled paragraphs") {
    MockSetup m;
    m.mock->script_handler("neutral.voice", [](const BackendProfile&, const PromptTask& t) {
      return json{{"rewritten", "It is shown by us. " + std::to_string(t.messages.back().text.size())}}.dump();
    });
    CfContext ctx{*m.gateway, mock_profile(), mock_profile(), 3, LanguageErrorMode::Llm};
    const auto doc = corpus().front();
    const auto gen = apply_neutral(doc, CfOperator::ActivePassive, 11, &ctx);
    const auto picks = sample_text_blocks(doc, kVoiceFraction, 11);
    CHECK(gen.cf.edits.size() == picks.size());
    CHECK(m.mock->calls("neutral.voice") == picks.size());
    for (const auto& e : gen.cf.edits) {
      CHECK(e.anchor.start == 0);
      CHECK(e.anchor.end == doc.find(e.anchor.block_id)->content.size());
      CHECK(e.operator_tag == "active_passive");
    }
    CHECK(changed_block_ids(doc, gen.document).size() == picks.size());
  }

  TEST_CASE("rule-based language errors") {
    for (const auto& doc : corpus()) {
      const auto gen = apply_neutral(doc, CfOperator::LanguageError, 3, nullptr);
      const auto picks = sample_text_blocks(doc, kLanguageErrorFraction, 3);
      std::map<std::string, int> per_block;
      for (const auto& e : gen.cf.edits) ++per_block[e.anchor.block_id];
      for (const auto& [id, n] : per_block) CHECK(n <= 2);
      CHECK(per_block.size() <= picks.size());
      for (const auto& e : gen.cf.edits) {
        const bool drop = e.replacement.empty();
        const bool swap = e.anchor.quote.size() == 2 && e.replacement.size() == 2 &&
                          e.replacement[0] == e.anchor.quote[1] && e.replacement[1] == e.anchor.quote[0];
        CHECK((drop || swap));
        if (drop) CHECK((e.anchor.quote == "the " || e.anchor.quote == "a " || e.anchor.quote == "an "));
      }
      CHECK(json(gen.cf).dump() == json(apply_neutral(doc, CfOperator::LanguageError, 3, nullptr).cf).dump());
    }
  }

  TEST_CASE("language errors leave code and math alone") {
    const std::string md =
        "# T\n\n## Abstract\n\n`inline_code_token` $x+y$\n\n## 1 A\n\n`another_code` $a$\n\n## 2 B\n\n"
        "`more_code_here` $b$\n\n## 3 C\n\n`last_code_spans` $c$\n";
    const auto doc = parse_markdown(md, "code", "test");
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      CHECK(apply_neutral(doc, CfOperator::LanguageError, seed, nullptr).cf.edits.empty());
  }

  TEST_CASE("layout keeps every token and moves tables and captions") {
    for (const auto& doc : corpus()) {
      for (std::uint64_t seed : {5u, 6u}) {
        const auto gen = apply_neutral(doc, CfOperator::Layout, seed, nullptr);
        CHECK(tokens(render_markdown(doc)) == tokens(render_markdown(gen.document)));
        std::set<std::string> before_ids, after_ids;
        for (const auto& b : doc.blocks) before_ids.insert(b.id);
        for (const auto& b : gen.document.blocks) after_ids.insert(b.id);
        CHECK(before_ids == after_ids);
        CHECK(gen.cf.stats.edit_count == gen.cf.edits.size() + gen.cf.relocated_block_ids.size());
        for (const auto& e : gen.cf.edits) {
          CHECK(e.anchor.quote == " ");
          CHECK((e.replacement == "  " || e.replacement == "   "));
        }
        if (!gen.cf.relocated_block_ids.empty()) {
          // relocated blocks sit together right before the appendix
          std::size_t last_body = 0;
          for (std::size_t i = 0; i < gen.document.blocks.size(); ++i)
            if (!gen.document.blocks[i].is_appendix) last_body = i;
          const auto n = gen.cf.relocated_block_ids.size();
          for (std::size_t k = 0; k < n; ++k)
            CHECK(gen.document.blocks[last_body + 1 - n + k].id == gen.cf.relocated_block_ids[k]);
        }
        CHECK(minimality_holds(gen.cf, doc, gen.document));
      }
    }
  }

  TEST_CASE("neutral counterfactuals are deterministic per seed") {
    const auto doc = corpus().back();
    for (auto op : {CfOperator::AmericanBritish, CfOperator::Layout, CfOperator::LanguageError}) {
      const auto a = apply_neutral(doc, op, 42, nullptr);
      const auto b = apply_neutral(doc, op, 42, nullptr);
      CHECK(json(a.cf).dump() == json(b.cf).dump());
      CHECK(render_markdown(a.document) == render_markdown(b.document));
      CHECK(a.cf.cf_id == make_cf_id(doc.paper_id, op));
    }
  }
}

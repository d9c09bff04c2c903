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


#include <algorithm>
#include <cctype>
#include <set>

#include "revlogic/counterfactual.hpp"
#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/rng.hpp"
#include "revlogic/spelling_lexicon.hpp"

namespace revlogic {

std::vector<std::size_t> sample_text_blocks(const PaperDocument& doc, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> text_blocks;
  for (std::size_t i = 0; i < doc.blocks.size(); ++i)
    if (doc.blocks[i].kind == BlockKind::Text) text_blocks.push_back(i);
  SeededRng rng(seed);
  const auto picks = rng.sample_indices(text_blocks.size(), fraction_count(text_blocks.size(), fraction));
  std::vector<std::size_t> out;
  out.reserve(picks.size());
  for (auto p : picks) out.push_back(text_blocks[p]);
  return out;
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Bytes inside inline code or $math$.
std::vector<bool> protected_mask(std::string_view text) {
  std::vector<bool> mask(text.size(), false);
  for (char delim : {'`', '$'}) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (text[i] != delim) {
        ++i;
        continue;
      }
      const auto close = text.find(delim, i + 1);
      if (close == std::string_view::npos) break;
      for (std::size_t k = i; k <= close; ++k) mask[k] = true;
      i = close + 1;
    }
  }
  return mask;
}

TextEdit span_edit(const Block& b, std::size_t start, std::size_t end, std::string replacement, CfOperator op) {
  return {SpanAnchor{b.id, start, end, b.content.substr(start, end - start)}, std::move(replacement),
          std::string(to_string(op))};
}

std::vector<TextEdit> spelling_edits(const PaperDocument& doc, const std::vector<std::size_t>& picks) {
  std::size_t american = 0, british = 0;
  for (const auto& b : doc.blocks) {
    if (b.kind != BlockKind::Text) continue;
    const auto [a, br] = spelling::count_variants(b.content);
    american += a;
    british += br;
  }
  const auto dir = british > american ? spelling::Direction::BritishToAmerican : spelling::Direction::AmericanToBritish;
  std::vector<TextEdit> edits;
  for (auto idx : picks) {
    const auto& b = doc.blocks[idx];
    for (const auto& r : spelling::conversions(b.content, dir))
      edits.push_back(span_edit(b, r.start, r.end, r.replacement, CfOperator::AmericanBritish));
  }
  return edits;
}

std::vector<TextEdit> rewrite_edits(const PaperDocument& doc, const std::vector<std::size_t>& picks,
                                    std::string_view task, CfOperator op, CfContext& ctx) {
  std::vector<TextEdit> edits;
  for (auto idx : picks) {
    const auto& b = doc.blocks[idx];
    auto t = ctx.gateway.make_task(task, {{"paragraph", b.content}}, "neutral.rewrite");
    const auto reply = ctx.gateway.complete_structured(t, ctx.perturb_profile);
    auto rewritten = reply.at("rewritten").get<std::string>();
    if (rewritten.empty() || rewritten == b.content) continue;
    edits.push_back(span_edit(b, 0, b.content.size(), std::move(rewritten), op));
  }
  return edits;
}

// Seeded typo: one adjacent-letter transposition and one dropped article.
std::vector<TextEdit> rule_errors(const Block& b, SeededRng& rng) {
  const auto& s = b.content;
  const auto mask = protected_mask(s);
  struct Word {
    std::size_t start, end;
  };
  std::vector<Word> words, articles;
  for (std::size_t i = 0; i < s.size();) {
    if (!is_alpha(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_alpha(s[j])) ++j;
    const bool bounded = (i == 0 || is_ws(s[i - 1])) && j < s.size() && s[j] == ' ';
    if (!mask[i]) {
      const auto w = std::string_view(s).substr(i, j - i);
      if (bounded && i > 0 && (w == "the" || w == "a" || w == "an")) articles.push_back({i, j + 1});
      else if (j - i >= 4) words.push_back({i, j});
    }
    i = j;
  }

  std::vector<TextEdit> edits;
  std::optional<Word> swapped;
  if (!words.empty()) {
    const auto w = words[rng.below(words.size())];
    const std::size_t len = w.end - w.start;
    const std::size_t k = w.start + 1 + rng.below(len - 2);
    if (s[k] != s[k + 1]) {
      std::string rep{s[k + 1], s[k]};
      edits.push_back(span_edit(b, k, k + 2, rep, CfOperator::LanguageError));
      swapped = w;
    }
  }
  if (!articles.empty()) {
    const auto a = articles[rng.below(articles.size())];
    if (!swapped || a.end <= swapped->start || a.start >= swapped->end)
      edits.push_back(span_edit(b, a.start, a.end, "", CfOperator::LanguageError));
  }
  return edits;
}

std::vector<TextEdit> whitespace_edits(const Block& b, SeededRng& rng) {
  const auto& s = b.content;
  const auto mask = protected_mask(s);
  std::vector<std::size_t> gaps;
  for (std::size_t i = 1; i + 1 < s.size(); ++i)
    if (s[i] == ' ' && !mask[i] && !is_ws(s[i - 1]) && !is_ws(s[i + 1])) gaps.push_back(i);
  std::vector<TextEdit> edits;
  if (gaps.empty()) return edits;
  const auto picks = rng.sample_indices(gaps.size(), 1 + rng.below(3));
  for (auto p : picks) {
    const std::size_t pos = gaps[p];
    edits.push_back(span_edit(b, pos, pos + 1, std::string(2 + rng.below(2), ' '), CfOperator::Layout));
  }
  return edits;
}

}  // namespace

GeneratedCf apply_neutral(const PaperDocument& doc, CfOperator op, std::uint64_t seed, CfContext* ctx) {
  if (is_critical(op))
    throw Error(ErrorCode::PreconditionViolated, "apply_neutral got critical operator " + std::string(to_string(op)));
  GeneratedCf gen;
  auto& cf = gen.cf;
  cf.cf_id = make_cf_id(doc.paper_id, op);
  cf.paper_id = doc.paper_id;
  cf.condition = Condition::Neutral;
  cf.op = op;
  cf.seed = seed;

  auto need_ctx = [&]() -> CfContext& {
    if (!ctx) throw Error(ErrorCode::PreconditionViolated, std::string(to_string(op)) + " needs a gateway");
    return *ctx;
  };

  SeededRng rng(derive_seed(seed, "neutral-edits"));
  switch (op) {
    case CfOperator::AmericanBritish:
      cf.edits = spelling_edits(doc, sample_text_blocks(doc, kSpellingFraction, seed));
      break;
    case CfOperator::ActivePassive:
      cf.edits = rewrite_edits(doc, sample_text_blocks(doc, kVoiceFraction, seed), "neutral.voice", op, need_ctx());
      break;
    case CfOperator::LanguageError: {
      const auto picks = sample_text_blocks(doc, kLanguageErrorFraction, seed);
      if (ctx && ctx->language_errors == LanguageErrorMode::Llm) {
        cf.edits = rewrite_edits(doc, picks, "neutral.errors", op, *ctx);
      } else {
        for (auto idx : picks)
          for (auto& e : rule_errors(doc.blocks[idx], rng)) cf.edits.push_back(std::move(e));
      }
      break;
    }
    case CfOperator::Layout:
      for (auto idx : sample_text_blocks(doc, kLayoutFraction, seed))
        for (auto& e : whitespace_edits(doc.blocks[idx], rng)) cf.edits.push_back(std::move(e));
      break;
    default:
      break;
  }

  gen.document = apply_edits(doc, cf.edits);
  if (op == CfOperator::Layout) {
    std::vector<std::string> movable;
    for (const auto& b : doc.blocks)
      if (!b.is_appendix && (b.kind == BlockKind::Table || b.kind == BlockKind::FigureCaption)) movable.push_back(b.id);
    auto moved = move_blocks_to_body_end(gen.document, movable);
    bool reordered = false;
    for (std::size_t i = 0; i < moved.blocks.size(); ++i)
      reordered = reordered || moved.blocks[i].id != gen.document.blocks[i].id;
    if (reordered) {
      cf.relocated_block_ids = movable;
      gen.document = std::move(moved);
    }
  }

  std::set<std::string> touched;
  for (const auto& e : cf.edits) touched.insert(e.anchor.block_id);
  for (const auto& id : cf.relocated_block_ids) touched.insert(id);
  cf.allowed_block_ids.assign(touched.begin(), touched.end());
  cf.stats = edit_stats(doc, gen.document, cf.edits.size() + cf.relocated_block_ids.size());
  return gen;
}

}  // namespace revlogic

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

#include <set>
#include <string>

#include "revlogic/arg_suite.hpp"
#include "revlogic/error.hpp"
#include "revlogic/text.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;
using nlohmann::json;

namespace {

VenueAssets iclr() { return load_venue_assets(assets_dir() / "venues" / "iclr.json"); }

const char* kReview = R"(Summary: The paper proposes a retrieval method.
Strengths: Clear writing. Strong baselines.
Weaknesses: The ablation is thin.
Questions: How does it scale?
Soundness: 3
Presentation: 3
Contribution: 2
Overall: 6
Confidence: 4
)";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

Counterfactual critical_cf(std::string id = "p.finding_edit") {
  Counterfactual cf;
  cf.cf_id = std::move(id);
  cf.paper_id = "p";
  cf.condition = Condition::Critical;
  cf.op = CfOperator::FindingEdit;
  cf.revised_block_text = "The method outperforms every existing model.";
  return cf;
}

ReviewReport original_review() {
  ReviewReport r;
  r.review_id = "base/p";
  r.arg_name = "base";
  r.paper_ref_id = "p";
  r.raw_text = kReview;
  const auto v = iclr();
  const auto parsed = parse_review(r.raw_text, v, nullptr, mock_profile());
  r.sections = parsed.sections;
  r.scores = parsed.scores;
  r.parse_status = parsed.status;
  return r;
}

}  // namespace

TEST_SUITE("arg_suite") {
  TEST_CASE("venue assets") {
    const auto v = iclr();
    CHECK(v.sections() == std::vector<std::string>{"Summary", "Strengths", "Weaknesses", "Questions"});
    CHECK(v.score_ranges.size() == 5);
    CHECK(json(v).get<VenueAssets>().review_template == v.review_template);

    auto missing = v;
    missing.score_ranges["Novelty"] = ScoreRange{1, 4, true};
    CHECK(code_of([&] { missing.validate(); }) == ErrorCode::ConfigError);
    auto no_overall = v;
    no_overall.overall_score = "Rating";
    CHECK(code_of([&] { no_overall.validate(); }) == ErrorCode::ConfigError);
  }

  TEST_CASE("ARG spec json") {
    ArgSpec s;
    s.name = "ext";
    s.kind = ArgKind::ExternalCmd;
    s.venue_assets_id = "iclr";
    s.command_template = "run {paper} {output}";
    const auto back = json(s).get<ArgSpec>();
    CHECK(back.command_template == s.command_template);
    CHECK(back.venue_assets_id == "iclr");
    CHECK(code_of([] { json{{"name", "x"}, {"kind", "external_cmd"}}.get<ArgSpec>(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { json{{"name", "x"}, {"kind", "oracle"}}.get<ArgSpec>(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { json{{"name", "x"}, {"kind", "few_shot"}}.get<ArgSpec>(); }) == ErrorCode::ConfigError);
  }

  TEST_CASE("truncation keeps a prefix of the body") {
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "sparse-attention.md");
    CHECK(blocks_identical(truncate(doc, document_tokens(doc)), doc));

    const auto body = without_appendix(doc);
    REQUIRE(body.blocks.size() < doc.blocks.size());
    CHECK(blocks_identical(truncate(doc, document_tokens(body)), body));

    for (std::size_t window = 60; window < document_tokens(body); window += 37) {
      PaperDocument t;
      try {
        t = truncate(doc, window);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowTooSmall);
        continue;
      }
      CAPTURE(window);
      CHECK(document_tokens(t) <= window);
      REQUIRE(t.blocks.size() <= body.blocks.size());
      REQUIRE_FALSE(t.blocks.empty());
      for (std::size_t i = 0; i + 1 < t.blocks.size(); ++i) CHECK(t.blocks[i].content == body.blocks[i].content);
      const auto& last = t.blocks.back();
      const auto& src = body.blocks[t.blocks.size() - 1];
      CHECK(last.id == src.id);
      if (last.content != src.content) {
        CHECK(last.kind == BlockKind::Text);
        CHECK(src.content.compare(0, last.content.size(), last.content) == 0);
        CHECK(text::is_space(src.content[last.content.size()]));
      }
      CHECK(t.blocks.front().id == "h-000");
    }
    CHECK(code_of([&] { truncate(doc, 5); }) == ErrorCode::WindowTooSmall);
  }

  TEST_CASE("review prompts") {
    MockSetup m;
    const auto v = iclr();
    const auto doc = load_paper(fixtures_dir() / "corpus" / "synth-000.md");
    const auto generic = resolve_messages(review_prompt(ArgKind::ZeroGeneric, v, doc, *m.gateway));
    const auto guided = resolve_messages(review_prompt(ArgKind::ZeroGuided, v, doc, *m.gateway));
    CHECK(generic.back().text.find(v.guidelines) == std::string::npos);
    CHECK(guided.back().text.find(v.guidelines) != std::string::npos);
    CHECK(generic.back().text.find(doc.title) != std::string::npos);
    CHECK(generic.back().text.find("Overall: <integer 1-10>") != std::string::npos);
    CHECK(code_of([&] { review_prompt(ArgKind::Oracle, v, doc, *m.gateway); }) == ErrorCode::PreconditionViolated);
  }

  TEST_CASE("review parsing") {
    const auto v = iclr();
    auto full = parse_review(kReview, v, nullptr, mock_profile());
    CHECK(full.status == ParseStatus::Full);
    CHECK(full.sections.at("Weaknesses") == "The ablation is thin.");
    CHECK(full.scores.at("Overall") == 6);

    auto bold = parse_review("**Summary:** Short.\n\n### Weaknesses:\n- one\n- two\n**Overall:** 7/10\n", v, nullptr,
                             mock_profile());
    CHECK(bold.status == ParseStatus::PartialNoScores);
    CHECK(bold.sections.at("Weaknesses") == "- one\n- two");
    CHECK(bold.scores.at("Overall") == 7);

    std::string out_of_range = kReview;
    out_of_range.replace(out_of_range.find("Soundness: 3"), 12, "Soundness: 9");
    auto partial = parse_review(out_of_range, v, nullptr, mock_profile());
    CHECK(partial.status == ParseStatus::PartialNoScores);
    CHECK(partial.scores.count("Soundness") == 0);

    auto raw = parse_review("Overall: 6\nA fine paper.", v, nullptr, mock_profile());
    CHECK(raw.status == ParseStatus::RawOnly);
    CHECK(raw.scores.empty());
    CHECK(parse_review("", v, nullptr, mock_profile()).status == ParseStatus::RawOnly);
  }

  TEST_CASE("review parsing falls back to the gateway") {
    const auto v = iclr();
    MockSetup m;
    m.mock->script("review.parse", json{{"sections", {{"summary", "Good."}, {"weaknesses", "Thin."}}},
                                        {"scores",
                                         {{"Soundness", 3},
                                          {"Presentation", "2"},
                                          {"Contribution", 2},
                                          {"Overall", 11},
                                          {"Confidence", 4}}}}
                                       .dump());
    auto p = parse_review("Nice paper overall, though thin. I'd give it a six.", v, m.gateway.get(), mock_profile());
    CHECK(p.sections.at("Summary") == "Good.");
    CHECK(p.scores.at("Presentation") == 2);
    CHECK(p.scores.count("Overall") == 0);
    CHECK(p.status == ParseStatus::PartialNoScores);

    MockSetup bad;
    bad.mock->script("review.parse", "not json at all");
    auto q = parse_review("Summary: ok\nOverall: 5\n", v, bad.gateway.get(), mock_profile());
    CHECK(q.status == ParseStatus::PartialNoScores);
    CHECK(q.scores.at("Overall") == 5);
  }

  TEST_CASE("zero-shot generation") {
    const auto v = iclr();
    MockSetup m;
    double temperature = -1;
    std::string prompt;
    m.mock->script_handler("arg.generic", [&](const BackendProfile& p, const PromptTask& t) {
      temperature = p.temperature;
      prompt = t.messages.back().text;
      return std::string(kReview);
    });
    ReviewContext ctx{*m.gateway, v, {}, mock_profile()};
    ArgSpec spec;
    spec.name = "generic";
    spec.backend = mock_profile("gen");
    spec.backend.temperature = 0.7;
    spec.backend.context_window_tokens = 1400;
    spec.backend.max_output_tokens = 300;
    const auto doc = load_paper(fixtures_dir() / "roundtrip" / "sparse-attention.md");
    const auto r = generate_review(spec, doc, "sparse", ctx);
    CHECK(r.review_id == "generic/sparse");
    CHECK(r.parse_status == ParseStatus::Full);
    CHECK(temperature == 0.0);
    CHECK(text::estimate_tokens(prompt) + 300 <= 1400);
    CHECK(prompt.find(doc.title) != std::string::npos);
    for (const auto& b : doc.blocks)
      if (b.is_appendix && b.kind == BlockKind::Text) CHECK(prompt.find(b.content) == std::string::npos);

    spec.backend.context_window_tokens = 200;
    CHECK(code_of([&] { generate_review(spec, doc, "sparse", ctx); }) == ErrorCode::WindowTooSmall);
    spec.kind = ArgKind::Oracle;
    CHECK(code_of([&] { generate_review(spec, doc, "sparse", ctx); }) == ErrorCode::PreconditionViolated);
  }

  TEST_CASE("external command ARG") {
    const auto v = iclr();
    MockSetup m;
    TempDir tmp;
    ReviewContext ctx{*m.gateway, v, tmp.path(), mock_profile()};
    const auto doc = load_paper(fixtures_dir() / "corpus" / "synth-001.md");
    write_file(tmp.path() / "review.txt", kReview);
    ArgSpec spec;
    spec.name = "ext";
    spec.kind = ArgKind::ExternalCmd;
    spec.command_template = "test -s {paper} && cp '" + (tmp.path() / "review.txt").string() + "' {output}";
    const auto r = generate_review(spec, doc, "synth-001", ctx);
    CHECK(r.parse_status == ParseStatus::Full);
    CHECK(r.raw_text == kReview);
    CHECK(m.mock->calls() == 0);

    spec.command_template = "echo broken >&2; exit 3";
    try {
      generate_review(spec, doc, "synth-001", ctx);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ExternalCommandFailed);
      CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
    spec.command_template = "true";
    CHECK(code_of([&] { generate_review(spec, doc, "synth-001", ctx); }) == ErrorCode::ExternalCommandFailed);
  }

  TEST_CASE("oracle reviews") {
    const auto v = iclr();
    MockSetup m;
    m.mock->script_handler("oracle.paraphrase", [](const BackendProfile&, const PromptTask& t) {
      auto text = t.messages.back().text;
      return text.substr(text.find("Summary:"));
    });
    ReviewContext ctx{*m.gateway, v, {}, mock_profile()};
    ArgSpec spec;
    spec.name = "oracle";
    spec.kind = ArgKind::Oracle;
    spec.base_arg = "base";
    spec.backend = mock_profile();
    const auto original = original_review();
    REQUIRE(original.parse_status == ParseStatus::Full);

    const auto cf = critical_cf();
    const auto r = oracle_review(original, cf, spec, 7, ctx);
    const int drop = oracle_score_drop(7, cf.cf_id);
    CHECK(r.scores.at("Overall") == 6 - drop);
    CHECK(r.scores.at("Soundness") == 3);
    CHECK(r.raw_text.find("Overall: " + std::to_string(6 - drop)) != std::string::npos);
    CHECK(r.sections.at("Weaknesses").find(oracle_comment(cf)) != std::string::npos);
    CHECK(r.paper_ref_id == cf.cf_id);
    CHECK(r.parse_status == ParseStatus::Full);

    auto neutral = cf;
    neutral.condition = Condition::Neutral;
    neutral.op = CfOperator::Layout;
    const auto n = oracle_review(original, neutral, spec, 7, ctx);
    CHECK(n.scores == original.scores);
    CHECK(n.raw_text.find("Soundness concern") == std::string::npos);

    auto null_spec = spec;
    null_spec.reacts = false;
    CHECK(oracle_review(original, cf, null_spec, 7, ctx).scores == original.scores);

    auto low = original;
    low.scores["Overall"] = 1;
    CHECK(oracle_review(low, cf, spec, 7, ctx).scores.at("Overall") == 1);

    auto empty = original;
    empty.raw_text = "  ";
    CHECK(code_of([&] { oracle_review(empty, cf, spec, 7, ctx); }) == ErrorCode::MissingOriginalReview);
  }

  TEST_CASE("oracle score drop is one or two") {
    std::set<int> seen;
    for (int i = 0; i < 64; ++i) {
      const int d = oracle_score_drop(3, "p" + std::to_string(i) + ".result_edit");
      CHECK((d == 1 || d == 2));
      seen.insert(d);
      CHECK(d == oracle_score_drop(3, "p" + std::to_string(i) + ".result_edit"));
    }
    CHECK(seen.size() == 2);
    for (auto op : kCriticalOperators) {
      auto cf = critical_cf();
      cf.op = op;
      CHECK(oracle_comment(cf).find("Soundness concern") == 0);
      CHECK(oracle_comment(cf).find("unsupported") != std::string::npos);
    }
  }
}

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

#include "revlogic/error.hpp"
#include "revlogic/pipeline.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Small corpus: three synthetic papers plus one that fails to parse.
void make_corpus(const fs::path& dir, std::size_t papers = 3) {
  fs::create_directories(dir);
  const auto src = fixtures_dir() / "corpus";
  for (std::size_t i = 0; i < papers; ++i) {
    const std::string id = "synth-00" + std::to_string(i);
    fs::copy_file(src / (id + ".md"), dir / (id + ".md"));
    fs::copy_file(src / (id + ".truth.json"), dir / (id + ".truth.json"));
  }
  fs::copy_file(fixtures_dir() / "invalid" / "no-abstract.md", dir / "no-abstract.md");
}

json base_config() {
  return json{{"corpus_dir", "corpus"},
              {"workspace_dir", "work"},
              {"seed", 7},
              {"venue", "iclr"},
              {"profiles", {{"default", {{"endpoint_url", "mock://synthetic"}, {"model_name", "mock"}}}}},
              {"venues", {{"iclr", (assets_dir() / "venues" / "iclr.json").string()}}},
              {"taxonomy", (assets_dir() / "taxonomy.json").string()},
              {"args",
               {{{"name", "generic"}, {"kind", "zero_generic"}, {"venue", "iclr"}},
                {{"name", "oracle"}, {"kind", "oracle"}, {"venue", "iclr"}, {"base_arg", "generic"}},
                {{"name", "null"}, {"kind", "oracle"}, {"venue", "iclr"}, {"base_arg", "generic"}, {"reacts", false}}}},
              {"language_errors", "rules"}};
}

RunConfig config_in(const fs::path& root, json j = base_config()) {
  return config_from_json(j, root);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config parsing and validation") {
    TempDir tmp;
    make_corpus(tmp.path() / "corpus");
    const auto c = config_in(tmp.path());
    CHECK(c.corpus_dir == tmp.path() / "corpus");
    CHECK(c.workspace_dir == tmp.path() / "work");
    CHECK(c.args.size() == 3);
    CHECK(c.args[0].backend.endpoint_url == "mock://synthetic");
    CHECK(c.profiles.judging.model_name == "mock");
    CHECK(c.mock_truth_dirs == std::vector<fs::path>{c.corpus_dir});
    CHECK(c.language_errors == LanguageErrorMode::Rules);

    auto digest_of = [&](json j) { return config_digest(config_in(tmp.path(), std::move(j))); };
    auto j = base_config();
    j["concurrency"] = 4;
    j["workspace_dir"] = "elsewhere";
    CHECK(digest_of(j) == config_digest(c));
    j["seed"] = 8;
    CHECK(digest_of(j) != config_digest(c));

    auto bad = [&](auto mutate) {
      auto b = base_config();
      mutate(b);
      return code_of([&] { config_in(tmp.path(), b); });
    };
    CHECK(bad([](json& b) { b["args"].push_back(b["args"][0]); }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["args"][0]["venue"] = "neurips"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["args"][1]["base_arg"] = "missing"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["args"][1]["base_arg"] = "null"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["args"][0]["name"] = "a/b"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["sd_mode"] = "pooled"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["corpus_dir"] = "nowhere"; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b["max_attempts"] = 0; }) == ErrorCode::ConfigError);
    CHECK(bad([](json& b) { b.erase("profiles"); }) == ErrorCode::ConfigError);
  }

  TEST_CASE("manifest log") {
    TempDir tmp;
    {
      RunManifest m(tmp.path(), "abc");
      m.record({Stage::Ingest, "p1", ItemState::Done, ""});
      m.record({Stage::Ingest, "p2", ItemState::Failed, "IoError: x"});
      m.record({Stage::Ingest, "p2", ItemState::Done, ""});
      m.complete_stage(Stage::Ingest);
    }
    RunManifest again(tmp.path(), "abc");
    CHECK(again.status(Stage::Ingest, "p2")->state == ItemState::Done);
    CHECK(again.items(Stage::Ingest).size() == 2);
    CHECK(again.stage_complete(Stage::Ingest));
    CHECK_FALSE(again.stage_complete(Stage::Review));
    CHECK_FALSE(again.status(Stage::Review, "p1").has_value());
    CHECK(code_of([&] { RunManifest(tmp.path(), "other"); }) == ErrorCode::ConfigMismatch);
  }

  TEST_CASE("producing stages") {
    CHECK(producing_stage("documents/p.json") == Stage::Ingest);
    CHECK(producing_stage("logic/p.json") == Stage::Perturb);
    CHECK(producing_stage("cfs/p/p.layout.md") == Stage::Perturb);
    CHECK(producing_stage("reviews/a/p.json") == Stage::Review);
    CHECK(producing_stage("features/a/p.json") == Stage::Analyze);
  }

  TEST_CASE("end-to-end run on the mock world") {
    TempDir tmp;
    make_corpus(tmp.path() / "corpus");
    Pipeline p(config_in(tmp.path()));
    const auto summaries = p.run_all();
    REQUIRE(summaries.size() == 4);
    CHECK(summaries[0].done == 3);
    CHECK(summaries[0].skipped == 1);
    for (const auto& s : summaries) CHECK(s.ok());

    const auto ws = tmp.path() / "work";
    const auto skipped = p.manifest().status(Stage::Ingest, "no-abstract");
    REQUIRE(skipped.has_value());
    CHECK(skipped->state == ItemState::Skipped);
    CHECK(skipped->reason.find("MissingTitleOrAbstract") != std::string::npos);

    for (std::size_t i = 0; i < 3; ++i) {
      const std::string id = "synth-00" + std::to_string(i);
      CHECK(fs::exists(ws / "documents" / (id + ".json")));
      CHECK(fs::exists(ws / "logic" / (id + ".json")));
      const auto manifest = json::parse(read_file(ws / "cfs" / id / "manifest.json"));
      CHECK(manifest.at("critical").size() <= 3);
      CHECK(manifest.at("neutral").size() == 4);
      CHECK(fs::exists(ws / "reviews" / "generic" / (id + ".json")));
      CHECK(fs::exists(ws / "reviews" / "oracle" / (id + ".json")));
    }

    const auto analysis = json::parse(read_file(ws / "analysis" / "analysis.json"));
    CHECK(analysis.at("arg_order") == json{"generic", "oracle", "null"});
    CHECK(analysis.at("estimation").at("method") == "REML");
    for (const auto& arg : {"generic", "oracle", "null"})
      for (const auto& dim : {"aspect", "sentiment", "score"}) CHECK(analysis.at("args").at(arg).contains(dim));
    CHECK(analysis.at("n_deltas").get<int>() > 0);
    CHECK(p.report().find("oracle") != std::string::npos);
    CHECK(fs::exists(ws / "analysis" / "report.txt"));
    CHECK(fs::exists(ws / "prompts.jsonl"));

    // every read comes from a stage at or before the reader
    for (const auto& [stage, rel] : p.reads()) {
      CAPTURE(rel.string());
      CHECK(static_cast<int>(producing_stage(rel)) <= static_cast<int>(stage));
    }

    CHECK(code_of([&] {
      auto j = base_config();
      j["seed"] = 99;
      Pipeline other(config_in(tmp.path(), j));
    }) == ErrorCode::ConfigMismatch);
  }

  TEST_CASE("runs are deterministic and resumable") {
    TempDir tmp;
    make_corpus(tmp.path() / "corpus", 2);
    auto in = [&](const char* ws) {
      auto j = base_config();
      j["workspace_dir"] = ws;
      return config_in(tmp.path(), j);
    };
    Pipeline(in("a")).run_all();
    Pipeline(in("b")).run_all();
    const auto first = read_file(tmp.path() / "a" / "analysis" / "analysis.json");
    CHECK(first == read_file(tmp.path() / "b" / "analysis" / "analysis.json"));

    int interruptions = 0;
    for (bool resume = false;; resume = true) {
      RunOptions o;
      o.resume = resume;
      o.item_budget = 5;
      try {
        Pipeline(in("c"), o).run_all();
        break;
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::Interrupted);
        ++interruptions;
        REQUIRE(interruptions < 100);
      }
    }
    CHECK(interruptions > 2);
    CHECK(first == read_file(tmp.path() / "c" / "analysis" / "analysis.json"));
  }

  TEST_CASE("paper and ARG filters") {
    TempDir tmp;
    make_corpus(tmp.path() / "corpus", 2);
    RunOptions o;
    o.only_paper = "synth-001";
    Pipeline p(config_in(tmp.path()), o);
    p.ingest();
    p.perturb();
    CHECK(fs::exists(tmp.path() / "work" / "logic" / "synth-001.json"));
    CHECK_FALSE(fs::exists(tmp.path() / "work" / "logic" / "synth-000.json"));
  }

  TEST_CASE("analysis of hand-made deltas") {
    std::vector<ReviewDelta> deltas;
    for (int p = 0; p < 6; ++p) {
      const auto id = "p" + std::to_string(p);
      for (int k = 0; k < 3; ++k)
        deltas.push_back({"a", id, id + ".c" + std::to_string(k), Condition::Critical, -2 + (k % 2), -0.2, -1.0 - (p % 2)});
      for (int k = 0; k < 4; ++k)
        deltas.push_back(
            {"a", id, id + ".n" + std::to_string(k), Condition::Neutral, (k + p) % 3 - 1, 0.05 * (k - 1.5), (k % 2) * 1.0});
    }
    const auto j = analyze_deltas(deltas, {"a"}, SdMode::PerCounterfactual);
    CHECK(j.at("n_deltas") == deltas.size());
    const auto& aspect = j.at("args").at("a").at("aspect");
    CHECK(aspect.at("ate_critical").get<double>() == doctest::Approx(-5.0 / 3.0));
    CHECK(aspect.at("n_critical") == 18);
    CHECK(aspect.at("n_neutral") == 24);
    CHECK(aspect.at("lme").at("beta").get<double>() < 0);
    CHECK(aspect.at("lme").at("p_adjusted").get<double>() >= aspect.at("lme").at("p").get<double>());
    CHECK(j.at("ranking").size() == 1);
    const auto text = render_report(j);
    CHECK(text.find("aspect") != std::string::npos);
  }
}

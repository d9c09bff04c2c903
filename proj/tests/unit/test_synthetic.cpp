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

#include "revlogic/research_logic.hpp"
#include "revlogic/synthetic.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;
using nlohmann::json;

TEST_SUITE("synthetic") {
  TEST_CASE("text transforms") {
    CHECK(synthetic::swap_causal("Longer context leads to better recall.") ==
          "better recall leads to Longer context.");
    CHECK(synthetic::swap_causal("No verb here.") == "No verb here.");
    CHECK(synthetic::association_to_cause("Gains are associated with depth.") == "Gains cause depth.");
    CHECK(synthetic::association_to_cause("Depth is associated with gains.") == "Depth causes gains.");
    CHECK(synthetic::drop_condition("It helps when data is scarce.") == "It helps.");
    CHECK(synthetic::drop_condition("It helps when data is scarce, and more.") == "It helps, and more.");
    CHECK(synthetic::drop_condition("It helps.") == "It helps.");
  }

  TEST_CASE("generated papers parse and are deterministic") {
    const auto corpus = synthetic::generate_corpus(6, 3);
    std::set<std::string> keys, ids;
    for (const auto& p : corpus) {
      const auto doc = parse_markdown(p.markdown, p.paper_id, "iclr");
      CHECK(render_markdown(doc) == p.markdown);
      keys.insert(p.truth.at("key").get<std::string>());
      ids.insert(p.paper_id);
      CHECK(p.markdown.find(p.truth.at("key").get<std::string>()) != std::string::npos);
    }
    CHECK(keys.size() == corpus.size());
    CHECK(ids.size() == corpus.size());
    const auto again = synthetic::generate_paper(2, 3);
    CHECK(again.markdown == corpus[2].markdown);
    CHECK(again.truth == corpus[2].truth);
    CHECK(synthetic::generate_paper(2, 4).markdown != corpus[2].markdown);
  }

  TEST_CASE("corpus files and the world loader") {
    TempDir tmp;
    const auto corpus = synthetic::generate_corpus(3, 11);
    synthetic::write_corpus(corpus, tmp.path());
    for (const auto& p : corpus) {
      CHECK(read_file(tmp.path() / (p.paper_id + ".md")) == p.markdown);
      CHECK(json::parse(read_file(tmp.path() / (p.paper_id + ".truth.json"))) == p.truth);
    }
    synthetic::World w;
    w.load_dir(tmp.path());
    CHECK(w.size() == 3);
  }

  TEST_CASE("the world answers extraction from ground truth") {
    for (std::size_t i = 0; i < 4; ++i) {
      const auto paper = synthetic::generate_paper(i, 9);
      synthetic::World world;
      world.add_truth(paper.truth);
      auto mock = std::make_shared<MockBackend>();
      world.install(*mock);
      GatewayOptions opts;
      Gateway gw(mock, opts);
      const auto doc = parse_markdown(paper.markdown, paper.paper_id, "v");
      ExtractionContext ctx{gw, mock_profile(), true};
      const auto graph = extract_research_logic(doc, ctx);
      validate_graph(graph, &doc);
      std::size_t empirical = 0;
      for (const auto& c : paper.truth.at("contributions")) empirical += c.at("empirical").get<bool>();
      CHECK(graph.of_kind(BlockRole::Finding).size() == empirical);
      CHECK(graph.of_kind(BlockRole::Conclusion).size() == paper.truth.at("conclusions").size());
      CHECK(graph.of_kind(BlockRole::Result).size() == paper.truth.at("results").size());
      CHECK(graph.goal_summary == paper.truth.at("goal").at("summary").get<std::string>());
      CHECK(graph.finding_rank.size() == empirical);
    }
  }

  TEST_CASE("the world refuses unknown tasks") {
    const auto paper = synthetic::generate_paper(0, 1);
    synthetic::World world;
    world.add_truth(paper.truth);
    PromptTask unknown;
    unknown.task_name = "no.such.task";
    unknown.messages.push_back({"user", "hello", false});
    CHECK_THROWS(world.respond(mock_profile(), unknown));
  }
}

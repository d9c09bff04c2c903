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


// Synthetic papers with ground-truth research logic, and a deterministic
// mock model world that answers every pipeline prompt from that ground
// truth. Used for offline runs, tests and benchmarks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/llm_gateway.hpp"

namespace revlogic::synthetic {

inline constexpr std::string_view kMockEndpoint = "mock://synthetic";

struct GeneratedPaper {
  std::string paper_id;
  std::string markdown;
  nlohmann::json truth;  // see World for the layout
};

/// One paper. Every paper has a distinct method name ("key") that all of its
/// building-block summaries mention.
GeneratedPaper generate_paper(std::size_t index, std::uint64_t seed);

std::vector<GeneratedPaper> generate_corpus(std::size_t count, std::uint64_t seed);

/// Writes <paper_id>.md and <paper_id>.truth.json.
void write_corpus(const std::vector<GeneratedPaper>& papers, const std::filesystem::path& dir);

/// Answers prompts the way a cooperative model would, from ground truth.
///
/// Truth layout: {"key", "paper_id", "goal": item, "method": item,
/// "contributions": [item + "empirical", "relevance", "claim"],
/// "conclusions": [item + "supports"], "results": [item + "supports",
/// "values"], "produces": [result ids], "coreferences": [{"block",
/// "anchors"}], "hypothesis"}, where item = {"summary", "anchors"}.
class World {
 public:
  void add_truth(nlohmann::json truth);
  /// Loads every *.truth.json in dir.
  void load_dir(const std::filesystem::path& dir);
  std::size_t size() const { return truths_.size(); }

  std::string respond(const BackendProfile& profile, const PromptTask& task) const;

  /// Installs respond() as the default handler of a mock backend.
  void install(MockBackend& backend) const;

 private:
  const nlohmann::json* identify(std::string_view prompt) const;

  std::map<std::string, nlohmann::json> truths_;  // by key
};

/// Mock backend whose default handler is a World over `truth_dirs`.
std::shared_ptr<MockBackend> make_backend(const std::vector<std::filesystem::path>& truth_dirs);

// Text transforms shared by the world and its tests.
std::string swap_causal(std::string_view s);       // "A leads to B" -> "B leads to A"
std::string association_to_cause(std::string_view s);
std::string drop_condition(std::string_view s);    // removes a trailing "when ..." clause

}  // namespace revlogic::synthetic

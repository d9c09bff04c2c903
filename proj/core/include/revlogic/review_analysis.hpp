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


// Review features (soundness aspects, assertion sentiment, overall score),
// per-pair review deltas and surface-similarity diagnostics.

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/arg_suite.hpp"
#include "revlogic/counterfactual.hpp"
#include "revlogic/llm_gateway.hpp"

namespace revlogic {

enum class Polarity { Positive, Negative, Neutral };

std::string_view to_string(Polarity p);
Polarity polarity_from_string(std::string_view s);

struct Assertion {
  std::string text;
  Polarity polarity = Polarity::Neutral;
  std::set<std::string> aspects;

  bool operator==(const Assertion&) const = default;
};

void to_json(nlohmann::json& j, const Assertion& a);
void from_json(const nlohmann::json& j, Assertion& a);

struct AspectTaxonomy {
  std::vector<std::string> labels;
  std::set<std::string> soundness_subset;

  static AspectTaxonomy default_taxonomy();
  /// Throws Error{ConfigError} unless soundness_subset is within labels.
  void validate() const;
  /// Exact, case-insensitive or nearest label (edit distance at most a
  /// third of the label length); nullopt otherwise.
  std::optional<std::string> match(std::string_view label) const;
};

void to_json(nlohmann::json& j, const AspectTaxonomy& t);
void from_json(const nlohmann::json& j, AspectTaxonomy& t);
AspectTaxonomy load_taxonomy(const std::filesystem::path& file);

/// Assigns taxonomy labels to assertions.
class AspectClassifier {
 public:
  virtual ~AspectClassifier() = default;
  /// One label list per assertion, in order. Labels may be raw model output;
  /// the caller maps them onto the taxonomy.
  virtual std::vector<std::vector<std::string>> classify(const std::vector<std::string>& assertions,
                                                         const AspectTaxonomy& taxonomy) = 0;
};

/// Zero-shot classification through the gateway.
class GatewayAspectClassifier : public AspectClassifier {
 public:
  GatewayAspectClassifier(Gateway& gateway, BackendProfile profile);
  std::vector<std::vector<std::string>> classify(const std::vector<std::string>& assertions,
                                                 const AspectTaxonomy& taxonomy) override;

 private:
  Gateway& gateway_;
  BackendProfile profile_;
};

/// Reads labels from a JSON file {"<assertion text>": ["label", ...]},
/// produced by an external classifier. Unknown assertions get no label.
class FileAspectClassifier : public AspectClassifier {
 public:
  explicit FileAspectClassifier(const std::filesystem::path& file);
  std::vector<std::vector<std::string>> classify(const std::vector<std::string>& assertions,
                                                 const AspectTaxonomy& taxonomy) override;

 private:
  nlohmann::json labels_;
};

struct FeatureContext {
  Gateway& gateway;
  BackendProfile profile;
  AspectClassifier& classifier;
  const AspectTaxonomy& taxonomy;
  std::function<void(const std::string&)> warn;  // unknown labels etc.
};

/// Assertions with polarity (one self-refinement) and taxonomy aspects.
/// An empty review yields no assertions.
std::vector<Assertion> extract_assertions(const ReviewReport& review, FeatureContext& ctx);

/// Assertions carrying at least one soundness label.
int soundness_aspect_count(const std::vector<Assertion>& assertions, const AspectTaxonomy& taxonomy);

enum class ShareDenominator { AllAssertions, Polar };  // Polar: positive + negative only

struct ReviewFeatures {
  int soundness_aspect_count = 0;
  std::optional<double> positive_share;
  std::optional<double> overall_score;

  bool operator==(const ReviewFeatures&) const = default;
};

void to_json(nlohmann::json& j, const ReviewFeatures& f);
void from_json(const nlohmann::json& j, ReviewFeatures& f);

std::optional<double> positive_share(const std::vector<Assertion>& assertions,
                                     ShareDenominator mode = ShareDenominator::AllAssertions);

ReviewFeatures compute_features(const std::vector<Assertion>& assertions, const ReviewReport& review,
                                const AspectTaxonomy& taxonomy, const std::string& overall_score_name,
                                ShareDenominator mode = ShareDenominator::AllAssertions);

struct ReviewDelta {
  std::string arg_name;
  std::string paper_id;
  std::string cf_id;
  Condition condition = Condition::Neutral;
  int aspect_delta = 0;
  std::optional<double> sentiment_delta;  // absent when either share is undefined
  std::optional<double> score_delta;      // absent when either score is unparsed

  bool operator==(const ReviewDelta&) const = default;
};

void to_json(nlohmann::json& j, const ReviewDelta& d);
void from_json(const nlohmann::json& j, ReviewDelta& d);

struct DeltaMeta {
  std::string arg_name;
  std::string paper_id;
  std::string cf_id;
  Condition condition = Condition::Neutral;
};

ReviewDelta review_delta(const ReviewFeatures& orig, const ReviewFeatures& cf, const DeltaMeta& meta);

/// ROUGE-2 F-measure over lower-cased whitespace tokens with clipped bigram
/// counts. Two texts without bigrams score 1 when equal and 0 otherwise.
double rouge2(std::string_view a, std::string_view b);

/// |A ∩ B| / |A ∪ B| where pairs aligns indices of a with indices of b
/// one-to-one; two empty sets give 1.
double assertion_jaccard(std::size_t size_a, std::size_t size_b,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Exact (normalized) matches first, the gateway pairs the rest.
std::vector<std::pair<std::size_t, std::size_t>> align_assertions(const std::vector<Assertion>& a,
                                                                  const std::vector<Assertion>& b, Gateway& gateway,
                                                                  const BackendProfile& profile);

struct SurfaceSimilarity {
  double rouge2 = 0;
  double assertion_jaccard = 0;
};

SurfaceSimilarity surface_similarity(const ReviewReport& r1, const ReviewReport& r2, FeatureContext& ctx);

}  // namespace revlogic

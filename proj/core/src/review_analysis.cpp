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


#include "revlogic/review_analysis.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "revlogic/error.hpp"
#include "revlogic/levenshtein.hpp"
#include "revlogic/text.hpp"

namespace revlogic {

using nlohmann::json;

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "positive";
    case Polarity::Negative: return "negative";
    case Polarity::Neutral: return "neutral";
  }
  return "neutral";
}

Polarity polarity_from_string(std::string_view s) {
  if (text::iequals(s, "positive")) return Polarity::Positive;
  if (text::iequals(s, "negative")) return Polarity::Negative;
  if (text::iequals(s, "neutral")) return Polarity::Neutral;
  throw Error(ErrorCode::SchemaViolation, "unknown polarity '" + std::string(s) + "'");
}

void to_json(json& j, const Assertion& a) {
  j = json{{"text", a.text}, {"polarity", to_string(a.polarity)}, {"aspects", a.aspects}};
}

void from_json(const json& j, Assertion& a) {
  a.text = j.at("text").get<std::string>();
  a.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  a.aspects = j.value("aspects", std::set<std::string>{});
}

AspectTaxonomy AspectTaxonomy::default_taxonomy() {
  AspectTaxonomy t;
  t.labels = {"soundness", "experimental design", "results", "analysis", "methodology",
              "clarity",   "novelty",             "related work", "presentation", "impact"};
  t.soundness_subset = {"soundness", "experimental design", "results", "analysis", "methodology"};
  return t;
}

void AspectTaxonomy::validate() const {
  if (labels.empty()) throw Error(ErrorCode::ConfigError, "aspect taxonomy has no labels");
  for (const auto& s : soundness_subset)
    if (std::find(labels.begin(), labels.end(), s) == labels.end())
      throw Error(ErrorCode::ConfigError, "soundness label '" + s + "' is not in the taxonomy");
}

namespace {

std::string label_key(std::string_view s) {
  std::string out = text::to_lower(text::trim(s));
  for (auto& c : out)
    if (c == '_' || c == '-') c = ' ';
  return text::normalize_whitespace(out);
}

}  // namespace

std::optional<std::string> AspectTaxonomy::match(std::string_view label) const {
  const auto key = label_key(label);
  for (const auto& l : labels)
    if (l == label || label_key(l) == key) return l;
  std::optional<std::string> best;
  std::size_t best_distance = SIZE_MAX;
  for (const auto& l : labels) {
    const auto d = levenshtein(label_key(l), key);
    if (d * 3 <= label_key(l).size() && d < best_distance) {
      best = l;
      best_distance = d;
    }
  }
  return best;
}

void to_json(json& j, const AspectTaxonomy& t) {
  j = json{{"labels", t.labels}, {"soundness_subset", t.soundness_subset}};
}

void from_json(const json& j, AspectTaxonomy& t) {
  t.labels = j.at("labels").get<std::vector<std::string>>();
  t.soundness_subset = j.at("soundness_subset").get<std::set<std::string>>();
}

AspectTaxonomy load_taxonomy(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read taxonomy " + file.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "taxonomy " + file.string() + " is not JSON");
  auto t = j.get<AspectTaxonomy>();
  t.validate();
  return t;
}

GatewayAspectClassifier::GatewayAspectClassifier(Gateway& gateway, BackendProfile profile)
    : gateway_(gateway), profile_(std::move(profile)) {}

std::vector<std::vector<std::string>> GatewayAspectClassifier::classify(const std::vector<std::string>& assertions,
                                                                        const AspectTaxonomy& taxonomy) {
  if (assertions.empty()) return {};
  std::string labels, listing;
  for (const auto& l : taxonomy.labels) labels += (labels.empty() ? "" : ", ") + l;
  for (std::size_t i = 0; i < assertions.size(); ++i) listing += std::to_string(i) + ". " + assertions[i] + "\n";
  auto task = gateway_.make_task("assert.aspects", {{"labels", labels}, {"assertions", listing}}, "assert.aspects");
  const auto reply = gateway_.complete_structured(task, profile_);
  std::vector<std::vector<std::string>> out;
  for (const auto& row : reply.at("labels")) out.push_back(row.get<std::vector<std::string>>());
  out.resize(assertions.size());
  return out;
}

FileAspectClassifier::FileAspectClassifier(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read aspect labels " + file.string());
  labels_ = json::parse(in, nullptr, false);
  if (labels_.is_discarded() || !labels_.is_object())
    throw Error(ErrorCode::ConfigError, "aspect label file " + file.string() + " must be a JSON object");
}

std::vector<std::vector<std::string>> FileAspectClassifier::classify(const std::vector<std::string>& assertions,
                                                                     const AspectTaxonomy&) {
  std::vector<std::vector<std::string>> out;
  for (const auto& a : assertions) {
    if (labels_.contains(a)) out.push_back(labels_[a].get<std::vector<std::string>>());
    else out.emplace_back();
  }
  return out;
}

std::vector<Assertion> extract_assertions(const ReviewReport& review, FeatureContext& ctx) {
  if (text::trim(review.raw_text).empty()) return {};
  auto task = ctx.gateway.make_task("assert.extract", {{"review", review.raw_text}}, "assert.extract");
  const auto reply = ctx.gateway.complete_structured(task, ctx.profile, true);
  std::vector<Assertion> out;
  for (const auto& a : reply.at("assertions")) {
    Assertion as;
    as.text = std::string(text::trim(a.at("text").get<std::string>()));
    if (as.text.empty()) continue;
    as.polarity = polarity_from_string(a.at("polarity").get<std::string>());
    out.push_back(std::move(as));
  }
  std::vector<std::string> texts;
  for (const auto& a : out) texts.push_back(a.text);
  const auto labels = ctx.classifier.classify(texts, ctx.taxonomy);
  for (std::size_t i = 0; i < out.size() && i < labels.size(); ++i) {
    for (const auto& raw : labels[i]) {
      if (auto l = ctx.taxonomy.match(raw)) out[i].aspects.insert(*l);
      else if (ctx.warn) ctx.warn("dropping unknown aspect label '" + raw + "' in " + review.review_id);
    }
  }
  return out;
}

int soundness_aspect_count(const std::vector<Assertion>& assertions, const AspectTaxonomy& taxonomy) {
  int n = 0;
  for (const auto& a : assertions) {
    bool hit = false;
    for (const auto& l : a.aspects) hit = hit || taxonomy.soundness_subset.count(l) > 0;
    n += hit ? 1 : 0;
  }
  return n;
}

void to_json(json& j, const ReviewFeatures& f) {
  j = json{{"soundness_aspect_count", f.soundness_aspect_count},
           {"positive_share", f.positive_share ? json(*f.positive_share) : json(nullptr)},
           {"overall_score", f.overall_score ? json(*f.overall_score) : json(nullptr)}};
}

void from_json(const json& j, ReviewFeatures& f) {
  f.soundness_aspect_count = j.at("soundness_aspect_count").get<int>();
  f.positive_share = j.at("positive_share").is_null() ? std::nullopt
                                                      : std::optional<double>(j["positive_share"].get<double>());
  f.overall_score = j.at("overall_score").is_null() ? std::nullopt
                                                    : std::optional<double>(j["overall_score"].get<double>());
}

std::optional<double> positive_share(const std::vector<Assertion>& assertions, ShareDenominator mode) {
  std::size_t positive = 0, denominator = 0;
  for (const auto& a : assertions) {
    if (a.polarity == Polarity::Positive) ++positive;
    if (mode == ShareDenominator::AllAssertions || a.polarity != Polarity::Neutral) ++denominator;
  }
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(positive) / static_cast<double>(denominator);
}

ReviewFeatures compute_features(const std::vector<Assertion>& assertions, const ReviewReport& review,
                                const AspectTaxonomy& taxonomy, const std::string& overall_score_name,
                                ShareDenominator mode) {
  ReviewFeatures f;
  f.soundness_aspect_count = soundness_aspect_count(assertions, taxonomy);
  f.positive_share = positive_share(assertions, mode);
  if (review.parse_status != ParseStatus::RawOnly) f.overall_score = review.score(overall_score_name);
  return f;
}

void to_json(json& j, const ReviewDelta& d) {
  j = json{{"arg_name", d.arg_name},
           {"paper_id", d.paper_id},
           {"cf_id", d.cf_id},
           {"condition", to_string(d.condition)},
           {"aspect_delta", d.aspect_delta},
           {"sentiment_delta", d.sentiment_delta ? json(*d.sentiment_delta) : json(nullptr)},
           {"score_delta", d.score_delta ? json(*d.score_delta) : json(nullptr)}};
}

void from_json(const json& j, ReviewDelta& d) {
  d.arg_name = j.at("arg_name").get<std::string>();
  d.paper_id = j.at("paper_id").get<std::string>();
  d.cf_id = j.at("cf_id").get<std::string>();
  d.condition = condition_from_string(j.at("condition").get<std::string>());
  d.aspect_delta = j.at("aspect_delta").get<int>();
  d.sentiment_delta = j.at("sentiment_delta").is_null() ? std::nullopt
                                                        : std::optional<double>(j["sentiment_delta"].get<double>());
  d.score_delta = j.at("score_delta").is_null() ? std::nullopt : std::optional<double>(j["score_delta"].get<double>());
}

ReviewDelta review_delta(const ReviewFeatures& orig, const ReviewFeatures& cf, const DeltaMeta& meta) {
  ReviewDelta d;
  d.arg_name = meta.arg_name;
  d.paper_id = meta.paper_id;
  d.cf_id = meta.cf_id;
  d.condition = meta.condition;
  d.aspect_delta = cf.soundness_aspect_count - orig.soundness_aspect_count;
  if (orig.positive_share && cf.positive_share) d.sentiment_delta = *cf.positive_share - *orig.positive_share;
  if (orig.overall_score && cf.overall_score) d.score_delta = *cf.overall_score - *orig.overall_score;
  return d;
}

double rouge2(std::string_view a, std::string_view b) {
  const auto ta = text::split_whitespace(text::to_lower(a));
  const auto tb = text::split_whitespace(text::to_lower(b));
  auto bigrams = [](const std::vector<std::string>& t) {
    std::map<std::pair<std::string, std::string>, std::size_t> m;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) ++m[{t[i], t[i + 1]}];
    return m;
  };
  const auto ba = bigrams(ta), bb = bigrams(tb);
  const std::size_t na = ta.size() < 2 ? 0 : ta.size() - 1;
  const std::size_t nb = tb.size() < 2 ? 0 : tb.size() - 1;
  if (na == 0 || nb == 0) return (na == 0 && nb == 0 && ta == tb) ? 1.0 : 0.0;
  std::size_t overlap = 0;
  for (const auto& [g, count] : ba)
    if (auto it = bb.find(g); it != bb.end()) overlap += std::min(count, it->second);
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(na);
  const double r = static_cast<double>(overlap) / static_cast<double>(nb);
  return 2.0 * p * r / (p + r);
}

double assertion_jaccard(std::size_t size_a, std::size_t size_b,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (size_a == 0 && size_b == 0) return 1.0;
  std::set<std::size_t> used_a, used_b;
  std::size_t inter = 0;
  for (const auto& [i, j] : pairs) {
    if (i >= size_a || j >= size_b || used_a.count(i) || used_b.count(j)) continue;
    used_a.insert(i);
    used_b.insert(j);
    ++inter;
  }
  return static_cast<double>(inter) / static_cast<double>(size_a + size_b - inter);
}

std::vector<std::pair<std::size_t, std::size_t>> align_assertions(const std::vector<Assertion>& a,
                                                                  const std::vector<Assertion>& b, Gateway& gateway,
                                                                  const BackendProfile& profile) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<bool> taken_a(a.size(), false), taken_b(b.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto key = text::normalize_whitespace(text::to_lower(a[i].text));
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (taken_b[j] || text::normalize_whitespace(text::to_lower(b[j].text)) != key) continue;
      pairs.emplace_back(i, j);
      taken_a[i] = taken_b[j] = true;
      break;
    }
  }
  std::vector<std::size_t> rest_a, rest_b;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!taken_a[i]) rest_a.push_back(i);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (!taken_b[j]) rest_b.push_back(j);
  if (rest_a.empty() || rest_b.empty()) return pairs;

  std::string left, right;
  for (std::size_t k = 0; k < rest_a.size(); ++k) left += std::to_string(k) + ". " + a[rest_a[k]].text + "\n";
  for (std::size_t k = 0; k < rest_b.size(); ++k) right += std::to_string(k) + ". " + b[rest_b[k]].text + "\n";
  auto task = gateway.make_task("assert.align", {{"left", left}, {"right", right}}, "assert.align");
  const auto reply = gateway.complete_structured(task, profile);
  for (const auto& p : reply.at("pairs")) {
    const auto i = p.at(0).get<std::size_t>(), j = p.at(1).get<std::size_t>();
    if (i >= rest_a.size() || j >= rest_b.size() || taken_a[rest_a[i]] || taken_b[rest_b[j]]) continue;
    taken_a[rest_a[i]] = taken_b[rest_b[j]] = true;
    pairs.emplace_back(rest_a[i], rest_b[j]);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

SurfaceSimilarity surface_similarity(const ReviewReport& r1, const ReviewReport& r2, FeatureContext& ctx) {
  SurfaceSimilarity s;
  s.rouge2 = rouge2(r1.raw_text, r2.raw_text);
  const auto a = extract_assertions(r1, ctx);
  const auto b = extract_assertions(r2, ctx);
  s.assertion_jaccard = assertion_jaccard(a.size(), b.size(), align_assertions(a, b, ctx.gateway, ctx.profile));
  return s;
}

}  // namespace revlogic

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


#include "revlogic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/paper_model.hpp"
#include "revlogic/review_analysis.hpp"
#include "revlogic/rng.hpp"
#include "revlogic/text.hpp"

namespace revlogic::synthetic {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Transforms

namespace {

std::pair<std::string_view, std::string_view> split_final_period(std::string_view s) {
  if (!s.empty() && s.back() == '.') return {s.substr(0, s.size() - 1), s.substr(s.size() - 1)};
  return {s, {}};
}

}  // namespace

std::string swap_causal(std::string_view s) {
  constexpr std::string_view kVerb = " leads to ";
  const auto [body, tail] = split_final_period(s);
  const auto pos = body.find(kVerb);
  if (pos == std::string_view::npos) return std::string(s);
  std::string out(body.substr(pos + kVerb.size()));
  out += kVerb;
  out += body.substr(0, pos);
  out += tail;
  return out;
}

std::string association_to_cause(std::string_view s) {
  std::string out(s);
  out = text::replace_all(out, " are associated with ", " cause ");
  out = text::replace_all(out, " is associated with ", " causes ");
  return out;
}

std::string drop_condition(std::string_view s) {
  const auto pos = s.find(" when ");
  if (pos == std::string_view::npos) return std::string(s);
  auto end = s.find_first_of(".,;", pos);
  if (end == std::string_view::npos) end = s.size();
  return std::string(s.substr(0, pos)) + std::string(s.substr(end));
}

// ---------------------------------------------------------------------------
// Paper generator

namespace {

struct Topic {
  const char* task;
  const char* task_title;
  const char* d1;
  const char* d2;
};

constexpr Topic kTopics[] = {
    {"entity linking", "Entity Linking", "NewsLink", "WikiMentions"},
    {"sentiment classification", "Sentiment Classification", "ShopReviews", "FilmPolarity"},
    {"question answering", "Question Answering", "TriviaSet", "ScienceQA-Lite"},
    {"code summarization", "Code Summarization", "PyDocs", "JavaComments"},
    {"relation extraction", "Relation Extraction", "BioRel", "NewsRel"},
    {"dialogue state tracking", "Dialogue State Tracking", "HotelDialogs", "TravelTurns"},
    {"text simplification", "Text Simplification", "PlainNews", "EasyWiki"},
    {"named entity recognition", "Named Entity Recognition", "ClinicNER", "LegalNER"},
    {"semantic parsing", "Semantic Parsing", "GeoQueries", "AtisLite"},
    {"speech intent detection", "Speech Intent Detection", "VoiceCmd", "CallCenter"},
};

constexpr const char* kTechniques[] = {"label smoothing",        "contrastive pretraining", "curriculum sampling",
                                       "knowledge distillation", "noise-aware reweighting", "consistency training"};

constexpr char kConsonants[] = "bdfgklmnprstvz";
constexpr char kVowels[] = "aeiou";

std::string syllable(std::size_t i) {
  return {kConsonants[(i / 5) % 14], kVowels[i % 5]};
}

// Three syllables; the last two encode the index, so keys are distinct and
// equally long (no key is a substring of another).
std::string make_key(std::size_t index, SeededRng& rng) {
  std::string k = syllable(static_cast<std::size_t>(rng.below(70))) + syllable((index / 70) % 70) + syllable(index % 70);
  k[0] = static_cast<char>(k[0] - 'a' + 'A');
  return k;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

struct FindingText {
  std::string quote;
  std::string claim;
};

FindingText robustness_claim(int type, const std::string& key, const std::string& tech) {
  switch (type) {
    case 0: return {tech + " leads to higher robustness of " + key + " under label noise", "causal"};
    case 1: return {"the robustness of " + key + " is associated with the use of " + tech, "correlational"};
    default: return {key + " outperforms the baseline when the training labels contain noise", "conditional"};
  }
}

FindingText scaling_claim(int type, const std::string& key) {
  switch (type) {
    case 0: return {"more training data leads to higher accuracy of " + key, "causal"};
    case 1: return {"larger training sets are associated with higher accuracy of " + key, "correlational"};
    default: return {"the accuracy of " + key + " grows with the training set size when the labels are clean",
                     "conditional"};
  }
}

json anchor_in(const PaperDocument& doc, const std::string& quote) {
  for (const auto& b : doc.blocks)
    if (b.content.find(quote) != std::string::npos) return json{{"block_id", b.id}, {"quote", quote}};
  throw Error(ErrorCode::QuoteNotFound, "generator quote missing: " + quote);
}

json item(const PaperDocument& doc, const std::string& summary, std::initializer_list<std::string> quotes) {
  json anchors = json::array();
  for (const auto& q : quotes) anchors.push_back(anchor_in(doc, q));
  return json{{"summary", summary}, {"anchors", anchors}};
}

}  // namespace

GeneratedPaper generate_paper(std::size_t index, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, "paper/" + std::to_string(index)));
  const auto& topic = kTopics[rng.below(std::size(kTopics))];
  const std::string tech = kTechniques[rng.below(std::size(kTechniques))];
  const std::string key = make_key(index, rng);
  const std::string task = topic.task, d1 = topic.d1, d2 = topic.d2;

  const double v1 = 0.800 + static_cast<double>(rng.below(150)) / 1000.0;
  const double b1 = v1 - 0.020 - static_cast<double>(rng.below(40)) / 1000.0;
  const double v2 = 0.600 + static_cast<double>(rng.below(100)) / 1000.0;
  const double b2 = v2 - 0.020 - static_cast<double>(rng.below(40)) / 1000.0;
  const double drop = 2.0 + static_cast<double>(rng.below(70)) / 10.0;
  const int epochs = 10 + static_cast<int>(rng.below(20));
  const int pct = 10 * (1 + static_cast<int>(rng.below(5)));
  const int t1 = static_cast<int>(rng.below(3));
  const int t2 = static_cast<int>(rng.below(3));
  const bool third_empirical = rng.below(2) == 1;
  const bool swap_rank = rng.below(10) < 3;

  const auto f1 = robustness_claim(t1, key, tech);
  const auto f2 = scaling_claim(t2, key);
  const std::string f3 = third_empirical ? key + " trains faster than the baseline"
                                         : "an open-source implementation of " + key;

  const std::string sv1 = fmt3(v1), sb1 = fmt3(b1), sv2 = fmt3(v2), sb2 = fmt3(b2), sd = fmt1(drop);
  const std::string r1q = key + " reaches an accuracy of " + sv1 + " on " + d1;
  const std::string r2q = key + " obtains " + sv2;
  const std::string r3q = "the accuracy of " + key + " drops by " + sd + " points";
  const std::string c1q = "These results indicate that " + key + " generalizes better than the baseline under noisy supervision.";
  const std::string c2q = "The drop with less data suggests that the accuracy of " + key + " scales with the amount of training data.";
  const std::string goalq = "The goal of this work is to make " + task + " models robust to noisy supervision.";
  const std::string methodq = "We train " + key + " with " + tech + " on " + d1 + " and evaluate it on " + d1 + " and " +
                              d2 + " using accuracy.";

  std::string md;
  md += "# " + key + ": " + std::string(1, static_cast<char>(std::toupper(tech[0]))) + tech.substr(1) +
        " for Robust " + topic.task_title + "\n\n";
  md += "## Abstract\n\n";
  md += "We present " + key + ", a " + task + " system trained with " + tech + ". We observe that " + key +
        " is more robust than strong baselines on two benchmarks.\n\n";
  md += "## 1 Introduction\n\n";
  md += std::string(1, static_cast<char>(std::toupper(task[0]))) + task.substr(1) +
        " remains difficult when the training labels are noisy. " + goalq + "\n\n";
  md += "Our contributions are as follows. First, we show that " + f1.quote + ". Second, we find that " + f2.quote +
        ". Third, " + (third_empirical ? "we find that " + f3 : "we release " + f3) + ".\n\n";
  md += "## 2 Method\n\n";
  md += key + " builds on a pretrained transformer encoder. " + methodq + "\n\n";
  md += "We observe that training converges within " + std::to_string(epochs) + " epochs on a single GPU.\n\n";
  md += "## 3 Experiments\n\n";
  md += "We compare " + key + " with a fine-tuned baseline of the same size. The main results are summarized below.\n\n";
  md += "| Model | " + d1 + " | " + d2 + " |\n";
  md += "|---|---|---|\n";
  md += "| Baseline | " + sb1 + " | " + sb2 + " |\n";
  md += "| " + key + " | " + sv1 + " | " + sv2 + " |\n\n";
  md += "Table 1: Accuracy of " + key + " and the baseline on " + d1 + " and " + d2 + ".\n\n";
  md += r1q + ", compared with " + sb1 + " for the baseline.\n\n";
  md += "On " + d2 + ", " + r2q + " while the baseline obtains " + sb2 + ".\n\n";
  md += "When we train on " + std::to_string(pct) + "% of " + d1 + ", " + r3q + ".\n\n";
  md += "## 4 Discussion\n\n";
  md += c1q + "\n\n";
  md += c2q + "\n\n";
  md += "## 5 Conclusion\n\n";
  md += "We presented " + key + ". We observe that " + tech + " is a simple recipe for robust " + task + ".\n\n";
  md += "## Appendix A: Hyperparameters\n\n";
  md += "We train with a learning rate of 3e-5 and a batch size of 32 for " + std::to_string(epochs) + " epochs.\n";

  GeneratedPaper p;
  p.paper_id = "synth-" + std::string(index < 10 ? "00" : index < 100 ? "0" : "") + std::to_string(index);
  p.markdown = md;
  const auto doc = parse_markdown(md, p.paper_id, "synthetic");

  json contributions = json::array();
  auto contribution = [&](const std::string& quote, bool empirical, double relevance, const std::string& claim) {
    auto c = item(doc, quote + ".", {quote});
    c["empirical"] = empirical;
    c["relevance"] = relevance;
    c["claim"] = claim;
    contributions.push_back(c);
  };
  contribution(f1.quote, true, swap_rank ? 6 : 9, f1.claim);
  contribution(f2.quote, true, swap_rank ? 9 : 6, f2.claim);
  contribution(f3, third_empirical, 2, "none");

  json conclusions = json::array();
  auto c1 = item(doc, c1q, {c1q});
  c1["supports"] = {"f-1"};
  auto c2 = item(doc, c2q, {c2q});
  c2["supports"] = {"f-2"};
  conclusions.push_back(c1);
  conclusions.push_back(c2);

  json results = json::array();
  auto r1 = item(doc, r1q + ".", {r1q});
  r1["supports"] = {"c-1"};
  r1["values"] = json::array({json{{"old", sv1}, {"new", fmt3(v1 - 0.1)}}});
  auto r2 = item(doc, r2q + " on " + d2 + ".", {r2q});
  r2["supports"] = {"c-1"};
  r2["values"] = json::array({json{{"old", sv2}, {"new", fmt3(v2 - 0.1)}}});
  auto r3 = item(doc, r3q + " with " + std::to_string(pct) + "% of the data.", {r3q});
  r3["supports"] = {"c-2"};
  r3["values"] = json::array({json{{"old", sd}, {"new", "0.4"}}});
  results.push_back(r1);
  results.push_back(r2);
  results.push_back(r3);

  const std::string table_id = anchor_in(doc, "| Baseline |")["block_id"];
  json coreferences = json::array();
  coreferences.push_back(json{{"block", "r-1"}, {"anchors", json::array({json{{"block_id", table_id}, {"quote", sv1}}})}});
  coreferences.push_back(json{{"block", "r-2"}, {"anchors", json::array({json{{"block_id", table_id}, {"quote", sv2}}})}});

  p.truth = json{{"key", key},
                 {"paper_id", p.paper_id},
                 {"goal", item(doc, "Make " + task + " models such as " + key + " robust to noisy supervision.", {goalq})},
                 {"method", item(doc, key + " is trained with " + tech + " on " + d1 + " and evaluated on " + d1 + " and " +
                                          d2 + " with accuracy.",
                                 {methodq})},
                 {"contributions", contributions},
                 {"conclusions", conclusions},
                 {"results", results},
                 {"produces", {"r-1", "r-2", "r-3"}},
                 {"coreferences", coreferences},
                 {"hypothesis", key + " also halves the inference latency on mobile hardware."}};
  return p;
}

std::vector<GeneratedPaper> generate_corpus(std::size_t count, std::uint64_t seed) {
  std::vector<GeneratedPaper> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_paper(i, seed));
  return out;
}

void write_corpus(const std::vector<GeneratedPaper>& papers, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : papers) {
    std::ofstream md(dir / (p.paper_id + ".md"), std::ios::binary);
    md << p.markdown;
    std::ofstream truth(dir / (p.paper_id + ".truth.json"), std::ios::binary);
    truth << p.truth.dump(2) << "\n";
    if (!md || !truth) throw Error(ErrorCode::IoError, "cannot write corpus to " + dir.string());
  }
}

// ---------------------------------------------------------------------------
// World

namespace {

std::string user_text(const PromptTask& task) {
  std::string out;
  for (const auto& m : task.messages)
    if (m.role == "user") out += m.text;
  return out;
}

std::string between(std::string_view s, std::string_view start, std::string_view end) {
  auto a = s.find(start);
  if (a == std::string_view::npos) return {};
  a += start.size();
  auto b = end.empty() ? std::string_view::npos : s.find(end, a);
  if (b == std::string_view::npos) b = s.size();
  return std::string(s.substr(a, b - a));
}

std::string line_after(std::string_view s, std::string_view label) {
  return between(s, label, "\n");
}

// Paragraph-style payload: after the first blank line, before the final
// "Reply with JSON" instruction.
std::string payload(std::string_view s) {
  auto a = s.find("\n\n");
  a = a == std::string_view::npos ? 0 : a + 2;
  auto b = s.rfind("\n\nReply with JSON");
  if (b == std::string_view::npos || b < a) b = s.size();
  return std::string(s.substr(a, b - a));
}

std::vector<std::pair<std::string, std::string>> parse_values(std::string_view s) {
  std::vector<std::pair<std::string, std::string>> out;
  if (text::trim(s) == "none") return out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto semi = s.find(';', pos);
    if (semi == std::string_view::npos) semi = s.size();
    const auto part = s.substr(pos, semi - pos);
    const auto arrow = part.find("->");
    if (arrow != std::string_view::npos)
      out.emplace_back(std::string(text::trim(part.substr(0, arrow))), std::string(text::trim(part.substr(arrow + 2))));
    pos = semi + 1;
  }
  return out;
}

bool contains_any(std::string_view s, std::initializer_list<std::string_view> words) {
  for (auto w : words)
    if (s.find(w) != std::string_view::npos) return true;
  return false;
}

Polarity polarity_of(const std::string& sentence) {
  const auto s = text::to_lower(sentence);
  if (contains_any(s, {"concern", "unclear", "weak", "lack", "limited", "missing", "misses", "not ", "unsupported",
                       "fails", "insufficient", "could be improved", "questionable"}))
    return Polarity::Negative;
  if (contains_any(s, {"clear", "thorough", "convincing", "novel", "well ", "insightful", "useful", "strong",
                       "solid", "easy to follow", "simple to follow"}))
    return Polarity::Positive;
  return Polarity::Neutral;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& aspect_keywords() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> k = {
      {"soundness", {"sound", "unsupported", "evidence", "claim", "justif", "valid"}},
      {"experimental design", {"experiment", "benchmark", "baseline", "evaluation", "ablation"}},
      {"results", {"result", "gain", "accuracy", "improvement"}},
      {"analysis", {"analysis", "insight"}},
      {"methodology", {"method", "approach", "technique"}},
      {"clarity", {"clear", "written", "follow", "detail"}},
      {"novelty", {"novel", "original"}},
      {"related work", {"related work", "prior work", "recent approaches"}},
      {"presentation", {"presentation", "table", "figure"}},
      {"impact", {"useful", "community", "significance", "impact"}},
  };
  return k;
}

std::vector<std::string> numbered_items(std::string_view block) {
  std::vector<std::string> out;
  static const std::regex re(R"(^\s*\d+\.\s*(.*)$)");
  std::size_t pos = 0;
  while (pos < block.size()) {
    auto nl = block.find('\n', pos);
    if (nl == std::string_view::npos) nl = block.size();
    const std::string line(block.substr(pos, nl - pos));
    std::smatch m;
    if (std::regex_match(line, m, re)) out.push_back(m[1].str());
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto nl = s.find('\n', pos);
    if (nl == std::string_view::npos) nl = s.size();
    out.emplace_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

// "Name: content" with a one-word name.
bool field(const std::string& line, std::string* name, std::string* content) {
  static const std::regex re(R"(^\s*([A-Za-z]+)\s*:\s*(.*)$)");
  std::smatch m;
  if (!std::regex_match(line, m, re)) return false;
  *name = m[1].str();
  *content = m[2].str();
  return true;
}

bool is_score_content(const std::string& content) {
  const auto t = text::trim(content);
  return !t.empty() && (std::isdigit(static_cast<unsigned char>(t.front())) || text::istarts_with(t, "I would rate"));
}

constexpr const char* kPositive[] = {
    "The method is clearly described and easy to follow.", "The experiments are thorough and cover two benchmarks.",
    "The reported gains over the baseline are convincing.", "The approach is novel and well motivated.",
    "The analysis of the training dynamics is insightful.", "The paper is well written.",
    "The released implementation is useful for the community."};
constexpr const char* kNegative[] = {
    "The related work section misses several recent approaches.", "The evaluation is limited to two datasets.",
    "Some implementation details are unclear.", "The significance of the improvement is not discussed.",
    "The baseline selection is somewhat weak.", "The presentation of the tables could be improved."};
constexpr const char* kQuestions[] = {"How does the approach behave on out-of-domain data?",
                                      "Which hyperparameters matter most?",
                                      "How sensitive is the method to the noise level?"};

// Index in [0, n) not yet in `taken`.
std::size_t pick(SeededRng& rng, const std::vector<std::size_t>& taken, std::size_t n) {
  for (;;) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    if (std::find(taken.begin(), taken.end(), i) == taken.end()) return i;
  }
}

}  // namespace

void World::add_truth(json truth) {
  const auto key = truth.at("key").get<std::string>();
  truths_[key] = std::move(truth);
}

void World::load_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 11 && name.ends_with(".truth.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "truth file " + f.string() + " is not JSON");
    add_truth(std::move(j));
  }
}

const json* World::identify(std::string_view prompt) const {
  const json* best = nullptr;
  std::size_t best_pos = std::string_view::npos;
  for (const auto& [key, truth] : truths_) {
    const auto pos = prompt.find(key);
    if (pos != std::string_view::npos && pos < best_pos) {
      best_pos = pos;
      best = &truth;
    }
  }
  return best;
}

void World::install(MockBackend& backend) const {
  auto self = std::make_shared<const World>(*this);
  backend.set_default([self](const BackendProfile& p, const PromptTask& t) { return self->respond(p, t); });
}

std::shared_ptr<MockBackend> make_backend(const std::vector<std::filesystem::path>& truth_dirs) {
  World world;
  for (const auto& d : truth_dirs)
    if (std::filesystem::is_directory(d)) world.load_dir(d);
  auto backend = std::make_shared<MockBackend>();
  world.install(*backend);
  return backend;
}

std::string World::respond(const BackendProfile& profile, const PromptTask& task) const {
  const std::string& name = task.task_name;
  const std::string prompt = user_text(task);

  // Research-logic extraction straight from ground truth.
  if (name.starts_with("logic.")) {
    const json* truth = identify(prompt);
    if (!truth) return "I could not find this paper.";
    const json& t = *truth;
    auto plain = [](const json& it) { return json{{"summary", it.at("summary")}, {"anchors", it.at("anchors")}}; };
    if (name == "logic.goal") return plain(t.at("goal")).dump();
    if (name == "logic.method") return plain(t.at("method")).dump();
    if (name == "logic.contributions") {
      json cs = json::array();
      for (const auto& c : t.at("contributions")) {
        auto j = plain(c);
        j["empirical"] = c.at("empirical");
        cs.push_back(j);
      }
      return json{{"contributions", cs}}.dump();
    }
    if (name == "logic.rank") {
      json scores = json::array();
      int k = 0;
      for (const auto& c : t.at("contributions"))
        if (c.at("empirical").get<bool>())
          scores.push_back(json{{"id", "f-" + std::to_string(++k)}, {"relevance", c.value("relevance", 5.0)}});
      return json{{"scores", scores}}.dump();
    }
    if (name == "logic.conclusions" || name == "logic.results") {
      json items = json::array();
      for (const auto& c : t.at(name == "logic.conclusions" ? "conclusions" : "results")) items.push_back(plain(c));
      return json{{"items", items}}.dump();
    }
    if (name == "logic.link_conclusions" || name == "logic.link_results") {
      const bool concl = name == "logic.link_conclusions";
      json links = json::array();
      int k = 0;
      for (const auto& c : t.at(concl ? "conclusions" : "results"))
        links.push_back(json{{"child", std::string(concl ? "c-" : "r-") + std::to_string(++k)},
                             {"parents", c.value("supports", json::array())}});
      return json{{"links", links}}.dump();
    }
    if (name == "logic.link_method") return json{{"results", t.value("produces", json::array())}}.dump();
    if (name == "logic.coreferences")
      return json{{"coreferences", t.value("coreferences", json::array())}}.dump();
    throw Error(ErrorCode::ScriptMissing, "synthetic world has no answer for " + name);
  }

  if (name == "cf.classify") {
    const auto finding = line_after(prompt, "Finding: ");
    std::string claim;
    if (const json* t = identify(prompt))
      for (const auto& c : t->at("contributions"))
        if (c.at("summary").get<std::string>() == finding) claim = c.value("claim", "");
    if (claim.empty()) {
      if (contains_any(finding, {" leads to ", " causes "})) claim = "causal";
      else if (finding.find(" when ") != std::string::npos) claim = "conditional";
      else if (finding.find("associated with") != std::string::npos) claim = "correlational";
      else claim = "none";
    }
    return json{{"classes", claim == "none" ? json::array() : json::array({claim})}}.dump();
  }

  if (name.starts_with("cf.finding.")) {
    const auto finding = line_after(prompt, "Finding: ");
    std::string revised = finding;
    if (name == "cf.finding.causal") revised = swap_causal(finding);
    else if (name == "cf.finding.correlational") revised = association_to_cause(finding);
    else if (name == "cf.finding.conditional") revised = drop_condition(finding);
    return json{{"revised", revised}}.dump();
  }

  if (name == "cf.conclusion.hypothesis") {
    const json* t = identify(prompt);
    const std::string hyp = t ? t->value("hypothesis", "") : "";
    return json{{"hypothetical_result",
                 hyp.empty() ? "The method also halves the inference latency on mobile hardware." : hyp}}
        .dump();
  }

  if (name == "cf.conclusion") {
    const auto conclusion = line_after(prompt, "Conclusion: ");
    const auto finding = line_after(prompt, "Finding: ");
    const auto hyp = line_after(prompt, "Hypothetical result: ");
    return json{{"revised_conclusion", conclusion + " " + hyp},
                {"revised_finding", finding == "(none)" ? std::string() : finding + " " + hyp}}
        .dump();
  }

  if (name == "cf.result") {
    const auto result = line_after(prompt, "Result: ");
    json values = json::array();
    if (const json* t = identify(prompt))
      for (const auto& r : t->at("results"))
        if (r.at("summary").get<std::string>() == result) values = r.value("values", json::array());
    if (values.empty()) {
      static const std::regex num(R"(\b(\d+)\.(\d+)\b)");
      std::smatch m;
      const auto evidence = between(prompt, "Evidence: ", "\nConclusions");
      if (std::regex_search(evidence, m, num)) {
        const auto digits = m[2].str().size();
        const double v = std::stod(m[0].str()) * 0.9;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", static_cast<int>(digits), v);
        values.push_back(json{{"old", m[0].str()}, {"new", std::string(buf)}});
      }
    }
    std::string revised = result;
    for (const auto& v : values) revised = text::replace_all(revised, v.at("old").get<std::string>(), v.at("new").get<std::string>());
    return json{{"revised", revised}, {"values", values}}.dump();
  }

  if (name == "cf.table") {
    const auto table_id = between(prompt, "Table ", ":\n");
    const auto table = between(prompt, table_id + ":\n", "\n\nRevised result:");
    const auto values = parse_values(line_after(prompt, "Value changes: "));
    json cells = json::array();
    for (const auto& [old_v, new_v] : values)
      for (const auto& c : table_cells(table)) {
        const auto cell = text::trim(std::string_view(table).substr(c.start, c.end - c.start));
        if (cell == old_v) {
          cells.push_back(json{{"table_id", table_id}, {"row", c.row}, {"column", c.column}, {"old", old_v}, {"new", new_v}});
          break;
        }
      }
    return json{{"reasoning", "Rows are models and columns are datasets; the revised value sits in the method row."},
                {"cells", cells}}
        .dump();
  }

  if (name == "cf.project") {
    const auto original = line_after(prompt, "Original building block: ");
    const auto revised = line_after(prompt, "Revised building block: ");
    const auto values = parse_values(line_after(prompt, "Value changes: "));
    const auto passage = between(prompt, "Passage to rewrite:\n", "\n\nReply with JSON");
    std::string out = passage;
    if (revised.size() > original.size() && revised.starts_with(original)) {
      const auto suffix = revised.substr(original.size());
      if (!passage.empty() && passage.back() == '.') {
        out = passage + suffix;
      } else {
        auto s = suffix;
        while (!s.empty() && s.back() == '.') s.pop_back();
        out = passage + "," + " and" + s;
      }
    } else if (swap_causal(original) == revised && revised != original) {
      out = swap_causal(passage);
    } else if (association_to_cause(original) == revised && revised != original) {
      out = association_to_cause(passage);
    } else if (drop_condition(original) == revised && revised != original) {
      out = drop_condition(passage);
    } else {
      for (const auto& [o, n] : values) out = text::replace_all(out, o, n);
    }
    return json{{"replacement", out}}.dump();
  }

  if (name == "cf.judge") {
    if (between(prompt, "Edits:\n", "\n\nReply") == "(none)") return "fail,fail,fail,fail\nThe paper was not edited.";
    return "pass,pass,pass,pass\nThe edit breaks the stated building block and nothing else.";
  }

  if (name == "neutral.voice") {
    auto para = payload(prompt);
    const std::pair<const char*, const char*> swaps[] = {{"We observe that", "It is observed that"},
                                                         {"we observe that", "it is observed that"}};
    std::string out = para;
    for (const auto& [a, b] : swaps) out = text::replace_all(out, a, b);
    if (out == para)
      for (const auto& [a, b] : swaps) out = text::replace_all(out, b, a);
    return json{{"rewritten", out}}.dump();
  }

  if (name == "neutral.errors") {
    auto para = payload(prompt);
    SeededRng rng(derive_seed(static_cast<std::uint64_t>(profile.seed), para));
    std::vector<std::pair<std::size_t, std::size_t>> words;  // [start, end) of lowercase words >= 5 letters
    std::size_t i = 0;
    while (i < para.size()) {
      if (!std::isalpha(static_cast<unsigned char>(para[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      bool lower = true;
      while (j < para.size() && std::isalpha(static_cast<unsigned char>(para[j]))) {
        lower = lower && std::islower(static_cast<unsigned char>(para[j]));
        ++j;
      }
      if (lower && j - i >= 5) words.emplace_back(i, j);
      i = j;
    }
    for (auto k : rng.sample_indices(words.size(), 2)) {
      const auto [s, e] = words[k];
      const std::size_t at = s + 1 + static_cast<std::size_t>(rng.below(e - s - 3));
      std::swap(para[at], para[at + 1]);
    }
    return json{{"rewritten", para}}.dump();
  }

  if (name == "arg.generic" || name == "arg.guided") {
    std::string paper = between(prompt, "## Input Paper\n", name == "arg.guided" ? "\n\n## Reviewing Guidelines"
                                                                               : "\n\n## Reviewer Instructions");
    const auto tmpl = between(prompt, "Review Report\n", "\n\n## Evaluation Approach");
    std::string title = between(paper, "# ", "\n");
    const json* t = identify(paper);
    const std::string stable_key = (t ? t->at("key").get<std::string>() : title) + "/" + profile.model_name;
    SeededRng stable(derive_seed(0, "review/" + stable_key));
    const std::uint64_t noise = derive_seed(0, sha256_hex(paper) + profile.model_name);

    std::vector<std::size_t> pos_idx, neg_idx;
    for (int k = 0; k < 2; ++k) {
      pos_idx.push_back(pick(stable, pos_idx, std::size(kPositive)));
      neg_idx.push_back(pick(stable, neg_idx, std::size(kNegative)));
    }
    SeededRng noisy(noise);
    if (noise & 1) pos_idx.push_back(pick(noisy, pos_idx, std::size(kPositive)));
    if (noise & 2) neg_idx.push_back(pick(noisy, neg_idx, std::size(kNegative)));
    const int base_shift = static_cast<int>(stable.below(2));
    const int noise_shift = static_cast<int>((noise >> 2) % 3) - 1;

    std::string out = "-----\nReview Report\n";
    static const std::regex range(R"((\d+)\s*(?:-|to)\s*(\d+))");
    for (const auto& line : lines(tmpl)) {
      std::string fname, content;
      if (!field(line, &fname, &content)) continue;
      std::smatch m;
      if (std::regex_search(content, m, range)) {
        const int lo = std::stoi(m[1].str()), hi = std::stoi(m[2].str());
        const int v = std::clamp(lo + (hi - lo) / 2 + base_shift + noise_shift, std::min(lo + 2, hi), hi);
        if (name == "arg.guided" && fname == "Overall")
          out += fname + ": I would rate this paper " + std::to_string(v) + " out of " + std::to_string(hi) + ".\n";
        else
          out += fname + ": " + std::to_string(v) + "\n";
        continue;
      }
      std::string body;
      if (text::iequals(fname, "Summary")) {
        body = "The paper presents " + title + ". It reports accuracy on two benchmarks.";
      } else if (text::to_lower(fname).find("strength") != std::string::npos) {
        for (auto k : pos_idx) body += (body.empty() ? "" : " ") + std::string(kPositive[k]);
      } else if (text::to_lower(fname).find("weakness") != std::string::npos) {
        for (auto k : neg_idx) body += (body.empty() ? "" : " ") + std::string(kNegative[k]);
      } else {
        body = kQuestions[stable.below(std::size(kQuestions))];
      }
      out += fname + ": " + body + "\n";
    }
    return out;
  }

  if (name == "oracle.paraphrase") {
    const auto review = between(prompt, "change only the wording.\n\n", "");
    SeededRng rng(derive_seed(static_cast<std::uint64_t>(profile.seed), "paraphrase"));
    const std::pair<const char*, const char*> synonyms[] = {{"The paper presents", "This submission introduces"},
                                                            {"easy to follow", "simple to follow"},
                                                            {"somewhat", "rather"},
                                                            {"several", "a number of"},
                                                            {"It reports", "It documents"}};
    std::string out;
    for (const auto& line : lines(review)) {
      std::string fname, content;
      if (!field(line, &fname, &content) || is_score_content(content)) {
        out += line + "\n";
        continue;
      }
      auto sentences = text::split_sentences(content);
      std::vector<std::string> kept;
      for (const auto& s : sentences) {
        const bool droppable = !text::iequals(fname, "Summary") && sentences.size() > 1;
        if (droppable && rng.unit() < 0.25) continue;
        kept.push_back(s);
      }
      if (kept.empty()) kept.push_back(sentences.front());
      std::string body;
      for (auto s : kept) {
        for (const auto& [a, b] : synonyms) s = text::replace_all(s, a, b);
        body += (body.empty() ? "" : " ") + s;
      }
      out += fname + ": " + body + "\n";
    }
    while (out.size() > 1 && out.ends_with("\n\n")) out.pop_back();
    return out;
  }

  if (name == "review.parse") {
    const auto review = between(prompt, "Review:\n", "\n\nReply with JSON");
    const auto names_line = between(prompt, "each score (", ")");
    std::set<std::string> score_names;
    for (auto n : text::split_whitespace(text::replace_all(names_line, ",", " "))) score_names.insert(n);
    json sections = json::object(), scores = json::object();
    static const std::regex out_of(R"((\d+(?:\.\d+)?)\s+out\s+of)");
    static const std::regex lead(R"(^\s*(\d+(?:\.\d+)?))");
    for (const auto& line : lines(review)) {
      std::string fname, content;
      if (!field(line, &fname, &content)) continue;
      if (score_names.count(fname)) {
        std::smatch m;
        if (std::regex_search(content, m, out_of) || std::regex_search(content, m, lead))
          scores[fname] = std::stod(m[1].str());
      } else if (!content.empty()) {
        sections[fname] = content;
      }
    }
    return json{{"sections", sections}, {"scores", scores}}.dump();
  }

  if (name == "assert.extract") {
    const auto review = between(prompt, "Ignore headings and score lines.\n\n", "\n\nReply with JSON");
    json assertions = json::array();
    for (auto line : lines(review)) {
      auto t = std::string(text::trim(line));
      if (t.starts_with("- ") || t.starts_with("* ")) t = t.substr(2);
      if (t.empty() || t == "-----" || t == "Review Report") continue;
      std::string fname, content;
      if (field(t, &fname, &content)) {
        if (is_score_content(content)) continue;
        t = content;
      }
      for (const auto& s : text::split_sentences(t)) {
        const auto st = std::string(text::trim(s));
        if (!st.empty()) assertions.push_back(json{{"text", st}, {"polarity", to_string(polarity_of(st))}});
      }
    }
    return json{{"assertions", assertions}}.dump();
  }

  if (name == "assert.aspects") {
    const auto allowed_line = between(prompt, "Use only these labels: ", ". An assertion");
    std::set<std::string> allowed;
    std::size_t pos = 0;
    while (pos <= allowed_line.size()) {
      auto comma = allowed_line.find(',', pos);
      if (comma == std::string::npos) comma = allowed_line.size();
      allowed.insert(std::string(text::trim(std::string_view(allowed_line).substr(pos, comma - pos))));
      pos = comma + 1;
    }
    const auto listing = between(prompt, "zero, one, or several labels.\n\n", "\n\nReply with JSON");
    json labels = json::array();
    for (const auto& a : numbered_items(listing)) {
      const auto lower = text::to_lower(a);
      json row = json::array();
      for (const auto& [label, words] : aspect_keywords()) {
        if (!allowed.count(label)) continue;
        for (const auto& w : words)
          if (lower.find(w) != std::string::npos) {
            row.push_back(label);
            break;
          }
      }
      labels.push_back(row);
    }
    return json{{"labels", labels}}.dump();
  }

  if (name == "assert.align") {
    const auto left = numbered_items(between(prompt, "List A:\n", "\n\nList B:"));
    const auto right = numbered_items(between(prompt, "List B:\n", "\n\nReply with JSON"));
    auto tokens = [](const std::string& s) {
      auto v = text::split_whitespace(text::to_lower(s));
      return std::set<std::string>(v.begin(), v.end());
    };
    json pairs = json::array();
    std::vector<bool> used(right.size(), false);
    for (std::size_t i = 0; i < left.size(); ++i) {
      const auto a = tokens(left[i]);
      double best = 0.5;
      std::optional<std::size_t> best_j;
      for (std::size_t j = 0; j < right.size(); ++j) {
        if (used[j]) continue;
        const auto b = tokens(right[j]);
        std::size_t inter = 0;
        for (const auto& w : a) inter += b.count(w);
        const double jac = static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
        if (jac >= best) {
          best = jac;
          best_j = j;
        }
      }
      if (best_j) {
        used[*best_j] = true;
        pairs.push_back(json::array({i, *best_j}));
      }
    }
    return json{{"pairs", pairs}}.dump();
  }

  throw Error(ErrorCode::ScriptMissing, "synthetic world has no answer for " + name);
}

}  // namespace revlogic::synthetic

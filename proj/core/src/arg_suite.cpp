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


#include "revlogic/arg_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/rng.hpp"
#include "revlogic/text.hpp"

namespace revlogic {

using nlohmann::json;

std::string_view to_string(ArgKind k) {
  switch (k) {
    case ArgKind::ZeroGeneric: return "zero_generic";
    case ArgKind::ZeroGuided: return "zero_guided";
    case ArgKind::ExternalCmd: return "external_cmd";
    case ArgKind::Oracle: return "oracle";
  }
  return "zero_generic";
}

ArgKind arg_kind_from_string(std::string_view s) {
  for (auto k : {ArgKind::ZeroGeneric, ArgKind::ZeroGuided, ArgKind::ExternalCmd, ArgKind::Oracle})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ConfigError, "unknown ARG kind '" + std::string(s) + "'");
}

std::string_view to_string(ParseStatus s) {
  switch (s) {
    case ParseStatus::Full: return "full";
    case ParseStatus::PartialNoScores: return "partial_no_scores";
    case ParseStatus::RawOnly: return "raw_only";
  }
  return "raw_only";
}

ParseStatus parse_status_from_string(std::string_view s) {
  for (auto v : {ParseStatus::Full, ParseStatus::PartialNoScores, ParseStatus::RawOnly})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::SchemaViolation, "unknown parse status '" + std::string(s) + "'");
}

namespace {

// Name of a "Name: ..." line, or empty.
std::string field_name(std::string_view line) {
  static const std::regex re(R"(^\s*(?:#+\s*)?(?:[-*]\s+)?\**\s*([A-Za-z][A-Za-z /&-]*?)\s*\**\s*:\**(.*)$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, re)) return {};
  return m[1].str();
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto nl = s.find('\n', pos);
    out.push_back(s.substr(pos, nl == std::string_view::npos ? s.npos : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> VenueAssets::sections() const {
  std::vector<std::string> out;
  for (auto line : lines_of(review_template)) {
    auto name = field_name(line);
    if (name.empty() || score_ranges.count(name)) continue;
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

void VenueAssets::validate() const {
  std::vector<std::string> fields;
  for (auto line : lines_of(review_template))
    if (auto name = field_name(line); !name.empty()) fields.push_back(name);
  for (const auto& [name, range] : score_ranges) {
    if (std::find(fields.begin(), fields.end(), name) == fields.end())
      throw Error(ErrorCode::ConfigError, "venue " + venue + ": template lacks score field '" + name + "'");
    if (range.min > range.max) throw Error(ErrorCode::ConfigError, "venue " + venue + ": bad range for " + name);
  }
  if (!score_ranges.count(overall_score))
    throw Error(ErrorCode::ConfigError, "venue " + venue + ": overall score '" + overall_score + "' has no range");
}

void to_json(json& j, const VenueAssets& v) {
  json ranges = json::object();
  for (const auto& [name, r] : v.score_ranges) ranges[name] = {{"min", r.min}, {"max", r.max}, {"integer", r.integer}};
  j = json{{"venue", v.venue},
           {"description", v.description},
           {"guidelines", v.guidelines},
           {"review_template", v.review_template},
           {"score_ranges", ranges},
           {"overall_score", v.overall_score}};
}

void from_json(const json& j, VenueAssets& v) {
  v.venue = j.at("venue").get<std::string>();
  v.description = j.value("description", "");
  v.guidelines = j.value("guidelines", "");
  v.review_template = j.at("review_template").get<std::string>();
  v.score_ranges.clear();
  for (const auto& [name, r] : j.at("score_ranges").items())
    v.score_ranges[name] = ScoreRange{r.at("min").get<double>(), r.at("max").get<double>(), r.value("integer", true)};
  v.overall_score = j.value("overall_score", "Overall");
}

VenueAssets load_venue_assets(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read venue assets " + file.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "venue assets " + file.string() + " are not JSON");
  auto v = j.get<VenueAssets>();
  v.validate();
  return v;
}

void to_json(json& j, const ArgSpec& s) {
  j = json{{"name", s.name},       {"kind", to_string(s.kind)},     {"backend", s.backend},
           {"venue", s.venue_assets_id}, {"base_arg", s.base_arg}, {"reacts", s.reacts}};
  if (s.command_template) j["command"] = *s.command_template;
}

void from_json(const json& j, ArgSpec& s) {
  s = ArgSpec{};
  s.name = j.at("name").get<std::string>();
  s.kind = arg_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("backend")) s.backend = j["backend"].get<BackendProfile>();
  s.venue_assets_id = j.value("venue", "");
  if (j.contains("command")) s.command_template = j["command"].get<std::string>();
  s.base_arg = j.value("base_arg", "");
  s.reacts = j.value("reacts", true);
  if (s.kind == ArgKind::ExternalCmd && !s.command_template)
    throw Error(ErrorCode::ConfigError, "ARG " + s.name + ": external_cmd needs a command");
  if (s.kind == ArgKind::Oracle && s.base_arg.empty())
    throw Error(ErrorCode::ConfigError, "ARG " + s.name + ": oracle needs base_arg");
}

std::optional<double> ReviewReport::score(std::string_view name) const {
  auto it = scores.find(std::string(name));
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

void to_json(json& j, const ReviewReport& r) {
  j = json{{"review_id", r.review_id},   {"arg_name", r.arg_name}, {"paper_ref_id", r.paper_ref_id},
           {"raw_text", r.raw_text},     {"sections", r.sections}, {"scores", r.scores},
           {"parse_status", to_string(r.parse_status)}};
}

void from_json(const json& j, ReviewReport& r) {
  r.review_id = j.at("review_id").get<std::string>();
  r.arg_name = j.at("arg_name").get<std::string>();
  r.paper_ref_id = j.at("paper_ref_id").get<std::string>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.sections = j.at("sections").get<std::map<std::string, std::string>>();
  r.scores = j.at("scores").get<std::map<std::string, double>>();
  r.parse_status = parse_status_from_string(j.at("parse_status").get<std::string>());
}

// ---------------------------------------------------------------------------
// Truncation

std::size_t document_tokens(const PaperDocument& doc) { return text::estimate_tokens(render_markdown(doc)); }

namespace {

PaperDocument prefix_of(const PaperDocument& doc, const std::vector<std::size_t>& keep, std::size_t n) {
  PaperDocument out = doc;
  out.blocks.clear();
  for (std::size_t i = 0; i < n; ++i) out.blocks.push_back(doc.blocks[keep[i]]);
  if (!out.blocks.empty()) out.blocks.back().trailing = "\n";
  return out;
}

}  // namespace

PaperDocument truncate(const PaperDocument& doc, std::size_t window_tokens) {
  if (document_tokens(doc) <= window_tokens) return doc;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < doc.blocks.size(); ++i)
    if (!doc.blocks[i].is_appendix) keep.push_back(i);

  // Title and abstract are never removed.
  std::size_t protected_count = 0;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto& b = doc.blocks[keep[k]];
    if (b.kind == BlockKind::Heading && b.heading_level == 1 && b.content.find(doc.title) != std::string::npos) {
      protected_count = k + 1;
      continue;
    }
    if (!doc.abstract.empty() && b.content.find(text::trim(doc.abstract).substr(0, 40)) != std::string::npos) {
      protected_count = k + 1;
      break;
    }
  }
  if (document_tokens(prefix_of(doc, keep, protected_count)) > window_tokens)
    throw Error(ErrorCode::WindowTooSmall, "title and abstract of " + doc.paper_id + " exceed " +
                                               std::to_string(window_tokens) + " tokens");

  // Largest fitting prefix (token estimate is monotone in the prefix length).
  std::size_t lo = protected_count, hi = keep.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (document_tokens(prefix_of(doc, keep, mid)) <= window_tokens) lo = mid;
    else hi = mid - 1;
  }
  PaperDocument out = prefix_of(doc, keep, lo);

  // Cut into the next text block at a word boundary when room remains.
  if (lo > 0 && lo < keep.size() && doc.blocks[keep[lo]].kind == BlockKind::Text) {
    const auto& next = doc.blocks[keep[lo]];
    auto with_cut = [&](std::size_t len) {
      PaperDocument trial = out;
      trial.blocks.back().trailing = doc.blocks[keep[lo - 1]].trailing;
      Block cut = next;
      cut.content = next.content.substr(0, len);
      cut.trailing = "\n";
      trial.blocks.push_back(std::move(cut));
      return trial;
    };
    std::vector<std::size_t> cuts;
    for (std::size_t i = 1; i < next.content.size(); ++i)
      if (text::is_space(next.content[i]) && !text::is_space(next.content[i - 1])) cuts.push_back(i);
    std::size_t a = 0, b = cuts.size();
    while (a < b) {
      const std::size_t mid = (a + b + 1) / 2;
      if (document_tokens(with_cut(cuts[mid - 1])) <= window_tokens) a = mid;
      else b = mid - 1;
    }
    if (a > 0) out = with_cut(cuts[a - 1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompting

PromptTask review_prompt(ArgKind kind, const VenueAssets& venue, const PaperDocument& doc, const Gateway& gateway) {
  if (kind != ArgKind::ZeroGeneric && kind != ArgKind::ZeroGuided)
    throw Error(ErrorCode::PreconditionViolated, "review_prompt needs a zero-shot ARG kind");
  TemplateParams params{{"venue", venue.venue},
                        {"venue_description", venue.description},
                        {"paper", render_markdown(doc)},
                        {"template", venue.review_template}};
  if (kind == ArgKind::ZeroGuided) {
    if (text::trim(venue.guidelines).empty())
      throw Error(ErrorCode::ConfigError, "venue " + venue.venue + " has no reviewing guidelines");
    params["venue_guidelines"] = venue.guidelines;
  }
  return gateway.make_task(kind == ArgKind::ZeroGuided ? "arg.guided" : "arg.generic", std::move(params),
                           std::nullopt, "arg.system");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::optional<double> leading_number(std::string_view s) {
  static const std::regex re(R"(^[\s*_]*([0-9]+(?:\.[0-9]+)?))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(s.begin(), s.end(), m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

std::optional<double> json_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return leading_number(v.get<std::string>());
  return std::nullopt;
}

bool in_range(double value, const ScoreRange& r) {
  if (!std::isfinite(value) || value < r.min || value > r.max) return false;
  return !r.integer || std::floor(value) == value;
}

}  // namespace

ParsedReview parse_review(std::string_view raw, const VenueAssets& venue, Gateway* gateway,
                          const BackendProfile& profile) {
  ParsedReview out;
  const auto section_names = venue.sections();
  auto canonical = [&](const std::string& name) -> std::optional<std::string> {
    for (const auto& s : section_names)
      if (text::iequals(s, name)) return s;
    for (const auto& [s, r] : venue.score_ranges)
      if (text::iequals(s, name)) return s;
    return std::nullopt;
  };

  std::map<std::string, std::string> fields;
  std::optional<std::string> current;
  for (auto line : lines_of(raw)) {
    const auto name = field_name(line);
    if (auto key = name.empty() ? std::nullopt : canonical(name)) {
      current = *key;
      const auto colon = line.find(':');
      auto rest = line.substr(colon + 1);
      while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
      fields[*current] = std::string(text::trim(rest));
      continue;
    }
    if (current) {
      auto& f = fields[*current];
      if (!f.empty() || !text::trim(line).empty()) f += (f.empty() ? "" : "\n") + std::string(line);
    }
  }
  for (auto& [k, v] : fields) v = std::string(text::trim(v));

  for (const auto& s : section_names)
    if (fields.count(s) && !fields[s].empty()) out.sections[s] = fields[s];
  std::map<std::string, double> scores;
  for (const auto& [name, range] : venue.score_ranges)
    if (fields.count(name))
      if (auto v = leading_number(fields[name])) scores[name] = *v;

  const bool incomplete = out.sections.empty() || scores.size() < venue.score_ranges.size();
  if (incomplete && gateway && !text::trim(raw).empty()) {
    std::string names;
    for (const auto& [name, r] : venue.score_ranges) names += (names.empty() ? "" : ", ") + name;
    try {
      auto task = gateway->make_task(
          "review.parse", {{"template", venue.review_template}, {"score_names", names}, {"review", std::string(raw)}},
          "review.parse");
      const auto reply = gateway->complete_structured(task, profile);
      if (out.sections.empty())
        for (const auto& [k, v] : reply.at("sections").items())
          if (auto key = canonical(k); key && v.is_string() && !text::trim(v.get<std::string>()).empty())
            out.sections[*key] = v.get<std::string>();
      for (const auto& [k, v] : reply.at("scores").items())
        if (auto key = canonical(k); key && venue.score_ranges.count(*key) && !scores.count(*key))
          if (auto num = json_number(v)) scores[*key] = *num;
    } catch (const Error&) {
      // The pattern pass result stands.
    }
  }

  for (const auto& [name, value] : scores)
    if (in_range(value, venue.score_ranges.at(name))) out.scores[name] = value;

  if (out.sections.empty()) {
    out.scores.clear();
    out.status = ParseStatus::RawOnly;
  } else if (out.scores.size() == venue.score_ranges.size()) {
    out.status = ParseStatus::Full;
  } else {
    out.status = ParseStatus::PartialNoScores;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) c = '_';
  return s;
}

ReviewReport finish(const ArgSpec& spec, const std::string& paper_ref_id, std::string raw, ReviewContext& ctx) {
  ReviewReport r;
  r.review_id = spec.name + "/" + paper_ref_id;
  r.arg_name = spec.name;
  r.paper_ref_id = paper_ref_id;
  r.raw_text = std::move(raw);
  auto parsed = parse_review(r.raw_text, ctx.venue, &ctx.gateway, ctx.parse_profile);
  r.sections = std::move(parsed.sections);
  r.scores = std::move(parsed.scores);
  r.parse_status = parsed.status;
  return r;
}

}  // namespace

ReviewReport generate_review(const ArgSpec& spec, const PaperDocument& doc, const std::string& paper_ref_id,
                             ReviewContext& ctx) {
  switch (spec.kind) {
    case ArgKind::ZeroGeneric:
    case ArgKind::ZeroGuided: {
      BackendProfile profile = spec.backend;
      profile.temperature = 0.0;
      const auto body = without_appendix(doc);
      // Budget: window minus reply and the prompt scaffold around the paper.
      PaperDocument empty = body;
      empty.blocks.clear();
      const auto scaffold = review_prompt(spec.kind, ctx.venue, empty, ctx.gateway);
      std::size_t overhead = static_cast<std::size_t>(std::max(profile.max_output_tokens, 0)) + 16;
      for (const auto& m : resolve_messages(scaffold)) overhead += text::estimate_tokens(m.text);
      const auto window = static_cast<std::size_t>(profile.context_window_tokens);
      if (overhead >= window)
        throw Error(ErrorCode::WindowTooSmall, "ARG " + spec.name + ": prompt overhead exceeds the context window");
      const auto fitted = truncate(body, window - overhead);
      const auto raw = ctx.gateway.complete(review_prompt(spec.kind, ctx.venue, fitted, ctx.gateway), profile);
      return finish(spec, paper_ref_id, raw, ctx);
    }
    case ArgKind::ExternalCmd: {
      std::filesystem::create_directories(ctx.scratch_dir);
      const auto stem = safe_name(spec.name + "__" + paper_ref_id);
      const auto paper_path = ctx.scratch_dir / (stem + ".md");
      const auto output_path = ctx.scratch_dir / (stem + ".review.txt");
      const auto err_path = ctx.scratch_dir / (stem + ".stderr");
      {
        std::ofstream out(paper_path, std::ios::binary);
        out << render_markdown(doc);
      }
      std::filesystem::remove(output_path);
      TemplateParams params{{"paper", shell_quote(paper_path.string())}, {"output", shell_quote(output_path.string())}};
      const auto command = "{ " + substitute(*spec.command_template, params) + "\n} 2> " + shell_quote(err_path.string());
      const int status = std::system(command.c_str());
      if (status != 0) {
        auto err = read_file(err_path);
        throw Error(ErrorCode::ExternalCommandFailed,
                    "ARG " + spec.name + " exited with status " + std::to_string(status) + ": " + err);
      }
      if (!std::filesystem::exists(output_path))
        throw Error(ErrorCode::ExternalCommandFailed, "ARG " + spec.name + " wrote no review to " + output_path.string());
      return finish(spec, paper_ref_id, read_file(output_path), ctx);
    }
    case ArgKind::Oracle:
      throw Error(ErrorCode::PreconditionViolated, "oracle ARG " + spec.name + " reviews through oracle_review");
  }
  throw Error(ErrorCode::PreconditionViolated, "unknown ARG kind");
}

int oracle_score_drop(std::uint64_t seed, std::string_view cf_id) {
  SeededRng rng(derive_seed(seed, std::string("oracle-drop/") + std::string(cf_id)));
  return 1 + static_cast<int>(rng.below(2));
}

std::string oracle_comment(const Counterfactual& cf) {
  std::string what;
  switch (cf.op) {
    case CfOperator::FindingEdit:
      what = "the main finding claims more than the conclusions of the paper support";
      break;
    case CfOperator::ConclusionEdit:
      what = "a conclusion relies on a result that no experiment in the paper reports";
      break;
    case CfOperator::ResultEdit:
      what = "the reported results do not support the conclusions drawn from them";
      break;
    default:
      what = "the research logic has a gap";
      break;
  }
  std::string statement = cf.revised_block_text.value_or("");
  if (statement.size() > 160) statement = statement.substr(0, 157) + "...";
  std::string comment = "Soundness concern: " + what + ".";
  if (!statement.empty()) comment += " This affects the statement \"" + statement + "\".";
  comment += " The claim is unsupported by the evidence and weakens the soundness of the paper.";
  return comment;
}

ReviewReport oracle_review(const ReviewReport& original, const Counterfactual& cf, const ArgSpec& spec,
                           std::uint64_t seed, ReviewContext& ctx) {
  if (text::trim(original.raw_text).empty())
    throw Error(ErrorCode::MissingOriginalReview, "no original review for " + cf.paper_id);

  BackendProfile profile = spec.backend;
  profile.seed = static_cast<std::int64_t>(derive_seed(seed, "oracle-paraphrase/" + cf.cf_id) >> 1);
  auto task = ctx.gateway.make_task("oracle.paraphrase", {{"review", original.raw_text}});
  std::string raw = ctx.gateway.complete(task, profile);

  std::map<std::string, double> scores = original.scores;
  const bool react = spec.reacts && cf.condition == Condition::Critical;
  if (react) {
    const auto comment = oracle_comment(cf);
    static const std::regex weak(R"((^|\n)([#*\s]*Weaknesses[*\s]*:[^\n]*))", std::regex::icase);
    std::smatch m;
    if (std::regex_search(raw, m, weak)) {
      const auto insert_at = static_cast<std::size_t>(m.position(2) + m.length(2));
      raw.insert(insert_at, "\n- " + comment);
    } else {
      raw += "\n\n" + comment + "\n";
    }
    const auto& overall = ctx.venue.overall_score;
    if (auto it = scores.find(overall); it != scores.end()) {
      const double floor = ctx.venue.score_ranges.at(overall).min;
      const double lowered = std::max(floor, it->second - oracle_score_drop(seed, cf.cf_id));
      it->second = lowered;
      const std::regex line("(^|\\n)[#*\\s]*" + overall + "[*\\s]*:[*\\s]*([0-9]+(\\.[0-9]+)?)",
                            std::regex::icase);
      std::ostringstream value;
      value << lowered;
      std::smatch sm;
      if (std::regex_search(raw, sm, line))
        raw.replace(static_cast<std::size_t>(sm.position(2)), static_cast<std::size_t>(sm.length(2)), value.str());
    }
  }

  ReviewReport r;
  r.review_id = spec.name + "/" + cf.cf_id;
  r.arg_name = spec.name;
  r.paper_ref_id = cf.cf_id;
  r.raw_text = std::move(raw);
  auto parsed = parse_review(r.raw_text, ctx.venue, nullptr, ctx.parse_profile);
  r.sections = std::move(parsed.sections);
  r.scores = scores;
  r.parse_status = r.sections.empty() ? ParseStatus::RawOnly
                   : scores.size() == ctx.venue.score_ranges.size() ? ParseStatus::Full
                                                                     : ParseStatus::PartialNoScores;
  if (r.parse_status == ParseStatus::RawOnly) r.scores.clear();
  return r;
}

}  // namespace revlogic

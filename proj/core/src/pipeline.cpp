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


#include "revlogic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "revlogic/digest.hpp"
#include "revlogic/error.hpp"
#include "revlogic/paper_model.hpp"
#include "revlogic/research_logic.hpp"
#include "revlogic/synthetic.hpp"
#include "revlogic/text.hpp"

namespace revlogic {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw Error(ErrorCode::ConfigError, what + " " + p.string() + " does not exist");
}

BackendProfile role_profile(const json& profiles, const char* role) {
  json merged = profiles.value("default", json::object());
  if (profiles.contains(role)) merged.merge_patch(profiles.at(role));
  if (merged.empty()) throw Error(ErrorCode::ConfigError, std::string("no backend profile for role ") + role);
  return merged.get<BackendProfile>();
}

std::string_view share_name(ShareDenominator d) { return d == ShareDenominator::Polar ? "polar" : "all"; }
std::string_view sd_name(SdMode m) { return m == SdMode::PerPaperMean ? "per_paper_mean" : "per_counterfactual"; }
std::string_view errors_name(LanguageErrorMode m) { return m == LanguageErrorMode::Rules ? "rules" : "llm"; }

}  // namespace

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    c.corpus_dir = resolve(base_dir, j.at("corpus_dir").get<std::string>());
    c.workspace_dir = resolve(base_dir, j.at("workspace_dir").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    c.venue = j.value("venue", "");
    const json profiles = j.value("profiles", json::object());
    c.profiles.extraction = role_profile(profiles, "extraction");
    c.profiles.perturbation = role_profile(profiles, "perturbation");
    c.profiles.judging = role_profile(profiles, "judging");
    c.profiles.features = role_profile(profiles, "features");

    const json venues = j.value("venues", json::object());
    for (const auto& [id, path] : venues.items())
      c.venues[id] = resolve(base_dir, path.get<std::string>());
    for (auto a : j.value("args", json::array())) {
      if (!a.contains("backend") && profiles.contains("default")) a["backend"] = profiles["default"];
      c.args.push_back(a.get<ArgSpec>());
    }
    if (j.contains("taxonomy") && !j["taxonomy"].is_null()) c.taxonomy = resolve(base_dir, j["taxonomy"]);
    if (j.contains("aspect_labels") && !j["aspect_labels"].is_null())
      c.aspect_labels = resolve(base_dir, j["aspect_labels"]);
    if (j.contains("prompts_dir") && !j["prompts_dir"].is_null()) c.prompts_dir = resolve(base_dir, j["prompts_dir"]);
    for (const auto& d : j.value("mock_truth_dirs", json::array()))
      c.mock_truth_dirs.push_back(resolve(base_dir, d.get<std::string>()));
    if (c.mock_truth_dirs.empty()) c.mock_truth_dirs.push_back(c.corpus_dir);
    c.concurrency = std::max<std::size_t>(1, j.value("concurrency", std::size_t{1}));
    c.max_attempts = j.value("max_attempts", 3);
    c.cache = j.value("cache", true);

    const auto share = j.value("share_denominator", "all");
    if (share == "all") c.share_denominator = ShareDenominator::AllAssertions;
    else if (share == "polar") c.share_denominator = ShareDenominator::Polar;
    else throw Error(ErrorCode::ConfigError, "share_denominator must be all or polar");
    const auto sd = j.value("sd_mode", "per_counterfactual");
    if (sd == "per_counterfactual") c.sd_mode = SdMode::PerCounterfactual;
    else if (sd == "per_paper_mean") c.sd_mode = SdMode::PerPaperMean;
    else throw Error(ErrorCode::ConfigError, "sd_mode must be per_counterfactual or per_paper_mean");
    const auto le = j.value("language_errors", "llm");
    if (le == "llm") c.language_errors = LanguageErrorMode::Llm;
    else if (le == "rules") c.language_errors = LanguageErrorMode::Rules;
    else throw Error(ErrorCode::ConfigError, "language_errors must be llm or rules");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }

  require_exists(c.corpus_dir, "corpus_dir");
  for (const auto& [id, path] : c.venues) require_exists(path, "venue asset");
  if (c.taxonomy) require_exists(*c.taxonomy, "taxonomy");
  if (c.aspect_labels) require_exists(*c.aspect_labels, "aspect label file");
  if (c.prompts_dir) require_exists(*c.prompts_dir, "prompts_dir");
  if (c.max_attempts < 1) throw Error(ErrorCode::ConfigError, "max_attempts must be at least 1");

  std::set<std::string> names;
  for (const auto& a : c.args) {
    if (a.name.empty() || a.name.find('/') != std::string::npos)
      throw Error(ErrorCode::ConfigError, "ARG names must be non-empty and contain no '/'");
    if (!names.insert(a.name).second) throw Error(ErrorCode::ConfigError, "duplicate ARG " + a.name);
    if (!c.venues.count(a.venue_assets_id))
      throw Error(ErrorCode::ConfigError, "ARG " + a.name + " names unknown venue '" + a.venue_assets_id + "'");
  }
  for (const auto& a : c.args) {
    if (a.kind != ArgKind::Oracle) continue;
    auto base = std::find_if(c.args.begin(), c.args.end(), [&](const auto& b) { return b.name == a.base_arg; });
    if (base == c.args.end() || base->kind == ArgKind::Oracle)
      throw Error(ErrorCode::ConfigError, "oracle " + a.name + " needs a non-oracle base ARG, got '" + a.base_arg + "'");
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + file.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "config " + file.string() + " is not JSON");
  return config_from_json(j, fs::absolute(file).parent_path());
}

json to_json(const RunConfig& c) {
  json args = json::array();
  for (const auto& a : c.args) args.push_back(a);
  json venues = json::object();
  for (const auto& [id, p] : c.venues) venues[id] = p.generic_string();
  json truth = json::array();
  for (const auto& d : c.mock_truth_dirs) truth.push_back(d.generic_string());
  auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); };
  return json{{"corpus_dir", c.corpus_dir.generic_string()},
              {"workspace_dir", c.workspace_dir.generic_string()},
              {"seed", c.seed},
              {"venue", c.venue},
              {"profiles",
               {{"extraction", c.profiles.extraction},
                {"perturbation", c.profiles.perturbation},
                {"judging", c.profiles.judging},
                {"features", c.profiles.features}}},
              {"args", args},
              {"venues", venues},
              {"taxonomy", opt(c.taxonomy)},
              {"aspect_labels", opt(c.aspect_labels)},
              {"prompts_dir", opt(c.prompts_dir)},
              {"mock_truth_dirs", truth},
              {"concurrency", c.concurrency},
              {"share_denominator", share_name(c.share_denominator)},
              {"sd_mode", sd_name(c.sd_mode)},
              {"language_errors", errors_name(c.language_errors)},
              {"max_attempts", c.max_attempts},
              {"cache", c.cache}};
}

std::string config_digest(const RunConfig& c) {
  auto j = to_json(c);
  j.erase("workspace_dir");
  j.erase("concurrency");
  j.erase("cache");
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Manifest

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Perturb: return "perturb";
    case Stage::Review: return "review";
    case Stage::Analyze: return "analyze";
    case Stage::Report: return "report";
  }
  return "ingest";
}

Stage stage_from_string(std::string_view s) {
  for (auto st : {Stage::Ingest, Stage::Perturb, Stage::Review, Stage::Analyze, Stage::Report})
    if (to_string(st) == s) return st;
  throw Error(ErrorCode::ConfigError, "unknown stage '" + std::string(s) + "'");
}

std::string_view to_string(ItemState s) {
  switch (s) {
    case ItemState::Done: return "done";
    case ItemState::Skipped: return "skipped";
    case ItemState::Failed: return "failed";
  }
  return "failed";
}

namespace {

ItemState item_state_from_string(std::string_view s) {
  if (s == "done") return ItemState::Done;
  if (s == "skipped") return ItemState::Skipped;
  if (s == "failed") return ItemState::Failed;
  throw Error(ErrorCode::ConfigError, "unknown item state '" + std::string(s) + "'");
}

}  // namespace

RunManifest::RunManifest(const fs::path& workspace, const std::string& digest) : file_(workspace / "manifest.jsonl") {
  fs::create_directories(workspace);
  run_id_ = digest.substr(0, 16);
  if (fs::exists(file_)) {
    std::ifstream in(file_);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;  // torn final line of an interrupted write
      const auto type = j.value("type", "");
      if (type == "run") {
        header = true;
        if (j.value("config_digest", "") != digest)
          throw Error(ErrorCode::ConfigMismatch,
                      "workspace " + workspace.string() + " belongs to a run with a different configuration");
      } else if (type == "item") {
        ItemStatus s{stage_from_string(j.at("stage").get<std::string>()), j.at("item").get<std::string>(),
                     item_state_from_string(j.at("state").get<std::string>()), j.value("reason", "")};
        latest_[{s.stage, s.item}] = s;
      } else if (type == "stage") {
        complete_[stage_from_string(j.at("stage").get<std::string>())] = j.value("state", "") == "complete";
      }
    }
    if (header) return;
  }
  append(json{{"type", "run"}, {"run_id", run_id_}, {"config_digest", digest}});
}

void RunManifest::append(const json& line) {
  std::ofstream out(file_, std::ios::app | std::ios::binary);
  out << line.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + file_.string());
}

std::optional<ItemStatus> RunManifest::status(Stage stage, std::string_view item) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find({stage, std::string(item)});
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::vector<ItemStatus> RunManifest::items(Stage stage) const {
  std::lock_guard lock(mu_);
  std::vector<ItemStatus> out;
  for (const auto& [key, s] : latest_)
    if (key.first == stage) out.push_back(s);
  return out;
}

bool RunManifest::stage_complete(Stage stage) const {
  std::lock_guard lock(mu_);
  auto it = complete_.find(stage);
  return it != complete_.end() && it->second;
}

void RunManifest::record(const ItemStatus& s) {
  std::lock_guard lock(mu_);
  latest_[{s.stage, s.item}] = s;
  append(json{{"type", "item"},
              {"stage", to_string(s.stage)},
              {"item", s.item},
              {"state", to_string(s.state)},
              {"reason", s.reason}});
}

void RunManifest::complete_stage(Stage stage) {
  std::lock_guard lock(mu_);
  complete_[stage] = true;
  append(json{{"type", "stage"}, {"stage", to_string(stage)}, {"state", "complete"}});
}

// ---------------------------------------------------------------------------
// Backends

RoutingBackend::RoutingBackend(std::shared_ptr<ChatBackend> mock, std::shared_ptr<ChatBackend> http)
    : mock_(std::move(mock)), http_(std::move(http)) {}

std::string RoutingBackend::chat(const BackendProfile& profile, const PromptTask& task) {
  if (profile.endpoint_url.starts_with("mock://")) {
    if (!mock_) throw Error(ErrorCode::ConfigError, "no mock backend for " + profile.endpoint_url);
    return mock_->chat(profile, task);
  }
  return http_->chat(profile, task);
}

// ---------------------------------------------------------------------------
// Pipeline

Stage producing_stage(const fs::path& rel) {
  const auto top = rel.begin()->string();
  if (top == "documents") return Stage::Ingest;
  if (top == "logic" || top == "cfs") return Stage::Perturb;
  if (top == "reviews") return Stage::Review;
  return Stage::Analyze;
}


namespace {

std::string item_reason(const Error& e) { return std::string(to_string(e.code())) + ": " + e.what(); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}


}  // namespace

Pipeline::Pipeline(RunConfig config, RunOptions options) : config_(std::move(config)), options_(std::move(options)) {
  manifest_ = std::make_unique<RunManifest>(config_.workspace_dir, config_digest(config_));

  auto backend = options_.backend;
  if (!backend)
    backend = std::make_shared<RoutingBackend>(synthetic::make_backend(config_.mock_truth_dirs),
                                               std::make_shared<HttpChatBackend>());
  GatewayOptions gopts;
  if (config_.cache) gopts.cache_dir = config_.workspace_dir / "cache";
  auto prompts = std::make_shared<PromptLibrary>();
  if (config_.prompts_dir) prompts->load_dir(*config_.prompts_dir);
  gopts.prompts = prompts;
  gopts.keep_audit_in_memory = false;
  gateway_ = std::make_unique<Gateway>(std::move(backend), std::move(gopts));
  const auto prompt_log = config_.workspace_dir / "prompts.jsonl";
  gateway_->set_audit_sink([this, prompt_log](const AuditRecord& r) {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back(json{{"role", m.role}, {"text", m.text}});
    const auto line = json{{"task", r.task_name},
                           {"cache_key", r.cache_key},
                           {"from_cache", r.from_cache},
                           {"messages", messages},
                           {"response", r.response}}
                          .dump();
    std::lock_guard lock(prompt_log_mu_);
    std::ofstream out(prompt_log, std::ios::app | std::ios::binary);
    out << line << "\n";
  });

  for (const auto& [id, path] : config_.venues) venues_[id] = load_venue_assets(path);
  taxonomy_ = config_.taxonomy ? load_taxonomy(*config_.taxonomy) : AspectTaxonomy::default_taxonomy();
  for (const auto& a : config_.args)
    if (a.kind == ArgKind::ExternalCmd) external_locks_[a.name] = std::make_unique<std::mutex>();
}

std::vector<std::pair<Stage, fs::path>> Pipeline::reads() const {
  std::lock_guard lock(reads_mu_);
  return reads_;
}

json Pipeline::read_json(Stage stage, const fs::path& rel) const {
  {
    std::lock_guard lock(reads_mu_);
    reads_.emplace_back(stage, rel);
  }
  auto j = json::parse(read_text(config_.workspace_dir / rel), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::IoError, "corrupt workspace file " + rel.string());
  return j;
}

bool Pipeline::exists(const fs::path& rel) const { return fs::exists(config_.workspace_dir / rel); }

void Pipeline::write_file(const fs::path& rel, std::string_view data) const {
  const auto path = config_.workspace_dir / rel;
  fs::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << data;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

bool Pipeline::selected_paper(std::string_view paper) const {
  return !options_.only_paper || *options_.only_paper == paper;
}

bool Pipeline::selected_arg(std::string_view arg) const { return !options_.only_arg || *options_.only_arg == arg; }

const VenueAssets& Pipeline::venue_for(const ArgSpec& spec) { return venues_.at(spec.venue_assets_id); }

StageSummary Pipeline::run_items(Stage stage, const std::vector<std::pair<std::string, Work>>& items) {
  StageSummary summary;
  summary.stage = stage;
  std::vector<const std::pair<std::string, Work>*> todo;
  for (const auto& it : items) {
    const auto prev = manifest_->status(stage, it.first);
    if (options_.resume && prev && prev->state != ItemState::Failed) {
      ++summary.reused;
      continue;
    }
    todo.push_back(&it);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> interrupted{false};
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      {
        std::lock_guard lock(mu);
        if (options_.item_budget && new_items_ >= *options_.item_budget) {
          interrupted = true;
          return;
        }
        ++new_items_;
      }
      ItemStatus st;
      try {
        st = todo[k]->second();
      } catch (const Error& e) {
        st.state = ItemState::Failed;
        st.reason = item_reason(e);
      } catch (const std::exception& e) {
        st.state = ItemState::Failed;
        st.reason = e.what();
      }
      st.stage = stage;
      st.item = todo[k]->first;
      manifest_->record(st);
      std::lock_guard lock(mu);
      (st.state == ItemState::Done ? summary.done : st.state == ItemState::Skipped ? summary.skipped : summary.failed)++;
    }
  };
  const std::size_t n = std::min(config_.concurrency, std::max<std::size_t>(todo.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < n; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (interrupted)
    throw Error(ErrorCode::Interrupted, std::string(to_string(stage)) + " stopped after the item budget was used");
  return summary;
}

std::vector<std::string> Pipeline::ingested_papers() const {
  std::vector<std::string> out;
  for (const auto& s : manifest_->items(Stage::Ingest))
    if (s.state == ItemState::Done && selected_paper(s.item)) out.push_back(s.item);
  return out;
}

std::vector<std::string> Pipeline::perturbed_papers() const {
  std::vector<std::string> out;
  for (const auto& s : manifest_->items(Stage::Perturb))
    if (s.state == ItemState::Done && selected_paper(s.item)) out.push_back(s.item);
  return out;
}

std::vector<std::string> Pipeline::cf_ids(Stage stage, const std::string& paper) const {
  const auto m = read_json(stage, fs::path("cfs") / paper / "manifest.json");
  std::vector<std::string> ids;
  for (const auto& id : m.at("critical")) ids.push_back(id.get<std::string>());
  for (const auto& id : m.at("neutral")) ids.push_back(id.get<std::string>());
  return ids;
}

StageSummary Pipeline::ingest() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config_.corpus_dir))
    if (e.is_regular_file() && e.path().extension() == ".md") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<std::pair<std::string, Work>> items;
  for (const auto& f : files) {
    const auto id = f.stem().string();
    if (!selected_paper(id)) continue;
    items.emplace_back(id, [this, f, id]() -> ItemStatus {
      const auto md = read_text(f);
      PaperDocument doc;
      try {
        doc = parse_markdown(md, id, config_.venue);
      } catch (const Error& e) {
        return {Stage::Ingest, id, ItemState::Skipped, item_reason(e)};
      }
      write_file(fs::path("documents") / (id + ".json"), json(doc).dump(1));
      return {Stage::Ingest, id, ItemState::Done, ""};
    });
  }
  auto s = run_items(Stage::Ingest, items);
  if (s.ok()) manifest_->complete_stage(Stage::Ingest);
  return s;
}

StageSummary Pipeline::perturb() {
  std::vector<std::pair<std::string, Work>> items;
  for (const auto& id : ingested_papers()) {
    items.emplace_back(id, [this, id]() -> ItemStatus {
      const auto doc = read_json(Stage::Perturb, fs::path("documents") / (id + ".json")).get<PaperDocument>();
      ExtractionContext ectx{*gateway_, config_.profiles.extraction, true};
      ResearchLogicGraph graph;
      try {
        graph = extract_research_logic(doc, ectx);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoEmpiricalFindings) return {Stage::Perturb, id, ItemState::Skipped, item_reason(e)};
        throw;
      }
      write_file(fs::path("logic") / (id + ".json"), json(graph).dump(1));

      CfContext ctx{*gateway_, config_.profiles.perturbation, config_.profiles.judging, config_.max_attempts,
                    config_.language_errors};
      auto critical = generate_critical_set(doc, graph, derive_seed(config_.seed, "critical/" + id), ctx);
      std::vector<GeneratedCf> neutral;
      for (auto op : kNeutralOperators)
        neutral.push_back(apply_neutral(doc, op, derive_seed(config_.seed, make_cf_id(id, op)), &ctx));

      const fs::path dir = fs::path("cfs") / id;
      fs::remove_all(config_.workspace_dir / dir);
      json bundle{{"paper_id", id}, {"critical", json::array()}, {"neutral", json::array()}, {"skipped", json::array()}};
      auto store = [&](const GeneratedCf& g, const char* list) {
        write_file(dir / (g.cf.cf_id + ".md"), render_markdown(g.document));
        write_file(dir / (g.cf.cf_id + ".edits.json"), json(g.cf).dump(1));
        write_file(dir / (g.cf.cf_id + ".doc.json"), json(g.document).dump(1));
        bundle[list].push_back(g.cf.cf_id);
      };
      for (const auto& g : critical.counterfactuals) store(g, "critical");
      for (const auto& g : neutral) store(g, "neutral");
      for (const auto& s : critical.skipped)
        bundle["skipped"].push_back(json{{"operator", to_string(s.op)}, {"reason", s.reason}});
      write_file(dir / "manifest.json", bundle.dump(1));
      return {Stage::Perturb, id, ItemState::Done, ""};
    });
  }
  auto s = run_items(Stage::Perturb, items);
  if (s.ok()) manifest_->complete_stage(Stage::Perturb);
  return s;
}

StageSummary Pipeline::review() {
  const auto papers = perturbed_papers();
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& p : papers) {
    refs[p].push_back(p);
    for (auto& id : cf_ids(Stage::Review, p)) refs[p].push_back(std::move(id));
  }

  auto batch = [&](bool oracle) {
    std::vector<std::pair<std::string, Work>> items;
    for (const auto& spec : config_.args) {
      if ((spec.kind == ArgKind::Oracle) != oracle || !selected_arg(spec.name)) continue;
      for (const auto& paper : papers)
        for (const auto& ref : refs[paper]) {
          const auto item = spec.name + "/" + ref;
          items.emplace_back(item, [this, spec, paper, ref]() -> ItemStatus {
            const auto& venue = venue_for(spec);
            ReviewContext rctx{*gateway_, venue, config_.workspace_dir / "scratch", config_.profiles.features};
            const fs::path out = fs::path("reviews") / spec.name / (ref + ".json");
            ReviewReport report;
            if (spec.kind == ArgKind::Oracle) {
              const fs::path base = fs::path("reviews") / spec.base_arg / (paper + ".json");
              if (!exists(base))
                throw Error(ErrorCode::MissingOriginalReview,
                            "base ARG " + spec.base_arg + " has no review of " + paper);
              const auto original = read_json(Stage::Review, base).get<ReviewReport>();
              if (ref == paper) {
                report = original;
                report.arg_name = spec.name;
                report.review_id = spec.name + "/" + paper;
              } else {
                const auto cf =
                    read_json(Stage::Review, fs::path("cfs") / paper / (ref + ".edits.json")).get<Counterfactual>();
                report = oracle_review(original, cf, spec, config_.seed, rctx);
              }
            } else {
              const fs::path src = ref == paper ? fs::path("documents") / (paper + ".json")
                                                : fs::path("cfs") / paper / (ref + ".doc.json");
              const auto doc = read_json(Stage::Review, src).get<PaperDocument>();
              std::unique_lock<std::mutex> serial;
              if (auto it = external_locks_.find(spec.name); it != external_locks_.end())
                serial = std::unique_lock(*it->second);
              report = generate_review(spec, doc, ref, rctx);
            }
            write_file(out, json(report).dump(1));
            const std::string note =
                report.parse_status == ParseStatus::Full ? "" : "parse " + std::string(to_string(report.parse_status));
            return {Stage::Review, spec.name + "/" + ref, ItemState::Done, note};
          });
        }
    }
    return items;
  };

  auto first = run_items(Stage::Review, batch(false));
  auto second = run_items(Stage::Review, batch(true));
  StageSummary s{Stage::Review, first.done + second.done, first.skipped + second.skipped,
                 first.failed + second.failed, first.reused + second.reused};
  if (s.ok()) manifest_->complete_stage(Stage::Review);
  return s;
}

StageSummary Pipeline::analyze() {
  const auto papers = perturbed_papers();
  std::unique_ptr<AspectClassifier> classifier;
  if (config_.aspect_labels) classifier = std::make_unique<FileAspectClassifier>(*config_.aspect_labels);
  else classifier = std::make_unique<GatewayAspectClassifier>(*gateway_, config_.profiles.features);

  std::map<std::string, std::vector<std::string>> refs;
  std::map<std::string, Condition> conditions;
  for (const auto& p : papers) {
    for (const auto& id : cf_ids(Stage::Analyze, p)) {
      refs[p].push_back(id);
      conditions[id] = read_json(Stage::Analyze, fs::path("cfs") / p / (id + ".edits.json")).get<Counterfactual>().condition;
    }
  }

  std::vector<std::pair<std::string, Work>> items;
  for (const auto& spec : config_.args) {
    if (!selected_arg(spec.name)) continue;
    for (const auto& paper : papers) {
      std::vector<std::string> all{paper};
      all.insert(all.end(), refs[paper].begin(), refs[paper].end());
      for (const auto& ref : all) {
        const fs::path src = fs::path("reviews") / spec.name / (ref + ".json");
        const auto review_state = manifest_->status(Stage::Review, spec.name + "/" + ref);
        if (!review_state || review_state->state != ItemState::Done) continue;
        items.emplace_back(spec.name + "/" + ref, [this, spec, ref, src, classifier = classifier.get()]() -> ItemStatus {
          const auto review = read_json(Stage::Analyze, src).get<ReviewReport>();
          std::vector<std::string> warnings;
          FeatureContext fctx{*gateway_, config_.profiles.features, *classifier, taxonomy_,
                              [&warnings](const std::string& w) { warnings.push_back(w); }};
          const auto assertions = extract_assertions(review, fctx);
          const auto features = compute_features(assertions, review, taxonomy_, venue_for(spec).overall_score,
                                                 config_.share_denominator);
          json out{{"review_id", review.review_id},
                   {"assertions", assertions},
                   {"features", features},
                   {"warnings", warnings}};
          write_file(fs::path("features") / spec.name / (ref + ".json"), out.dump(1));
          return {Stage::Analyze, spec.name + "/" + ref, ItemState::Done, ""};
        });
      }
    }
  }
  auto summary = run_items(Stage::Analyze, items);

  std::vector<ReviewDelta> deltas;
  std::vector<std::string> arg_order;
  for (const auto& spec : config_.args) {
    arg_order.push_back(spec.name);
    for (const auto& paper : papers) {
      const fs::path orig = fs::path("features") / spec.name / (paper + ".json");
      if (!exists(orig)) continue;
      const auto fo = read_json(Stage::Analyze, orig).at("features").get<ReviewFeatures>();
      for (const auto& cf : refs[paper]) {
        const fs::path path = fs::path("features") / spec.name / (cf + ".json");
        if (!exists(path)) continue;
        const auto fc = read_json(Stage::Analyze, path).at("features").get<ReviewFeatures>();
        deltas.push_back(review_delta(fo, fc, DeltaMeta{spec.name, paper, cf, conditions.at(cf)}));
      }
    }
  }
  std::string lines;
  for (const auto& d : deltas) lines += json(d).dump() + "\n";
  write_file(fs::path("analysis") / "deltas.jsonl", lines);

  auto analysis = analyze_deltas(deltas, arg_order, config_.sd_mode);
  analysis["run_id"] = manifest_->run_id();
  analysis["config_digest"] = config_digest(config_);
  analysis["seed"] = config_.seed;
  analysis["estimation"]["share_denominator"] = share_name(config_.share_denominator);
  write_file(fs::path("analysis") / "analysis.json", analysis.dump(2) + "\n");
  write_file(fs::path("analysis") / "report.txt", render_report(analysis));
  if (summary.ok()) manifest_->complete_stage(Stage::Analyze);
  return summary;
}

std::string Pipeline::report() {
  const fs::path rel = fs::path("analysis") / "analysis.json";
  if (!exists(rel)) throw Error(ErrorCode::PreconditionViolated, "no analysis yet; run analyze first");
  return render_report(read_json(Stage::Report, rel));
}

std::vector<StageSummary> Pipeline::run_all() { return {ingest(), perturb(), review(), analyze()}; }

// ---------------------------------------------------------------------------
// Analysis document

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json analyze_deltas(const std::vector<ReviewDelta>& deltas, const std::vector<std::string>& arg_order, SdMode sd_mode) {
  const auto samples = samples_from_deltas(deltas);
  json args = json::object();
  json errors = json::array();
  std::vector<AteSummary> summaries;
  std::map<Dimension, std::vector<std::pair<std::string, double>>> p_by_dim;

  for (const auto& arg : arg_order) {
    json per = json::object();
    for (auto dim : kDimensions) {
      json cell = json::object();
      const auto dname = std::string(to_string(dim));
      try {
        const auto s = summarize(samples, arg, dim, sd_mode);
        summaries.push_back(s);
        cell["ate_critical"] = s.ate_critical;
        cell["ate_neutral"] = s.ate_neutral;
        cell["sd_neutral"] = s.sd_neutral;
        cell["n_critical"] = s.n_critical;
        cell["n_neutral"] = s.n_neutral;
        cell["z"] = s.sd_neutral > 0 ? json(std::fabs(s.ate_critical - s.ate_neutral) / s.sd_neutral) : json(nullptr);
      } catch (const Error& e) {
        errors.push_back(json{{"arg", arg}, {"dimension", dname}, {"error", item_reason(e)}});
      }
      try {
        const auto fit = fit_random_intercept_lme(select(samples, arg, dim));
        cell["lme"] = json{{"beta", number_or_null(fit.beta_condition)},
                           {"se", number_or_null(fit.se_condition)},
                           {"p", number_or_null(fit.p_value)},
                           {"beta_intercept", number_or_null(fit.beta_intercept)},
                           {"var_paper", number_or_null(fit.var_paper)},
                           {"var_residual", number_or_null(fit.var_residual)},
                           {"converged", fit.converged},
                           {"n_obs", fit.n_obs},
                           {"n_papers", fit.n_papers}};
        p_by_dim[dim].emplace_back(arg, fit.p_value);
      } catch (const Error& e) {
        errors.push_back(json{{"arg", arg}, {"dimension", dname}, {"error", item_reason(e)}});
      }
      per[dname] = cell;
    }
    args[arg] = per;
  }

  for (auto& [dim, ps] : p_by_dim) {
    const auto adjusted = bh_correct(ps);
    for (const auto& [arg, p] : adjusted) args[arg][std::string(to_string(dim))]["lme"]["p_adjusted"] = p;
  }

  const auto ranking = z_rank(summaries);
  json rank = json::array();
  for (const auto& e : ranking.entries) {
    json dims = json::array();
    for (auto d : e.dimensions) dims.push_back(to_string(d));
    rank.push_back(json{{"arg", e.arg_name}, {"z", e.z}, {"dimensions", dims}});
  }
  json excluded = json::array();
  for (const auto& x : ranking.excluded)
    excluded.push_back(json{{"arg", x.arg_name},
                            {"dimension", x.dimension ? json(to_string(*x.dimension)) : json(nullptr)},
                            {"reason", x.reason}});

  return json{{"estimation",
               {{"model", "delta ~ condition + (1 | paper)"},
                {"method", "REML"},
                {"test", "Wald, normal reference"},
                {"multiple_testing", "Benjamini-Hochberg across ARGs per dimension"},
                {"sd_mode", sd_name(sd_mode)}}},
              {"arg_order", arg_order},
              {"args", args},
              {"ranking", rank},
              {"excluded", excluded},
              {"errors", errors},
              {"n_deltas", deltas.size()}};
}

std::string render_report(const json& analysis) {
  auto num = [](const json& v, const char* fmt) {
    if (!v.is_number()) return std::string("-");
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v.get<double>());
    return std::string(buf);
  };
  std::string out;
  char line[256];
  const auto& order = analysis.at("arg_order");
  for (auto dim : kDimensions) {
    const std::string d(to_string(dim));
    out += "== " + d + " ==\n";
    std::snprintf(line, sizeof line, "%-24s %9s %9s %9s %9s %10s %10s %7s\n", "ARG", "ATE_CR", "ATE_NE", "SD_NE",
                  "beta", "p", "p_BH", "z");
    out += line;
    for (const auto& a : order) {
      const auto arg = a.get<std::string>();
      const json cell = analysis.at("args").at(arg).value(d, json::object());
      const json lme = cell.value("lme", json::object());
      std::snprintf(line, sizeof line, "%-24s %9s %9s %9s %9s %10s %10s %7s\n", arg.c_str(),
                    num(cell.value("ate_critical", json()), "%.3f").c_str(),
                    num(cell.value("ate_neutral", json()), "%.3f").c_str(),
                    num(cell.value("sd_neutral", json()), "%.3f").c_str(), num(lme.value("beta", json()), "%.3f").c_str(),
                    num(lme.value("p", json()), "%.3g").c_str(), num(lme.value("p_adjusted", json()), "%.3g").c_str(),
                    num(cell.value("z", json()), "%.3f").c_str());
      out += line;
    }
    out += "\n";
  }
  out += "== ranking (z) ==\n";
  int k = 0;
  for (const auto& e : analysis.at("ranking")) {
    std::snprintf(line, sizeof line, "%2d. %-24s %.3f\n", ++k, e.at("arg").get<std::string>().c_str(),
                  e.at("z").get<double>());
    out += line;
  }
  for (const auto& x : analysis.at("excluded")) {
    out += "excluded: " + x.at("arg").get<std::string>();
    if (!x.at("dimension").is_null()) out += " (" + x.at("dimension").get<std::string>() + ")";
    out += ": " + x.at("reason").get<std::string>() + "\n";
  }
  for (const auto& e : analysis.at("errors"))
    out += "note: " + e.at("arg").get<std::string>() + " " + e.at("dimension").get<std::string>() + ": " +
           e.at("error").get<std::string>() + "\n";
  return out;
}

}  // namespace revlogic

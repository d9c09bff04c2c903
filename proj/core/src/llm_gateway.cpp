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


#include "revlogic/llm_gateway.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "revlogic/digest.hpp"
#include "revlogic/text.hpp"

namespace revlogic {

using nlohmann::json;

void to_json(json& j, const BackendProfile& p) {
  j = json{{"endpoint_url", p.endpoint_url},
           {"model_name", p.model_name},
           {"temperature", p.temperature},
           {"seed", p.seed},
           {"max_output_tokens", p.max_output_tokens},
           {"context_window_tokens", p.context_window_tokens},
           {"auth_env_var", p.auth_env_var}};
}

void from_json(const json& j, BackendProfile& p) {
  p = BackendProfile{};
  p.endpoint_url = j.value("endpoint_url", "");
  p.model_name = j.value("model_name", "");
  p.temperature = j.value("temperature", 0.0);
  p.seed = j.value("seed", std::int64_t{0});
  p.max_output_tokens = j.value("max_output_tokens", 2048);
  p.context_window_tokens = j.value("context_window_tokens", 128000);
  p.auth_env_var = j.value("auth_env_var", "");
  if (p.context_window_tokens <= 0)
    throw Error(ErrorCode::ConfigError, "context_window_tokens must be positive");
  if (p.temperature < 0.0) throw Error(ErrorCode::ConfigError, "temperature must be >= 0");
}

std::vector<ChatMessage> resolve_messages(const PromptTask& task) {
  if (task.messages.empty() || task.messages.front().role != "system")
    throw Error(ErrorCode::ConfigError,
                "task '" + task.task_name + "' must start with a system message");
  std::vector<ChatMessage> out;
  out.reserve(task.messages.size());
  for (const auto& m : task.messages) {
    if (m.is_template)
      out.push_back({m.role, substitute(m.text, task.template_params), false});
    else
      out.push_back({m.role, m.text, false});
  }
  return out;
}

void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"relevant", v.relevant},
           {"minimal", v.minimal},
           {"plausible", v.plausible},
           {"diverse", v.diverse},
           {"rationale", v.rationale}};
}

void from_json(const json& j, JudgeVerdict& v) {
  v.relevant = j.at("relevant").get<bool>();
  v.minimal = j.at("minimal").get<bool>();
  v.plausible = j.at("plausible").get<bool>();
  v.diverse = j.at("diverse").get<bool>();
  v.rationale = j.value("rationale", "");
}

namespace {

std::optional<bool> pass_word(std::string_view w) {
  w = text::trim(w);
  while (!w.empty() && (w.back() == '.' || w.back() == '*')) w.remove_suffix(1);
  while (!w.empty() && w.front() == '*') w.remove_prefix(1);
  if (text::iequals(w, "pass") || text::iequals(w, "yes") || text::iequals(w, "true")) return true;
  if (text::iequals(w, "fail") || text::iequals(w, "no") || text::iequals(w, "false")) return false;
  return std::nullopt;
}

std::optional<bool> json_flag(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) return pass_word(v.get<std::string>());
  return std::nullopt;
}

}  // namespace

std::optional<JudgeVerdict> parse_verdict(std::string_view raw) {
  const std::string_view body = text::trim(raw);
  if (body.empty()) return std::nullopt;

  if (body.front() == '{' || body.find("\"relevant\"") != std::string_view::npos) {
    if (auto j = extract_json(body); j && j->is_object()) {
      auto r = json_flag(*j, "relevant"), m = json_flag(*j, "minimal");
      auto p = json_flag(*j, "plausible"), d = json_flag(*j, "diverse");
      if (r && m && p && d) {
        JudgeVerdict v{*r, *m, *p, *d, ""};
        if (j->contains("rationale") && (*j)["rationale"].is_string())
          v.rationale = (*j)["rationale"].get<std::string>();
        return v;
      }
    }
  }

  const auto nl = body.find('\n');
  const std::string_view first = body.substr(0, nl);
  std::vector<bool> flags;
  std::size_t pos = 0;
  while (pos <= first.size()) {
    const auto comma = first.find(',', pos);
    const auto word = first.substr(pos, comma == std::string_view::npos ? first.npos : comma - pos);
    const auto f = pass_word(word);
    if (!f) return std::nullopt;
    flags.push_back(*f);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (flags.size() != 4) return std::nullopt;
  JudgeVerdict v{flags[0], flags[1], flags[2], flags[3], ""};
  if (nl != std::string_view::npos) v.rationale = std::string(text::trim(body.substr(nl + 1)));
  return v;
}

// ---------------------------------------------------------------------------
// Schemas

namespace {

const char* kBuiltinSchemas = R"json({
  "anchor": {"type": "object", "required": ["block_id", "quote"],
             "properties": {"block_id": {"type": "string"}, "quote": {"type": "string"}}},
  "logic.summary": {"type": "object", "required": ["summary", "anchors"],
    "properties": {"summary": {"type": "string"},
                   "anchors": {"type": "array", "items": {"$ref": "anchor"}}}},
  "logic.contributions": {"type": "object", "required": ["contributions"],
    "properties": {"contributions": {"type": "array", "items": {"type": "object",
      "required": ["summary", "empirical", "anchors"],
      "properties": {"summary": {"type": "string"}, "empirical": {"type": "boolean"},
                     "anchors": {"type": "array", "items": {"$ref": "anchor"}}}}}}},
  "logic.rank": {"type": "object", "required": ["scores"],
    "properties": {"scores": {"type": "array", "items": {"type": "object",
      "required": ["id", "relevance"],
      "properties": {"id": {"type": "string"}, "relevance": {"type": "number"}}}}}},
  "logic.items": {"type": "object", "required": ["items"],
    "properties": {"items": {"type": "array", "items": {"type": "object",
      "required": ["summary", "anchors"],
      "properties": {"summary": {"type": "string"},
                     "anchors": {"type": "array", "items": {"$ref": "anchor"}}}}}}},
  "logic.links": {"type": "object", "required": ["links"],
    "properties": {"links": {"type": "array", "items": {"type": "object",
      "required": ["child", "parents"],
      "properties": {"child": {"type": "string"},
                     "parents": {"type": "array", "items": {"type": "string"}}}}}}},
  "logic.link_method": {"type": "object", "required": ["results"],
    "properties": {"results": {"type": "array", "items": {"type": "string"}}}},
  "logic.coreferences": {"type": "object", "required": ["coreferences"],
    "properties": {"coreferences": {"type": "array", "items": {"type": "object",
      "required": ["block", "anchors"],
      "properties": {"block": {"type": "string"},
                     "anchors": {"type": "array", "items": {"$ref": "anchor"}}}}}}},
  "cf.classify": {"type": "object", "required": ["classes"],
    "properties": {"classes": {"type": "array", "items": {"type": "string",
      "enum": ["correlational", "causal", "conditional", "none"]}}}},
  "cf.finding": {"type": "object", "required": ["revised"],
    "properties": {"revised": {"type": "string"}}},
  "cf.hypothesis": {"type": "object", "required": ["hypothetical_result"],
    "properties": {"hypothetical_result": {"type": "string"}}},
  "cf.conclusion": {"type": "object", "required": ["revised_conclusion", "revised_finding"],
    "properties": {"revised_conclusion": {"type": "string"}, "revised_finding": {"type": "string"}}},
  "cf.result": {"type": "object", "required": ["revised", "values"],
    "properties": {"revised": {"type": "string"},
                   "values": {"type": "array", "items": {"type": "object", "required": ["old", "new"],
                     "properties": {"old": {"type": "string"}, "new": {"type": "string"}}}}}},
  "cf.table": {"type": "object", "required": ["cells"],
    "properties": {"reasoning": {"type": "string"},
                   "cells": {"type": "array", "items": {"type": "object",
                     "required": ["table_id", "row", "column", "old", "new"],
                     "properties": {"table_id": {"type": "string"}, "row": {"type": "integer"},
                                    "column": {"type": "integer"}, "old": {"type": "string"},
                                    "new": {"type": "string"}}}}}},
  "cf.project": {"type": "object", "required": ["replacement"],
    "properties": {"replacement": {"type": "string"}}},
  "neutral.rewrite": {"type": "object", "required": ["rewritten"],
    "properties": {"rewritten": {"type": "string"}}},
  "review.parse": {"type": "object", "required": ["sections", "scores"],
    "properties": {"sections": {"type": "object"}, "scores": {"type": "object"}}},
  "assert.extract": {"type": "object", "required": ["assertions"],
    "properties": {"assertions": {"type": "array", "items": {"type": "object",
      "required": ["text", "polarity"],
      "properties": {"text": {"type": "string"},
                     "polarity": {"type": "string", "enum": ["positive", "negative", "neutral"]}}}}}},
  "assert.aspects": {"type": "object", "required": ["labels"],
    "properties": {"labels": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}}}},
  "assert.align": {"type": "object", "required": ["pairs"],
    "properties": {"pairs": {"type": "array", "items": {"type": "array", "minItems": 2,
      "items": {"type": "integer"}}}}}
})json";

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() ||
                                (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

SchemaRegistry::SchemaRegistry() {
  const json all = json::parse(kBuiltinSchemas);
  for (const auto& [id, schema] : all.items()) schemas_.emplace(id, schema);
}

const SchemaRegistry& SchemaRegistry::builtin() {
  static const SchemaRegistry registry;
  return registry;
}

void SchemaRegistry::add(std::string id, json schema) { schemas_[std::move(id)] = std::move(schema); }

bool SchemaRegistry::contains(std::string_view id) const { return schemas_.find(id) != schemas_.end(); }

const json& SchemaRegistry::get(std::string_view id) const {
  auto it = schemas_.find(id);
  if (it == schemas_.end()) throw Error(ErrorCode::UnknownSchema, "unknown schema '" + std::string(id) + "'");
  return it->second;
}

namespace {

std::string check(const SchemaRegistry& reg, const json& schema, const json& v, const std::string& path,
                  int depth) {
  if (depth > 64) return path + ": schema nesting too deep";
  if (schema.contains("$ref")) return check(reg, reg.get(schema["$ref"].get<std::string>()), v, path, depth + 1);
  if (schema.contains("type")) {
    const auto type = schema["type"].get<std::string>();
    if (!type_matches(v, type)) return path + ": expected " + type;
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) return path + ": value " + v.dump() + " not allowed";
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!v.contains(key.get<std::string>())) return path + ": missing '" + key.get<std::string>() + "'";
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, sub] : v.items()) {
      if (schema.contains("properties") && schema["properties"].contains(key)) {
        auto err = check(reg, schema["properties"][key], sub, path + "." + key, depth + 1);
        if (!err.empty()) return err;
      } else if (closed) {
        return path + ": unexpected property '" + key + "'";
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      return path + ": too few items";
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto err = check(reg, schema["items"], v[i], path + "[" + std::to_string(i) + "]", depth + 1);
        if (!err.empty()) return err;
      }
    }
  }
  return {};
}

// End of the balanced JSON value starting at `open`, honoring strings.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t open) {
  std::vector<char> stack;
  bool in_string = false, escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') stack.push_back(c == '{' ? '}' : ']');
    else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string SchemaRegistry::violation(std::string_view id, const json& value) const {
  return check(*this, get(id), value, "$", 0);
}

std::optional<json> extract_json(std::string_view s) {
  const auto trimmed = text::trim(s);
  if (!trimmed.empty() && (trimmed.front() == '{' || trimmed.front() == '[')) {
    auto j = json::parse(trimmed, nullptr, false);
    if (!j.is_discarded()) return j;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{' && s[i] != '[') continue;
    const auto end = balanced_end(s, i);
    if (!end) continue;
    auto j = json::parse(s.substr(i, *end - i), nullptr, false);
    if (!j.is_discarded()) return j;
  }
  return std::nullopt;
}

json parse_structured(std::string_view text_in, std::string_view schema_id, const SchemaRegistry& registry) {
  if (!registry.contains(schema_id))
    throw Error(ErrorCode::UnknownSchema, "unknown schema '" + std::string(schema_id) + "'");
  auto j = extract_json(text_in);
  if (!j) throw Error(ErrorCode::SchemaViolation, "no JSON value found in reply");
  auto err = registry.violation(schema_id, *j);
  if (!err.empty()) throw Error(ErrorCode::SchemaViolation, err);
  return *j;
}

// ---------------------------------------------------------------------------
// Mock backend

void MockBackend::script(std::string task_name, std::string response) {
  std::lock_guard lock(mu_);
  scripts_[std::move(task_name)] = Script{{std::move(response)}, false, 0, {}};
}

void MockBackend::script_sequence(std::string task_name, std::vector<std::string> responses) {
  std::lock_guard lock(mu_);
  scripts_[std::move(task_name)] = Script{std::move(responses), true, 0, {}};
}

void MockBackend::script_handler(std::string task_name, Handler handler) {
  std::lock_guard lock(mu_);
  scripts_[std::move(task_name)] = Script{{}, false, 0, std::move(handler)};
}

void MockBackend::script_failure(std::string task_name, ErrorCode code, int times) {
  std::lock_guard lock(mu_);
  failures_[std::move(task_name)] = Failure{code, times};
}

void MockBackend::set_default(Handler handler) {
  std::lock_guard lock(mu_);
  default_ = std::move(handler);
}

std::size_t MockBackend::calls(std::string_view task_name) const {
  std::lock_guard lock(mu_);
  auto it = per_task_calls_.find(task_name);
  return it == per_task_calls_.end() ? 0 : it->second;
}

std::string MockBackend::chat(const BackendProfile& profile, const PromptTask& task) {
  ++calls_;
  Handler handler;
  {
    std::lock_guard lock(mu_);
    ++per_task_calls_[task.task_name];
    if (auto f = failures_.find(task.task_name); f != failures_.end() && f->second.remaining > 0) {
      --f->second.remaining;
      throw Error(f->second.code, "scripted failure for '" + task.task_name + "'");
    }

    auto lookup = [&](std::string_view name) -> Script* {
      auto it = scripts_.find(name);
      return it == scripts_.end() ? nullptr : &it->second;
    };
    Script* s = lookup(task.task_name);
    if (!s && task.task_name.ends_with(".critique")) return std::string(kNoChanges);
    std::string_view name = task.task_name;
    while (!s) {
      const auto dot = name.rfind('.');
      if (dot == std::string_view::npos) break;
      name = name.substr(0, dot);
      s = lookup(name);
    }
    if (s) {
      if (s->handler) {
        handler = s->handler;
      } else if (s->sequence) {
        if (s->responses.empty()) throw Error(ErrorCode::ScriptMissing, "empty sequence");
        const auto i = std::min(s->next, s->responses.size() - 1);
        ++s->next;
        return s->responses[i];
      } else {
        return s->responses.front();
      }
    } else if (default_) {
      handler = default_;
    } else {
      throw Error(ErrorCode::ScriptMissing, "no mock script for task '" + task.task_name + "'");
    }
  }
  return handler(profile, task);
}

// ---------------------------------------------------------------------------
// Cache

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  {
    std::shared_lock lock(mu_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("response")) return std::nullopt;
  auto value = j["response"].get<std::string>();
  std::unique_lock lock(mu_);
  entries_.emplace(key, value);
  return value;
}

void ResponseCache::put(const std::string& key, const std::string& value) {
  {
    std::unique_lock lock(mu_);
    entries_[key] = value;
  }
  if (!dir_) return;
  const auto final_path = *dir_ / (key + ".json");
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const auto tmp = *dir_ / (key + ".tmp." + tid.str());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write cache file " + tmp.string());
    out << json{{"key", key}, {"response", value}}.dump();
  }
  std::filesystem::rename(tmp, final_path);
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string cache_key(const BackendProfile& profile, const std::vector<ChatMessage>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back(json::array({m.role, m.text}));
  json key{{"profile", profile}, {"messages", msgs}};
  return sha256_hex(key.dump());
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      prompts_(options.prompts ? options.prompts
                               : std::shared_ptr<const PromptLibrary>(&PromptLibrary::builtin(),
                                                                       [](const PromptLibrary*) {})),
      retry_(options.retry),
      keep_audit_(options.keep_audit_in_memory),
      cache_(options.cache_dir) {
  if (!backend_) throw Error(ErrorCode::ConfigError, "gateway needs a backend");
}

void Gateway::set_audit_sink(std::function<void(const AuditRecord&)> sink) {
  std::lock_guard lock(audit_mu_);
  sink_ = std::move(sink);
}

std::vector<AuditRecord> Gateway::audit_log() const {
  std::lock_guard lock(audit_mu_);
  return audit_;
}

void Gateway::record(AuditRecord rec) {
  std::lock_guard lock(audit_mu_);
  if (sink_) sink_(rec);
  if (keep_audit_) audit_.push_back(std::move(rec));
}

std::string Gateway::dispatch_with_retry(const BackendProfile& profile, const PromptTask& resolved) {
  for (int attempt = 0;; ++attempt) {
    try {
      ++backend_calls_;
      return backend_->chat(profile, resolved);
    } catch (const Error& e) {
      const bool transient = e.code() == ErrorCode::TransportError || e.code() == ErrorCode::RateLimited;
      if (!transient || attempt >= retry_.max_transport_retries) throw;
      const auto delay = retry_.base_backoff * (1LL << attempt);
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
    }
  }
}

std::string Gateway::complete(const PromptTask& task, const BackendProfile& profile) {
  PromptTask resolved = task;
  resolved.messages = resolve_messages(task);
  resolved.template_params.clear();

  std::size_t tokens = 0;
  for (const auto& m : resolved.messages) tokens += text::estimate_tokens(m.text);
  if (tokens > static_cast<std::size_t>(profile.context_window_tokens))
    throw Error(ErrorCode::ContextOverflow, "task '" + task.task_name + "' needs ~" + std::to_string(tokens) +
                                                " tokens, window is " +
                                                std::to_string(profile.context_window_tokens));

  const auto key = cache_key(profile, resolved.messages);
  if (auto hit = cache_.get(key)) {
    record({task.task_name, key, true, resolved.messages, *hit});
    return *hit;
  }
  auto response = dispatch_with_retry(profile, resolved);
  cache_.put(key, response);
  record({task.task_name, key, false, std::move(resolved.messages), response});
  return response;
}

namespace {

std::string join_user_text(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    if (m.role == "system") continue;
    if (!out.empty()) out += "\n\n";
    out += m.text;
  }
  return out;
}

PromptTask derived_task(const PromptTask& base, std::string suffix, const std::string& tmpl,
                        TemplateParams params, const std::vector<ChatMessage>& resolved_base) {
  PromptTask t;
  t.task_name = base.task_name + suffix;
  t.schema_id = base.schema_id;
  t.messages.push_back({"system", resolved_base.front().text, false});
  t.messages.push_back({"user", tmpl, true});
  t.template_params = std::move(params);
  return t;
}

}  // namespace

std::string Gateway::complete_refined(const PromptTask& task, const BackendProfile& profile) {
  std::string draft;
  try {
    draft = complete(task, profile);
  } catch (const Error& e) {
    throw e.with_context("generate");
  }
  const auto resolved = resolve_messages(task);
  const auto task_text = join_user_text(resolved);

  std::string critique;
  try {
    critique = complete(derived_task(task, ".critique", prompts_->get("refine.critique"),
                                     {{"task", task_text}, {"draft", draft}}, resolved),
                        profile);
  } catch (const Error& e) {
    throw e.with_context("critique");
  }
  if (text::trim(critique).starts_with(kNoChanges)) return draft;

  try {
    return complete(derived_task(task, ".revise", prompts_->get("refine.revise"),
                                 {{"task", task_text}, {"draft", draft}, {"critique", critique}}, resolved),
                    profile);
  } catch (const Error& e) {
    throw e.with_context("revise");
  }
}

json Gateway::complete_structured(const PromptTask& task, const BackendProfile& profile, bool refine) {
  if (!task.schema_id) throw Error(ErrorCode::UnknownSchema, "task '" + task.task_name + "' has no schema");
  const auto& schema_id = *task.schema_id;
  if (!schemas().contains(schema_id)) throw Error(ErrorCode::UnknownSchema, "unknown schema '" + schema_id + "'");

  const std::string first = refine ? complete_refined(task, profile) : complete(task, profile);
  try {
    return parse_structured(first, schema_id, schemas());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SchemaViolation) throw;
    const auto resolved = resolve_messages(task);
    PromptTask reask;
    reask.task_name = task.task_name + ".reask";
    reask.schema_id = task.schema_id;
    reask.messages = resolved;
    reask.messages.push_back({"assistant", first, false});
    reask.messages.push_back({"user", prompts_->get("structured.reask"), true});
    reask.template_params = {{"error", e.what()}, {"previous", first}};
    const auto second = complete(reask, profile);
    try {
      return parse_structured(second, schema_id, schemas());
    } catch (const Error& e2) {
      throw Error(ErrorCode::SchemaViolation,
                  "task '" + task.task_name + "' failed after re-ask: " + std::string(e2.what()));
    }
  }
}

JudgeVerdict Gateway::judge(std::string_view subject, const PromptTask& criteria_prompt,
                            const BackendProfile& profile) {
  PromptTask task = criteria_prompt;
  if (!subject.empty()) task.messages.push_back({"user", std::string(subject), false});
  const auto first = complete(task, profile);
  if (auto v = parse_verdict(first)) return *v;

  PromptTask reask;
  reask.task_name = task.task_name + ".reask";
  reask.messages = resolve_messages(task);
  reask.messages.push_back({"assistant", first, false});
  reask.messages.push_back({"user", prompts_->get("judge.reask"), true});
  reask.template_params = {{"error", "expected four pass/fail flags on the first line"}, {"previous", first}};
  const auto second = complete(reask, profile);
  if (auto v = parse_verdict(second)) return *v;
  throw Error(ErrorCode::UnparseableVerdict, "judge '" + task.task_name + "' gave no parseable verdict twice");
}

PromptTask Gateway::make_task(std::string_view template_name, TemplateParams params,
                              std::optional<std::string> schema_id, std::string_view system_template) const {
  PromptTask t;
  t.task_name = std::string(template_name);
  t.messages.push_back({"system", prompts_->get(system_template), true});
  t.messages.push_back({"user", prompts_->get(template_name), true});
  t.template_params = std::move(params);
  t.schema_id = std::move(schema_id);
  return t;
}

}  // namespace revlogic

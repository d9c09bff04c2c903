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

// Uniform access to chat-completion models.
//
// A Gateway wraps one ChatBackend (HTTP or the scripted mock) and adds
// template substitution, a content-addressed response cache, bounded
// transport retries, one-cycle self-refinement, judging and structured-output
// parsing with a single re-ask. Every dispatched prompt is reported to the
// audit sink.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "revlogic/error.hpp"
#include "revlogic/prompts.hpp"

namespace revlogic {

struct BackendProfile {
  std::string endpoint_url;
  std::string model_name;
  double temperature = 0.0;
  std::int64_t seed = 0;
  int max_output_tokens = 2048;
  int context_window_tokens = 128000;
  std::string auth_env_var;
};

void to_json(nlohmann::json& j, const BackendProfile& p);
void from_json(const nlohmann::json& j, BackendProfile& p);

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string text;
  bool is_template = true;  // false: already resolved, sent verbatim
};

struct PromptTask {
  std::string task_name;
  std::vector<ChatMessage> messages;
  std::optional<std::string> schema_id;
  TemplateParams template_params;
};

/// Messages with every template resolved against task.template_params.
/// Throws Error{UnresolvedPlaceholder} or Error{ConfigError} (first message
/// not a system message).
std::vector<ChatMessage> resolve_messages(const PromptTask& task);

struct JudgeVerdict {
  bool relevant = false;
  bool minimal = false;
  bool plausible = false;
  bool diverse = false;
  std::string rationale;

  bool pass() const { return relevant && minimal && plausible && diverse; }
  bool operator==(const JudgeVerdict&) const = default;
};

void to_json(nlohmann::json& j, const JudgeVerdict& v);
void from_json(const nlohmann::json& j, JudgeVerdict& v);

/// Parses "pass,fail,pass,pass\nrationale..." or a JSON object with the four
/// boolean criteria. Returns nullopt when the text is not a verdict.
std::optional<JudgeVerdict> parse_verdict(std::string_view text);

// ---------------------------------------------------------------------------
// Structured output
// ---------------------------------------------------------------------------

/// Registry of JSON schemas (a subset of JSON Schema: type, properties,
/// required, items, enum, minItems, additionalProperties).
class SchemaRegistry {
 public:
  SchemaRegistry();
  static const SchemaRegistry& builtin();

  void add(std::string id, nlohmann::json schema);
  bool contains(std::string_view id) const;
  const nlohmann::json& get(std::string_view id) const;

  /// Empty string when valid, otherwise a description of the first violation.
  std::string violation(std::string_view id, const nlohmann::json& value) const;

 private:
  std::map<std::string, nlohmann::json, std::less<>> schemas_;
};

/// Finds the first balanced JSON object or array in free text and parses it.
std::optional<nlohmann::json> extract_json(std::string_view text);

/// extract_json + schema validation. Throws Error{SchemaViolation | UnknownSchema}.
nlohmann::json parse_structured(std::string_view text, std::string_view schema_id,
                                const SchemaRegistry& registry = SchemaRegistry::builtin());

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// messages are fully resolved. Throws Error{TransportError | RateLimited |
  /// ContextOverflow}.
  virtual std::string chat(const BackendProfile& profile, const PromptTask& task) = 0;
};

/// OpenAI-compatible chat-completions client over HTTP(S). The endpoint URL is
/// the full completions URL; the bearer token comes from profile.auth_env_var.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(std::chrono::seconds timeout = std::chrono::seconds(600));
  std::string chat(const BackendProfile& profile, const PromptTask& task) override;

  /// Request body sent for a task (exposed for wire-format tests).
  static nlohmann::json request_body(const BackendProfile& profile, const PromptTask& task);

 private:
  std::chrono::seconds timeout_;
};

/// Deterministic scripted backend for offline runs and tests.
///
/// Scripts are keyed by task name. Lookup tries the exact name, then dotted
/// prefixes ("cf.finding.causal" -> "cf.finding" -> "cf"), then the default
/// handler. An unscripted "*.critique" task answers NO_CHANGES. Fixed scripts
/// and handlers behave identically under any call order; sequence scripts are
/// the one order-dependent form.
class MockBackend : public ChatBackend {
 public:
  using Handler = std::function<std::string(const BackendProfile&, const PromptTask&)>;

  void script(std::string task_name, std::string response);
  void script_sequence(std::string task_name, std::vector<std::string> responses);
  void script_handler(std::string task_name, Handler handler);
  /// The first `times` calls of the task throw `code`.
  void script_failure(std::string task_name, ErrorCode code, int times);
  void set_default(Handler handler);

  std::string chat(const BackendProfile& profile, const PromptTask& task) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t calls(std::string_view task_name) const;

 private:
  struct Script {
    std::vector<std::string> responses;
    bool sequence = false;
    std::size_t next = 0;
    Handler handler;
  };
  struct Failure {
    ErrorCode code;
    int remaining;
  };

  mutable std::mutex mu_;
  std::map<std::string, Script, std::less<>> scripts_;
  std::map<std::string, Failure, std::less<>> failures_;
  std::map<std::string, std::size_t, std::less<>> per_task_calls_;
  Handler default_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Cache + gateway
// ---------------------------------------------------------------------------

/// Content-addressed response cache, in memory and optionally on disk.
/// Concurrent readers, exclusive writers.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& value);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, std::string> entries_;
};

/// Digest over every profile field and the resolved message list.
std::string cache_key(const BackendProfile& profile, const std::vector<ChatMessage>& messages);

struct RetryPolicy {
  int max_transport_retries = 3;
  std::chrono::milliseconds base_backoff{500};
};

struct AuditRecord {
  std::string task_name;
  std::string cache_key;
  bool from_cache = false;
  std::vector<ChatMessage> messages;
  std::string response;
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  std::shared_ptr<const PromptLibrary> prompts;  // builtin when null
  bool keep_audit_in_memory = true;
};

inline constexpr std::string_view kNoChanges = "NO_CHANGES";

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options = {});

  /// One completion. Served from cache when (profile, messages) was seen.
  /// Throws Error{TransportError | RateLimited} after bounded retries, or
  /// Error{ContextOverflow} when the estimated prompt exceeds the window.
  std::string complete(const PromptTask& task, const BackendProfile& profile);

  /// Exactly one generate -> critique -> revise cycle. A critique of
  /// NO_CHANGES returns the draft. Errors carry the failing step's label.
  std::string complete_refined(const PromptTask& task, const BackendProfile& profile);

  /// complete (or complete_refined) followed by parse_structured against
  /// task.schema_id; one re-ask on failure, then Error{SchemaViolation}.
  nlohmann::json complete_structured(const PromptTask& task, const BackendProfile& profile,
                                     bool refine = false);

  /// Judges `subject` against the criteria task. One re-ask on an
  /// unparseable answer, then Error{UnparseableVerdict}.
  JudgeVerdict judge(std::string_view subject, const PromptTask& criteria_prompt,
                     const BackendProfile& profile);

  /// [system, user] task from a named template in the prompt library.
  PromptTask make_task(std::string_view template_name, TemplateParams params,
                       std::optional<std::string> schema_id = std::nullopt,
                       std::string_view system_template = "system") const;

  const PromptLibrary& prompts() const { return *prompts_; }
  const SchemaRegistry& schemas() const { return SchemaRegistry::builtin(); }

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::vector<AuditRecord> audit_log() const;
  void set_audit_sink(std::function<void(const AuditRecord&)> sink);

 private:
  std::string dispatch_with_retry(const BackendProfile& profile, const PromptTask& resolved);
  void record(AuditRecord rec);

  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<const PromptLibrary> prompts_;
  RetryPolicy retry_;
  bool keep_audit_;
  ResponseCache cache_;
  std::atomic<std::size_t> backend_calls_{0};
  mutable std::mutex audit_mu_;
  std::vector<AuditRecord> audit_;
  std::function<void(const AuditRecord&)> sink_;
};

}  // namespace revlogic

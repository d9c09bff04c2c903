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

#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>

#include "revlogic/error.hpp"
#include "revlogic/llm_gateway.hpp"
#include "support.hpp"

using namespace revlogic;
using namespace revlogic::testing;

namespace {

PromptTask simple(const std::string& name, const std::string& user) {
  PromptTask t;
  t.task_name = name;
  t.messages = {{"system", "You are terse.", true}, {"user", user, true}};
  return t;
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

TEST_SUITE("llm_gateway") {
  TEST_CASE("scripted completion and cache") {
    MockSetup m;
    m.mock->script("echo", "scripted reply");
    const auto p = mock_profile();
    CHECK(m.gateway->complete(simple("echo", "hi"), p) == "scripted reply");
    CHECK(m.gateway->complete(simple("echo", "hi"), p) == "scripted reply");
    CHECK(m.mock->calls() == 1);
    const auto log = m.gateway->audit_log();
    REQUIRE(log.size() == 2);
    CHECK_FALSE(log[0].from_cache);
    CHECK(log[1].from_cache);
    // a different profile is a different cache entry
    m.gateway->complete(simple("echo", "hi"), mock_profile("other"));
    CHECK(m.mock->calls() == 2);
  }

  TEST_CASE("disk cache survives a new gateway") {
    TempDir dir;
    auto mock = std::make_shared<MockBackend>();
    mock->script("echo", "persisted");
    GatewayOptions opts;
    opts.cache_dir = dir.path();
    {
      Gateway g(mock, opts);
      g.complete(simple("echo", "x"), mock_profile());
    }
    Gateway g2(mock, opts);
    CHECK(g2.complete(simple("echo", "x"), mock_profile()) == "persisted");
    CHECK(mock->calls() == 1);
  }

  TEST_CASE("context overflow") {
    MockSetup m;
    m.mock->script("echo", "x");
    auto p = mock_profile();
    p.context_window_tokens = 10;
    CHECK(code_of([&] { m.gateway->complete(simple("echo", std::string(200, 'a')), p); }) == ErrorCode::ContextOverflow);
    CHECK(m.mock->calls() == 0);
  }

  TEST_CASE("transport retries are bounded") {
    MockSetup m;
    m.mock->script("echo", "ok");
    m.mock->script_failure("echo", ErrorCode::TransportError, 2);
    CHECK(m.gateway->complete(simple("echo", "a"), mock_profile()) == "ok");
    m.mock->script_failure("flaky", ErrorCode::RateLimited, 10);
    m.mock->script("flaky", "never");
    CHECK(code_of([&] { m.gateway->complete(simple("flaky", "b"), mock_profile()); }) == ErrorCode::RateLimited);
  }

  TEST_CASE("unresolved placeholders are rejected before dispatch") {
    MockSetup m;
    m.mock->script("echo", "x");
    auto t = simple("echo", "Paper: {paper}");
    CHECK(code_of([&] { m.gateway->complete(t, mock_profile()); }) == ErrorCode::UnresolvedPlaceholder);
    t.template_params["paper"] = "body";
    CHECK(m.gateway->complete(t, mock_profile()) == "x");
  }

  TEST_CASE("self-refinement: draft, critique, revision") {
    MockSetup m;
    m.mock->script("gen", "draft");
    m.mock->script("gen.critique", "Too vague.");
    m.mock->script("gen.revise", "revision");
    CHECK(m.gateway->complete_refined(simple("gen", "go"), mock_profile()) == "revision");

    MockSetup n;
    n.mock->script("gen", "draft");
    CHECK(n.gateway->complete_refined(simple("gen", "go"), mock_profile()) == "draft");
    CHECK(n.mock->calls("gen.critique") == 1);
    CHECK(n.mock->calls("gen.revise") == 0);
  }

  TEST_CASE("transport failure on critique carries the step label") {
    MockSetup m;
    m.mock->script("gen", "draft");
    m.mock->script_failure("gen.critique", ErrorCode::TransportError, 100);
    try {
      m.gateway->complete_refined(simple("gen", "go"), mock_profile());
      FAIL("expected TransportError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TransportError);
      CHECK(std::string(e.what()).rfind("critique", 0) == 0);
    }
  }

  TEST_CASE("judge verdicts") {
    MockSetup m;
    m.mock->script("judge.ok", "pass,pass,pass,pass\nAll good.");
    m.mock->script("judge.min", "pass,fail,pass,pass\nTouches a second paragraph.");
    m.mock->script("judge.bad", "I cannot decide.");
    const auto ok = m.gateway->judge("subject", simple("judge.ok", "criteria"), mock_profile());
    CHECK(ok.pass());
    const auto min = m.gateway->judge("subject", simple("judge.min", "criteria 2"), mock_profile());
    CHECK_FALSE(min.pass());
    CHECK_FALSE(min.minimal);
    CHECK(min.rationale == "Touches a second paragraph.");
    CHECK(code_of([&] { m.gateway->judge("s", simple("judge.bad", "criteria 3"), mock_profile()); }) ==
          ErrorCode::UnparseableVerdict);
    CHECK(m.mock->calls("judge.bad") == 1);
    CHECK(m.mock->calls("judge.bad.reask") == 1);
  }

  TEST_CASE("verdict parsing forms") {
    CHECK(parse_verdict("PASS, pass, pass, pass").has_value());
    const auto j = parse_verdict(R"({"relevant": true, "minimal": true, "plausible": false, "diverse": true})");
    REQUIRE(j.has_value());
    CHECK_FALSE(j->plausible);
    CHECK_FALSE(parse_verdict("pass,pass,pass").has_value());
    CHECK_FALSE(parse_verdict("").has_value());
  }

  TEST_CASE("structured output") {
    const auto typed = parse_structured(R"({"revised": "x"})", "cf.finding");
    CHECK(typed.at("revised") == "x");
    const auto noisy = parse_structured("Sure! Here it is:\n```json\n{\"revised\": \"a {b} c\"}\n```\nHope this helps.",
                                        "cf.finding");
    CHECK(noisy.at("revised") == "a {b} c");
    CHECK(code_of([] { parse_structured("no json here", "cf.finding"); }) == ErrorCode::SchemaViolation);
    CHECK(code_of([] { parse_structured(R"({"other": 1})", "cf.finding"); }) == ErrorCode::SchemaViolation);
    CHECK(code_of([] { parse_structured("{}", "no.such.schema"); }) == ErrorCode::UnknownSchema);
    const auto list = parse_structured(
        R"({"contributions": [{"summary": "a", "empirical": true, "anchors": [{"block_id": "p-0001", "quote": "q"}]}]})",
        "logic.contributions");
    CHECK(list.at("contributions").size() == 1);
  }

  TEST_CASE("extract_json balances brackets inside strings") {
    const auto j = extract_json(R"(prefix {"a": "}", "b": [1, {"c": 2}]} suffix {"d": 3})");
    REQUIRE(j.has_value());
    CHECK(j->at("a") == "}");
    CHECK(j->at("b").size() == 2);
    CHECK_FALSE(extract_json("nothing").has_value());
  }

  TEST_CASE("structured completion re-asks once") {
    MockSetup m;
    m.mock->script("cf.finding.causal", "not json");
    m.mock->script("cf.finding.causal.reask", R"({"revised": "fixed"})");
    auto t = simple("cf.finding.causal", "rewrite");
    t.schema_id = "cf.finding";
    CHECK(m.gateway->complete_structured(t, mock_profile()).at("revised") == "fixed");

    MockSetup n;
    n.mock->script("x", "still not json");
    auto u = simple("x", "rewrite");
    u.schema_id = "cf.finding";
    CHECK(code_of([&] { n.gateway->complete_structured(u, mock_profile()); }) == ErrorCode::SchemaViolation);
    CHECK(n.mock->calls() == 2);
  }

  TEST_CASE("mock lookup order") {
    MockBackend mock;
    mock.script("cf", "prefix");
    mock.script("cf.finding.causal", "exact");
    mock.set_default([](const BackendProfile&, const PromptTask&) { return std::string("default"); });
    const auto p = mock_profile();
    CHECK(mock.chat(p, simple("cf.finding.causal", "")) == "exact");
    CHECK(mock.chat(p, simple("cf.finding.conditional", "")) == "prefix");
    CHECK(mock.chat(p, simple("other", "")) == "default");
    CHECK(mock.chat(p, simple("other.critique", "")) == "NO_CHANGES");
    mock.script_sequence("seq", {"one", "two"});
    CHECK(mock.chat(p, simple("seq", "")) == "one");
    CHECK(mock.chat(p, simple("seq", "")) == "two");
  }

  TEST_CASE("cache key covers profile fields and messages") {
    const auto p = mock_profile();
    const std::vector<ChatMessage> a{{"system", "s", false}, {"user", "u", false}};
    const std::vector<ChatMessage> b{{"system", "s", false}, {"user", "v", false}};
    CHECK(cache_key(p, a) == cache_key(p, a));
    CHECK(cache_key(p, a) != cache_key(p, b));
    auto q = p;
    q.temperature = 0.5;
    CHECK(cache_key(p, a) != cache_key(q, a));
  }

  TEST_CASE("http request body uses the chat-completions shape") {
    auto p = mock_profile("gpt-x");
    p.seed = 7;
    p.max_output_tokens = 100;
    PromptTask t = simple("t", "hello");
    t.messages = resolve_messages(t);
    const auto body = HttpChatBackend::request_body(p, t);
    CHECK(body.at("model") == "gpt-x");
    CHECK(body.at("messages").size() == 2);
    CHECK(body.at("messages")[1].at("content") == "hello");
    CHECK(body.at("seed") == 7);
    CHECK(body.at("temperature") == 0.0);
  }

  TEST_CASE("http backend against a local server") {
    httplib::Server svr;
    std::string seen_auth, seen_model;
    svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen_auth = req.get_header_value("Authorization");
      seen_model = nlohmann::json::parse(req.body).at("model").get<std::string>();
      res.set_content(R"({"choices": [{"message": {"role": "assistant", "content": "hello back"}}]})",
                      "application/json");
    });
    svr.Post("/limited", [](const httplib::Request&, httplib::Response& res) { res.status = 429; });
    svr.Post("/long", [](const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content(R"({"error": "maximum context length exceeded"})", "application/json");
    });
    svr.Post("/garbled", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    const int port = svr.bind_to_any_port("127.0.0.1");
    std::thread server([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    HttpChatBackend http(std::chrono::seconds(10));
    auto p = mock_profile("served-model");
    p.endpoint_url = base + "/v1/chat/completions";
    ::setenv("REVLOGIC_TEST_TOKEN", "secret", 1);
    p.auth_env_var = "REVLOGIC_TEST_TOKEN";
    PromptTask t = simple("t", "hi");
    t.messages = resolve_messages(t);
    CHECK(http.chat(p, t) == "hello back");
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_model == "served-model");

    p.endpoint_url = base + "/limited";
    CHECK(code_of([&] { http.chat(p, t); }) == ErrorCode::RateLimited);
    p.endpoint_url = base + "/long";
    CHECK(code_of([&] { http.chat(p, t); }) == ErrorCode::ContextOverflow);
    p.endpoint_url = base + "/garbled";
    CHECK(code_of([&] { http.chat(p, t); }) == ErrorCode::TransportError);
    p.auth_env_var = "REVLOGIC_TEST_UNSET_VARIABLE";
    CHECK(code_of([&] { http.chat(p, t); }) == ErrorCode::ConfigError);

    svr.stop();
    server.join();
  }
}

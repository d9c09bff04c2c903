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


#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "revlogic/llm_gateway.hpp"

namespace revlogic {

using nlohmann::json;

HttpChatBackend::HttpChatBackend(std::chrono::seconds timeout) : timeout_(timeout) {}

json HttpChatBackend::request_body(const BackendProfile& profile, const PromptTask& task) {
  json messages = json::array();
  for (const auto& m : task.messages) messages.push_back({{"role", m.role}, {"content", m.text}});
  return json{{"model", profile.model_name},
              {"messages", messages},
              {"temperature", profile.temperature},
              {"seed", profile.seed},
              {"max_tokens", profile.max_output_tokens}};
}

std::string HttpChatBackend::chat(const BackendProfile& profile, const PromptTask& task) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(profile.endpoint_url, m, url_re))
    throw Error(ErrorCode::ConfigError, "bad endpoint url '" + profile.endpoint_url + "'");
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/v1/chat/completions";

  httplib::Client client(base);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  httplib::Headers headers;
  if (!profile.auth_env_var.empty()) {
    const char* token = std::getenv(profile.auth_env_var.c_str());
    if (!token || !*token)
      throw Error(ErrorCode::ConfigError, "environment variable " + profile.auth_env_var + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto res = client.Post(path, headers, request_body(profile, task).dump(), "application/json");
  if (!res) throw Error(ErrorCode::TransportError, "request to " + base + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429) throw Error(ErrorCode::RateLimited, "rate limited by " + base);
  if (res->status == 400 && (res->body.find("context_length") != std::string::npos ||
                             res->body.find("maximum context") != std::string::npos))
    throw Error(ErrorCode::ContextOverflow, "backend rejected prompt length: " + res->body.substr(0, 200));
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorCode::TransportError,
                "HTTP " + std::to_string(res->status) + " from " + base + ": " + res->body.substr(0, 200));

  auto body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw Error(ErrorCode::TransportError, "response is not JSON");
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::TransportError, "response lacks choices[0].message.content");
  }
}

}  // namespace revlogic

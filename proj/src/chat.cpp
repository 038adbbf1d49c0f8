// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/chat.hpp"

#include <json.hpp>

#include "internal/http.hpp"
#include "qcg/errors.hpp"

namespace qcg {

using json = nlohmann::json;

void ChatSpec::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("chat temperature must be >= 0");
  if (kind == ChatKind::RemoteChat) {
    if (endpoint.empty()) throw ConfigError("remote chat requires an endpoint");
    if (model_name.empty()) throw ConfigError("remote chat requires a model name");
  }
}

RemoteChatClient::RemoteChatClient(ChatSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  internal::parse_endpoint(spec_.endpoint);
}

std::string RemoteChatClient::request_body(const std::string& prompt) const {
  const json body = {
      {"model", spec_.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", spec_.temperature},
  };
  return body.dump();
}

std::string RemoteChatClient::complete(const std::string& prompt) const {
  const auto outcome =
      internal::post_json(internal::parse_endpoint(spec_.endpoint), "/chat/completions",
                          request_body(prompt), internal::env("QCG_CHAT_API_KEY"), spec_.timeout);
  if (!outcome.delivered) {
    throw LlmServiceError("chat request failed: " + outcome.transport_error, true);
  }
  if (outcome.status != 200) {
    throw LlmServiceError("chat service returned HTTP " + std::to_string(outcome.status),
                          outcome.retriable());
  }
  try {
    const json response = json::parse(outcome.body);
    const auto& content = response.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw LlmServiceError(std::string("malformed chat response: ") + e.what(), false);
  }
}

MockChatClient::MockChatClient(std::vector<std::string> script) : script_(std::move(script)) {}

std::string MockChatClient::complete(const std::string& prompt) const {
  std::lock_guard lock(mutex_);
  prompts_.push_back(prompt);
  if (script_.empty()) return prompt;
  std::string reply = script_[cursor_ % script_.size()];
  ++cursor_;
  return reply;
}

std::vector<std::string> MockChatClient::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::shared_ptr<const ChatClient> make_chat_client(const ChatSpec& spec) {
  spec.validate();
  if (spec.kind == ChatKind::RemoteChat) {
    return std::make_shared<RemoteChatClient>(spec);
  }
  return std::make_shared<MockChatClient>(spec.mock_script);
}

}  // namespace qcg

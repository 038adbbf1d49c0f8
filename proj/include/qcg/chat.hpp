// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace qcg {

enum class ChatKind { RemoteChat, MockChat };

struct ChatSpec {
  ChatKind kind = ChatKind::MockChat;
  std::string endpoint;
  std::string model_name;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  /// Canned replies for MockChat, served in order and wrapping around.
  /// Empty means echo: the mock replies with the prompt itself.
  std::vector<std::string> mock_script;

  void validate() const;
};

/// Single-turn chat completion. Implementations are safe for concurrent use.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  /// Raw completion text. Transport faults raise LlmServiceError.
  virtual std::string complete(const std::string& prompt) const = 0;
};

/// POST {endpoint}/chat/completions with {"model","messages","temperature"};
/// the first choice's message content is the reply. Bearer token from
/// QCG_CHAT_API_KEY when set.
class RemoteChatClient final : public ChatClient {
 public:
  explicit RemoteChatClient(ChatSpec spec);
  std::string complete(const std::string& prompt) const override;

  /// The exact JSON body sent for `prompt`.
  std::string request_body(const std::string& prompt) const;

 private:
  ChatSpec spec_;
};

class MockChatClient final : public ChatClient {
 public:
  explicit MockChatClient(std::vector<std::string> script = {});
  std::string complete(const std::string& prompt) const override;

  /// Every prompt received, in arrival order.
  std::vector<std::string> prompts() const;

 private:
  std::vector<std::string> script_;
  mutable std::mutex mutex_;
  mutable std::size_t cursor_ = 0;
  mutable std::vector<std::string> prompts_;
};

std::shared_ptr<const ChatClient> make_chat_client(const ChatSpec& spec);

}  // namespace qcg

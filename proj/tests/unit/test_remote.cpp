// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

// Wire-format checks against an in-process HTTP server.

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <json.hpp>
#include <mutex>
#include <thread>

// Must match the library's build of the header.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "qcg/answer.hpp"
#include "qcg/chat.hpp"
#include "qcg/embed.hpp"
#include "qcg/errors.hpp"

namespace qcg {
namespace {

using nlohmann::json;

class FakeService {
 public:
  FakeService() {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      if (status_ != 200) {
        res.status = status_;
        return;
      }
      const auto body = json::parse(req.body);
      json data = json::array();
      const auto& input = body.at("input");
      // Reverse order on purpose: clients must sort by index.
      for (std::size_t i = input.size(); i-- > 0;) {
        const double len = static_cast<double>(input[i].get<std::string>().size());
        data.push_back({{"index", i}, {"embedding", {len, 1.0, 0.0}}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   record(req);
                   ++chat_calls;
                   if (chat_calls <= failures_before_success_ || status_ != 200) {
                     res.status = status_ != 200 ? status_.load() : 503;
                     return;
                   }
                   const auto body = json::parse(req.body);
                   const auto reply =
                       "echo: " + body.at("messages")[0].at("content").get<std::string>();
                   res.set_content(
                       json{{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}}
                           .dump(),
                       "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  void set_status(int s) { status_ = s; }
  void fail_first(int n) { failures_before_success_ = n; }

  json last_body() const {
    std::lock_guard lock(mutex_);
    return json::parse(last_body_);
  }
  std::string last_auth() const {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }
  int requests() const { return requests_; }

  std::atomic<int> chat_calls{0};

 private:
  void record(const httplib::Request& req) {
    std::lock_guard lock(mutex_);
    ++requests_;
    last_body_ = req.body;
    last_auth_ = req.get_header_value("Authorization");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> status_{200};
  std::atomic<int> failures_before_success_{0};
  mutable std::mutex mutex_;
  std::string last_body_;
  std::string last_auth_;
  std::atomic<int> requests_{0};
};

EmbedderSpec remote_embedder(const FakeService& svc) {
  EmbedderSpec s;
  s.kind = EmbedderKind::Remote;
  s.endpoint = svc.endpoint();
  s.model_name = "emb-model";
  s.dim = 3;
  s.max_batch = 2;
  return s;
}

ChatSpec remote_chat(const FakeService& svc) {
  ChatSpec s;
  s.kind = ChatKind::RemoteChat;
  s.endpoint = svc.endpoint();
  s.model_name = "chat-model";
  return s;
}

TEST(RemoteEmbedder, BatchesAndRestoresOrder) {
  FakeService svc;
  const RemoteEmbedder e(remote_embedder(svc));
  const std::vector<std::string> texts{"a", "bbb", "cc", "dddd", "e"};
  const auto v = e.embed(texts);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(svc.requests(), 3);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const double len = static_cast<double>(texts[i].size());
    EXPECT_EQ(v[i][0], len) << i;
    EXPECT_EQ(v[i][1], 1.0) << i;
  }
  const auto body = svc.last_body();
  EXPECT_EQ(body.at("model"), "emb-model");
  EXPECT_EQ(body.at("input"), json::array({"e"}));
}

TEST(RemoteEmbedder, HttpErrorsMapToServiceErrors) {
  FakeService svc;
  const RemoteEmbedder e(remote_embedder(svc));
  const std::vector<std::string> texts{"x"};
  svc.set_status(503);
  try {
    e.embed(texts);
    FAIL() << "expected EmbedServiceError";
  } catch (const EmbedServiceError& err) {
    EXPECT_TRUE(err.retriable());
  }
  svc.set_status(400);
  try {
    e.embed(texts);
    FAIL() << "expected EmbedServiceError";
  } catch (const EmbedServiceError& err) {
    EXPECT_FALSE(err.retriable());
  }
}

TEST(RemoteChat, SendsOpenAiStyleBodyAndParsesReply) {
  FakeService svc;
  const RemoteChatClient chat(remote_chat(svc));
  EXPECT_EQ(chat.complete("Where is Guilin?"), "echo: Where is Guilin?");
  const auto body = svc.last_body();
  EXPECT_EQ(body.at("model"), "chat-model");
  EXPECT_EQ(body.at("temperature").get<double>(), 0.0);
  EXPECT_EQ(body.at("messages")[0].at("role"), "user");
}

TEST(RemoteChat, BearerKeyFromEnvironment) {
  FakeService svc;
  ::setenv("QCG_CHAT_API_KEY", "sk-test-123", 1);
  const RemoteChatClient chat(remote_chat(svc));
  chat.complete("hi");
  EXPECT_EQ(svc.last_auth(), "Bearer sk-test-123");
  ::unsetenv("QCG_CHAT_API_KEY");
  chat.complete("hi");
  EXPECT_EQ(svc.last_auth(), "");
}

TEST(RemoteChat, RetriableFailuresAreRetriedByGenerateAnswer) {
  FakeService svc;
  svc.fail_first(2);
  const RemoteChatClient chat(remote_chat(svc));
  EXPECT_EQ(generate_answer(chat, "q", RetryPolicy{3, std::chrono::milliseconds(1)}), "echo: q");
  EXPECT_EQ(svc.chat_calls, 3);
}

TEST(RemoteChat, ClientErrorsAreNotRetried) {
  FakeService svc;
  svc.set_status(401);
  const RemoteChatClient chat(remote_chat(svc));
  EXPECT_THROW(generate_answer(chat, "q", RetryPolicy{3, std::chrono::milliseconds(1)}),
               LlmServiceError);
  EXPECT_EQ(svc.chat_calls, 1);
}

TEST(RemoteChat, UnreachableServerIsRetriable) {
  ChatSpec spec;
  spec.kind = ChatKind::RemoteChat;
  spec.endpoint = "http://127.0.0.1:1/v1";
  spec.model_name = "m";
  spec.timeout = std::chrono::milliseconds(500);
  const RemoteChatClient chat(spec);
  try {
    chat.complete("q");
    FAIL() << "expected LlmServiceError";
  } catch (const LlmServiceError& err) {
    EXPECT_TRUE(err.retriable());
  }
  spec.endpoint = "ftp://host";
  EXPECT_THROW(RemoteChatClient{spec}, ConfigError);
}

}  // namespace
}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>

#include "qcg/answer.hpp"
#include "qcg/errors.hpp"
#include "support.hpp"

namespace qcg {
namespace {

using testing_support::fixture;
using testing_support::read_file;

Chunk chunk(const std::string& id, const std::string& text) {
  return Chunk{id, text, "doc", std::nullopt, {}};
}

ExpandedQuery expanded(const std::string& q, const std::string& concatenated = "") {
  return ExpandedQuery{Query(q), "", 1, DuplicationMode::Unit,
                       concatenated.empty() ? q : concatenated};
}

TEST(RenderPrompt, MatchesGoldenFile) {
  const std::vector<Chunk> ctx{chunk("a", "The Eiffel Tower is 330 metres tall."),
                               chunk("b", "It was completed in 1889.")};
  EXPECT_EQ(render_prompt(AnswerTemplate{}, expanded("How tall is the Eiffel Tower?"), ctx),
            read_file(fixture("golden_prompt.txt")));
}

TEST(RenderPrompt, SubstitutesOnceAndKeepsContextOrder) {
  const AnswerTemplate t("Q={query}|C={contexts}", " / ");
  const std::vector<Chunk> ctx{chunk("z", "second {query}"), chunk("a", "first")};
  EXPECT_EQ(render_prompt(t, expanded("why"), ctx), "Q=why|C=[1] second {query} / [2] first");
}

TEST(RenderPrompt, ContextsBeforeQuery) {
  const AnswerTemplate t("{contexts}\n--\n{query}?");
  const std::vector<Chunk> ctx{chunk("a", "x")};
  EXPECT_EQ(render_prompt(t, expanded("{contexts}"), ctx), "[1] x\n--\n{contexts}?");
}

TEST(RenderPrompt, QuerySlotSelectsText) {
  const AnswerTemplate t("{query}{contexts}");
  const std::vector<Chunk> ctx{chunk("a", "x")};
  const auto e = expanded("q", "q cr q cr");
  EXPECT_EQ(render_prompt(t, e, ctx, QuerySlot::Original), "q[1] x");
  EXPECT_EQ(render_prompt(t, e, ctx, QuerySlot::Expanded), "q cr q cr[1] x");
  EXPECT_THROW(render_prompt(t, e, std::span<const Chunk>{}), InputError);
}

TEST(AnswerTemplate, RequiresEachPlaceholderOnce) {
  EXPECT_THROW(AnswerTemplate("{contexts}"), TemplateError);
  EXPECT_THROW(AnswerTemplate("{query}"), TemplateError);
  EXPECT_THROW(AnswerTemplate("{query}{query}{contexts}"), TemplateError);
  EXPECT_NO_THROW(AnswerTemplate("{query}{contexts}"));
  testing_support::TempDir dir;
  testing_support::write_file(dir.path() / "t.txt", "{contexts} :: {query}");
  EXPECT_EQ(AnswerTemplate::from_file(dir.path() / "t.txt").text(), "{contexts} :: {query}");
  EXPECT_THROW(AnswerTemplate::from_file(dir.path() / "none.txt"), ConfigError);
}

TEST(DirectPrompt, Substitutes) {
  EXPECT_EQ(render_direct_prompt(kDefaultDirectTemplate, "Where is Guilin?"),
            "Answer the following question concisely.\n\nQuestion: Where is Guilin?\nAnswer:");
  EXPECT_THROW(render_direct_prompt("no slot", "x"), TemplateError);
}

class FlakyChat final : public ChatClient {
 public:
  FlakyChat(int failures, bool retriable, std::string reply)
      : failures_(failures), retriable_(retriable), reply_(std::move(reply)) {}

  std::string complete(const std::string&) const override {
    ++calls;
    if (calls <= failures_) throw LlmServiceError("HTTP 503", retriable_);
    return reply_;
  }

  mutable std::atomic<int> calls{0};

 private:
  int failures_;
  bool retriable_;
  std::string reply_;
};

constexpr RetryPolicy kFast{3, std::chrono::milliseconds(1)};

TEST(GenerateAnswer, RetriesTransientFailures) {
  const FlakyChat chat(2, true, "330 metres");
  EXPECT_EQ(generate_answer(chat, "prompt", kFast), "330 metres");
  EXPECT_EQ(chat.calls, 3);
}

TEST(GenerateAnswer, GivesUpAfterRetryBudget) {
  const FlakyChat chat(10, true, "never");
  EXPECT_THROW(generate_answer(chat, "prompt", kFast), LlmServiceError);
  EXPECT_EQ(chat.calls, 4);
}

TEST(GenerateAnswer, PermanentFailureIsNotRetried) {
  const FlakyChat chat(1, false, "never");
  EXPECT_THROW(generate_answer(chat, "prompt", kFast), LlmServiceError);
  EXPECT_EQ(chat.calls, 1);
}

TEST(GenerateAnswer, EmptyCompletionIsAnError) {
  const MockChatClient chat({" \n "});
  EXPECT_THROW(generate_answer(chat, "prompt", kFast), EmptyCompletionError);
  EXPECT_THROW(generate_answer(chat, "", kFast), InputError);
}

}  // namespace
}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "qcg/chat.hpp"
#include "qcg/core.hpp"

namespace qcg {

/// Grounded-answer prompt (our reconstruction of a context-only QA template).
extern const std::string_view kDefaultAnswerTemplate;
/// Prompt used when answering without retrieval.
extern const std::string_view kDefaultDirectTemplate;

/// Prompt template with exactly one "{query}" and one "{contexts}". Contexts
/// are rendered as "[1] text", "[2] text", ... separated by `context_joiner`.
class AnswerTemplate {
 public:
  explicit AnswerTemplate(std::string template_text = std::string(kDefaultAnswerTemplate),
                          std::string context_joiner = "\n");

  static AnswerTemplate from_file(const std::filesystem::path& path);

  const std::string& text() const noexcept { return text_; }
  const std::string& context_joiner() const noexcept { return joiner_; }

 private:
  std::string text_;
  std::string joiner_;
};

/// Which query string fills the question slot.
enum class QuerySlot {
  Original,  ///< the user's query as typed (default)
  Expanded,  ///< the duplicated expanded query
};

/// Contexts numbered in the given order. Placeholders inside inserted text are
/// not re-expanded. Empty `contexts` raises InputError.
std::string render_prompt(const AnswerTemplate& tmpl, const ExpandedQuery& expanded,
                          std::span<const Chunk> contexts, QuerySlot slot = QuerySlot::Original);

/// Fills a "{query}"-only template; used when no retrieval happens.
std::string render_direct_prompt(std::string_view tmpl, const std::string& query);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
};

/// One completion with up to `retry.max_retries` retries on retriable
/// LlmServiceError, doubling the backoff each time. An empty or
/// whitespace-only reply raises EmptyCompletionError.
std::string generate_answer(const ChatClient& client, const std::string& prompt,
                            const RetryPolicy& retry = {});

}  // namespace qcg

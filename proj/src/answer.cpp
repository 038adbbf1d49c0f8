// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/answer.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg {
namespace {

constexpr std::string_view kQuery = "{query}";
constexpr std::string_view kContexts = "{contexts}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

const std::string_view kDefaultAnswerTemplate =
    "You are a knowledgeable tourism assistant. Answer the question using ONLY the information "
    "in the numbered contexts below. If the contexts do not contain the answer, reply exactly "
    "\"insufficient information\".\n"
    "\n"
    "Contexts:\n"
    "{contexts}\n"
    "\n"
    "Question: {query}\n"
    "Answer:";

const std::string_view kDefaultDirectTemplate =
    "Answer the following question concisely.\n"
    "\n"
    "Question: {query}\n"
    "Answer:";

AnswerTemplate::AnswerTemplate(std::string template_text, std::string context_joiner)
    : text_(std::move(template_text)), joiner_(std::move(context_joiner)) {
  if (count_occurrences(text_, kQuery) != 1) {
    throw TemplateError("answer template must contain {query} exactly once");
  }
  if (count_occurrences(text_, kContexts) != 1) {
    throw TemplateError("answer template must contain {contexts} exactly once");
  }
}

AnswerTemplate AnswerTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return AnswerTemplate(ss.str());
}

std::string render_prompt(const AnswerTemplate& tmpl, const ExpandedQuery& expanded,
                          std::span<const Chunk> contexts, QuerySlot slot) {
  if (contexts.empty()) throw InputError("render_prompt: no contexts");

  std::string rendered_contexts;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (i > 0) rendered_contexts += tmpl.context_joiner();
    rendered_contexts += "[" + std::to_string(i + 1) + "] " + contexts[i].text;
  }
  const std::string& query =
      slot == QuerySlot::Original ? expanded.original.text() : expanded.concatenated;

  // Single left-to-right pass so that inserted text is never re-scanned.
  const std::string& t = tmpl.text();
  const std::size_t q = t.find(kQuery);
  const std::size_t c = t.find(kContexts);
  std::string out;
  out.reserve(t.size() + rendered_contexts.size() + query.size());
  if (q < c) {
    out.append(t, 0, q).append(query);
    out.append(t, q + kQuery.size(), c - q - kQuery.size()).append(rendered_contexts);
    out.append(t, c + kContexts.size());
  } else {
    out.append(t, 0, c).append(rendered_contexts);
    out.append(t, c + kContexts.size(), q - c - kContexts.size()).append(query);
    out.append(t, q + kQuery.size());
  }
  return out;
}

std::string render_direct_prompt(std::string_view tmpl, const std::string& query) {
  if (count_occurrences(tmpl, kQuery) != 1) {
    throw TemplateError("direct template must contain {query} exactly once");
  }
  const std::size_t q = tmpl.find(kQuery);
  std::string out(tmpl.substr(0, q));
  out += query;
  out += tmpl.substr(q + kQuery.size());
  return out;
}

std::string generate_answer(const ChatClient& client, const std::string& prompt,
                            const RetryPolicy& retry) {
  if (prompt.empty()) throw InputError("generate_answer: empty prompt");
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      std::string reply = client.complete(prompt);
      if (text::trim(reply).empty()) {
        throw EmptyCompletionError("chat model returned an empty completion");
      }
      return reply;
    } catch (const LlmServiceError& e) {
      if (!e.retriable() || attempt >= retry.max_retries) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qcg/bm25.hpp"
#include "qcg/chat.hpp"
#include "qcg/core.hpp"

namespace qcg {

enum class ExtractionKind { LlmPrompted, DeterministicKeyword };

/// Role-assignment prompt for critical-information extraction. This wording is
/// our own reconstruction; override it with a template file if needed.
extern const std::string_view kDefaultExtractionTemplate;

struct ExtractionSpec {
  ExtractionKind kind = ExtractionKind::DeterministicKeyword;
  std::string prompt_template = std::string(kDefaultExtractionTemplate);
  int max_keywords = 5;

  /// Template must contain "{query}" exactly once; max_keywords >= 1.
  void validate() const;
};

/// Reads a plain-text template file containing one "{query}" placeholder.
std::string load_prompt_template(const std::filesystem::path& path);

struct CriticalInfo {
  std::string text;
  /// Set when the LLM returned nothing and keyword extraction was used.
  bool fell_back = false;
};

/// English and Chinese function words ignored by keyword extraction.
bool is_stopword(std::string_view lowercase_token);

/// Keyword path: distinct non-stopword query tokens ranked by IDF (highest
/// first, ties by first position), at most `max_keywords`, joined by spaces in
/// their original case. With no corpus statistics all IDFs tie. A query made
/// only of stopwords yields the trimmed query text.
std::string extract_keywords(const Query& query, int max_keywords, const CorpusStats* stats);

/// LlmPrompted fills the template and sends one request to `llm`; the reply is
/// trimmed. An empty reply falls back to keyword extraction. LlmPrompted
/// without a client raises ConfigError.
CriticalInfo extract_critical_info(const Query& query, const ExtractionSpec& spec,
                                   const ChatClient* llm, const CorpusStats* stats = nullptr);

/// Unit mode:         join((q + " " + cr) x n, " ")
/// CriticalOnly mode: q + " " + join(cr x n, " ")
/// n < 1 raises InputError.
ExpandedQuery build_expanded_query(const Query& query, const std::string& critical_info, int n,
                                   DuplicationMode mode = DuplicationMode::Unit);

}  // namespace qcg

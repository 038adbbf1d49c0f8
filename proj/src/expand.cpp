// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/expand.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg {
namespace {

constexpr std::string_view kPlaceholder = "{query}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      // English
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
      "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
      "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
      "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
      "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
      "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
      "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
      "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
      "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
      "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
      "yourselves", "s", "t", "don", "also", "may", "might", "must", "shall", "many", "much",
      // Chinese function characters (tokens are single Han characters)
      "\xE7\x9A\x84",  // 的
      "\xE4\xBA\x86",  // 了
      "\xE6\x98\xAF",  // 是
      "\xE5\x9C\xA8",  // 在
      "\xE5\x90\x97",  // 吗
      "\xE5\x91\xA2",  // 呢
      "\xE5\x92\x8C",  // 和
      "\xE4\xB8\x8E",  // 与
      "\xE6\x88\x96",  // 或
      "\xE5\x90\xA7",  // 吧
      "\xE5\x95\x8A",  // 啊
      "\xE4\xB9\x9F",  // 也
      "\xE9\x83\xBD",  // 都
      "\xE8\xBF\x99",  // 这
      "\xE9\x82\xA3",  // 那
      "\xE5\x93\xAA",  // 哪
      "\xE4\xBB\x80",  // 什
      "\xE4\xB9\x88",  // 么
      "\xE6\x9C\x89",  // 有
      "\xE6\x88\x91",  // 我
      "\xE4\xBD\xA0",  // 你
      "\xE4\xBB\xAC",  // 们
      "\xE4\xB8\xAA",  // 个
      "\xE4\xBA\x9B",  // 些
  };
  return words;
}

}  // namespace

const std::string_view kDefaultExtractionTemplate =
    "You are a keyword extraction assistant for tourism questions. Read the user's question and "
    "extract its critical information: the key places, attractions, entities, activities, times "
    "and constraints that a search engine needs in order to find the answer.\n"
    "\n"
    "Question: {query}\n"
    "\n"
    "Output only the critical phrases, separated by spaces, with no explanation.";

void ExtractionSpec::validate() const {
  if (max_keywords < 1) throw ConfigError("max_keywords must be >= 1");
  if (kind == ExtractionKind::LlmPrompted &&
      count_occurrences(prompt_template, kPlaceholder) != 1) {
    throw TemplateError("extraction template must contain {query} exactly once");
  }
}

std::string load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string tmpl = ss.str();
  if (count_occurrences(tmpl, kPlaceholder) != 1) {
    throw TemplateError(path.string() + ": template must contain {query} exactly once");
  }
  return tmpl;
}

bool is_stopword(std::string_view lowercase_token) {
  return stopwords().contains(lowercase_token);
}

std::string extract_keywords(const Query& query, int max_keywords, const CorpusStats* stats) {
  if (max_keywords < 1) throw ConfigError("max_keywords must be >= 1");
  const auto original = text::tokenize(query.text(), false);
  const auto folded = text::tokenize(query.text(), true);

  struct Candidate {
    std::size_t position;
    double idf;
  };
  std::vector<Candidate> candidates;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < folded.size() && i < original.size(); ++i) {
    if (is_stopword(folded[i]) || !seen.insert(folded[i]).second) continue;
    candidates.push_back({i, stats != nullptr ? stats->idf(folded[i]) : 0.0});
  }
  if (candidates.empty()) {
    return std::string(text::trim(query.text()));
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.idf > b.idf; });
  if (candidates.size() > static_cast<std::size_t>(max_keywords)) {
    candidates.resize(static_cast<std::size_t>(max_keywords));
  }
  std::string out;
  for (const auto& c : candidates) {
    if (!out.empty()) out.push_back(' ');
    out += original[c.position];
  }
  return out;
}

CriticalInfo extract_critical_info(const Query& query, const ExtractionSpec& spec,
                                   const ChatClient* llm, const CorpusStats* stats) {
  spec.validate();
  if (spec.kind == ExtractionKind::DeterministicKeyword) {
    return {extract_keywords(query, spec.max_keywords, stats), false};
  }
  if (llm == nullptr) {
    throw ConfigError("LLM-prompted extraction requires a chat client");
  }
  std::string prompt = spec.prompt_template;
  prompt.replace(prompt.find(kPlaceholder), kPlaceholder.size(), query.text());
  const std::string reply = llm->complete(prompt);
  std::string stripped(text::trim(reply));
  if (stripped.empty()) {
    return {extract_keywords(query, spec.max_keywords, stats), true};
  }
  return {std::move(stripped), false};
}

ExpandedQuery build_expanded_query(const Query& query, const std::string& critical_info, int n,
                                   DuplicationMode mode) {
  if (n < 1) throw InputError("duplication count must be >= 1");
  auto join_copies = [n](const std::string& unit) {
    std::string out;
    out.reserve(unit.size() * static_cast<std::size_t>(n) + static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (i > 0) out.push_back(' ');
      out += unit;
    }
    return out;
  };

  std::string concatenated;
  if (mode == DuplicationMode::Unit) {
    concatenated =
        join_copies(critical_info.empty() ? query.text() : query.text() + " " + critical_info);
  } else {
    concatenated = critical_info.empty() ? query.text()
                                         : query.text() + " " + join_copies(critical_info);
  }
  return ExpandedQuery{query, critical_info, n, mode, std::move(concatenated)};
}

}  // namespace qcg

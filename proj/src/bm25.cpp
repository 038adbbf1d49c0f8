// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/bm25.hpp"

#include <cmath>

#include "internal/top_n.hpp"
#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg {

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw ConfigError("bm25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25 b must lie in [0, 1]");
  if (!(delta >= 0.0)) throw ConfigError("bm25l delta must be non-negative");
}

CorpusStats::DocTerms count_terms(std::string_view text) {
  CorpusStats::DocTerms doc;
  for (auto& token : text::tokenize(text)) {
    ++doc.tf[std::move(token)];
    ++doc.length;
  }
  return doc;
}

CorpusStats CorpusStats::build(const VectorStore& store) {
  CorpusStats stats;
  store.scan([&](const Chunk& chunk, const EmbeddingVector&) { stats.add(chunk); });
  stats.finish();
  return stats;
}

CorpusStats CorpusStats::build(std::span<const Chunk> chunks) {
  CorpusStats stats;
  for (const auto& c : chunks) stats.add(c);
  stats.finish();
  return stats;
}

void CorpusStats::add(const Chunk& chunk) {
  DocTerms doc = count_terms(chunk.text);
  for (const auto& [term, count] : doc.tf) {
    ++df_[term];
  }
  total_length_ += doc.length;
  ++doc_count_;
  docs_.insert_or_assign(chunk.id, std::move(doc));
}

void CorpusStats::finish() {
  avg_length_ = doc_count_ == 0 ? 0.0
                                : static_cast<double>(total_length_) / static_cast<double>(doc_count_);
}

std::size_t CorpusStats::df(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double CorpusStats::idf(const std::string& term) const {
  const double n = static_cast<double>(doc_count_);
  const double d = static_cast<double>(df(term));
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

const CorpusStats::DocTerms* CorpusStats::doc(const std::string& chunk_id) const {
  auto it = docs_.find(chunk_id);
  return it == docs_.end() ? nullptr : &it->second;
}

double bm25_score(std::span<const std::string> query_terms, const CorpusStats::DocTerms& doc,
                  const CorpusStats& stats, const Bm25Params& params, Bm25Variant variant) {
  if (query_terms.empty()) throw InputError("bm25: query has no terms");
  params.validate();
  const double avg = stats.avg_length() > 0.0 ? stats.avg_length() : 1.0;
  const double norm = 1.0 - params.b + params.b * static_cast<double>(doc.length) / avg;

  double score = 0.0;
  for (const auto& term : query_terms) {
    auto it = doc.tf.find(term);
    if (it == doc.tf.end()) continue;
    const double tf = static_cast<double>(it->second);
    const double idf = stats.idf(term);
    if (variant == Bm25Variant::Bm25) {
      score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
    } else {
      const double shifted = tf / norm + params.delta;
      score += idf * (params.k1 + 1.0) * shifted / (params.k1 + shifted);
    }
  }
  return score;
}

double bm25_score(std::span<const std::string> query_terms, const Chunk& chunk,
                  const CorpusStats& stats, const Bm25Params& params, Bm25Variant variant) {
  return bm25_score(query_terms, count_terms(chunk.text), stats, params, variant);
}

std::vector<ScoredChunk> retrieve_bm25(const VectorStore& store, const CorpusStats& stats,
                                       const Query& query, std::size_t n, const Bm25Params& params,
                                       Bm25Variant variant) {
  if (n == 0) throw InputError("retrieve_bm25: n must be positive");
  if (store.empty()) throw EmptyStoreError("vector store is empty");
  const auto terms = text::tokenize(query.text());
  if (terms.empty()) throw InputError("bm25: query '" + query.text() + "' has no terms");

  internal::TopNCollector top(n);
  store.scan([&](const Chunk& chunk, const EmbeddingVector&) {
    const auto* doc = stats.doc(chunk.id);
    const double s = doc != nullptr ? bm25_score(terms, *doc, stats, params, variant)
                                    : bm25_score(terms, chunk, stats, params, variant);
    top.offer(s, chunk);
  });
  return top.take();
}

std::vector<ScoredChunk> retrieve_bm25(const VectorStore& store, const Query& query, std::size_t n,
                                       const Bm25Params& params, Bm25Variant variant) {
  return retrieve_bm25(store, CorpusStats::build(store), query, n, params, variant);
}

}  // namespace qcg

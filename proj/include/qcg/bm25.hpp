// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qcg/core.hpp"
#include "qcg/store.hpp"

namespace qcg {

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 0.5;  // BM25L only

  void validate() const;
};

enum class Bm25Variant { Bm25, Bm25L };

/// Document frequencies, lengths and per-chunk term counts for one corpus.
class CorpusStats {
 public:
  struct DocTerms {
    std::unordered_map<std::string, std::size_t> tf;
    std::size_t length = 0;
  };

  static CorpusStats build(const VectorStore& store);
  static CorpusStats build(std::span<const Chunk> chunks);

  std::size_t doc_count() const noexcept { return doc_count_; }
  double avg_length() const noexcept { return avg_length_; }
  std::size_t df(const std::string& term) const;

  /// ln((N - df + 0.5) / (df + 0.5) + 1); stays positive for every df.
  double idf(const std::string& term) const;

  /// Cached term counts for a chunk seen during build, or nullptr.
  const DocTerms* doc(const std::string& chunk_id) const;

 private:
  void add(const Chunk& chunk);
  void finish();

  std::size_t doc_count_ = 0;
  std::size_t total_length_ = 0;
  double avg_length_ = 0.0;
  std::unordered_map<std::string, std::size_t> df_;
  std::unordered_map<std::string, DocTerms> docs_;
};

CorpusStats::DocTerms count_terms(std::string_view text);

/// BM25:  sum_t IDF(t) * tf*(k1+1) / (tf + k1*(1 - b + b*len/avglen))
/// BM25L: sum_t IDF(t) * (k1+1)*(c+delta) / (k1 + c + delta),
///        c = tf / (1 - b + b*len/avglen), shift applied only when tf > 0.
/// `query_terms` is a token list (duplicates count); empty raises InputError.
double bm25_score(std::span<const std::string> query_terms, const Chunk& chunk,
                  const CorpusStats& stats, const Bm25Params& params, Bm25Variant variant);

/// Same kernel on precomputed term counts.
double bm25_score(std::span<const std::string> query_terms, const CorpusStats::DocTerms& doc,
                  const CorpusStats& stats, const Bm25Params& params, Bm25Variant variant);

/// Lexical top-n, best first, ties by ascending chunk id.
std::vector<ScoredChunk> retrieve_bm25(const VectorStore& store, const CorpusStats& stats,
                                       const Query& query, std::size_t n, const Bm25Params& params,
                                       Bm25Variant variant);

/// Builds corpus statistics on the fly.
std::vector<ScoredChunk> retrieve_bm25(const VectorStore& store, const Query& query, std::size_t n,
                                       const Bm25Params& params, Bm25Variant variant);

}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcg {

/// Half-open code-point offsets [start, end) into the source document.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
};

/// One retrievable text unit.
struct Chunk {
  std::string id;
  std::string text;
  std::string doc_id;
  std::optional<Span> span;
  std::map<std::string, std::string> metadata;

  bool operator==(const Chunk&) const = default;
};

/// Throws InputError if the chunk breaks its invariants (empty id or text,
/// inverted span).
void validate_chunk(const Chunk& chunk);

/// Dense, finite, non-empty real vector.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

class Query {
 public:
  explicit Query(std::string text, std::optional<std::string> id = std::nullopt);

  const std::string& text() const noexcept { return text_; }
  const std::optional<std::string>& id() const noexcept { return id_; }

 private:
  std::string text_;
  std::optional<std::string> id_;
};

/// How the (query, critical info) pair is repeated.
enum class DuplicationMode {
  Unit,          ///< (q + cr) repeated n times
  CriticalOnly,  ///< q once, then cr repeated n times
};

struct ExpandedQuery {
  Query original;
  std::string critical_info;
  int n = 1;
  DuplicationMode mode = DuplicationMode::Unit;
  std::string concatenated;
};

struct ScoredChunk {
  Chunk chunk;
  double score = 0.0;
};

enum class GraphMode { Star, Full };

std::string_view to_string(GraphMode mode) noexcept;
GraphMode parse_graph_mode(std::string_view text);

/// Query node at index 0, candidate chunks at 1..N. Edge weights live in a
/// dense row-major (N+1)x(N+1) matrix.
class ChunksGraph {
 public:
  /// Validates symmetry, zero diagonal, non-negativity and, in Star mode,
  /// the absence of chunk-chunk edges. Scores start at S[0]=1, S[i>0]=0.
  ChunksGraph(std::size_t node_count, std::vector<double> weights, GraphMode mode);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t chunk_count() const noexcept { return node_count_ - 1; }
  GraphMode mode() const noexcept { return mode_; }

  double weight(std::size_t i, std::size_t j) const { return weights_[i * node_count_ + j]; }
  std::span<const double> weights() const noexcept { return weights_; }

  std::span<const double> scores() const noexcept { return scores_; }
  void set_scores(std::vector<double> scores);

 private:
  std::size_t node_count_;
  std::vector<double> weights_;
  std::vector<double> scores_;
  GraphMode mode_;
};

struct RerankConfig {
  int top_n = 10;
  int top_k = 3;
  int n_dup = 3;
  double damping = 0.85;
  int max_iters = 100;
  double tolerance = 1e-6;
  GraphMode graph_mode = GraphMode::Full;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// (a.b) / (|a||b|). Throws DimensionError on mismatched sizes and
/// DegenerateVectorError when either vector has zero norm.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/core.hpp"

#include <cmath>
#include <string>

#include "qcg/errors.hpp"

namespace qcg {

void validate_chunk(const Chunk& chunk) {
  if (chunk.id.empty()) {
    throw InputError("chunk id must not be empty");
  }
  if (chunk.text.empty()) {
    throw InputError("chunk '" + chunk.id + "' has empty text");
  }
  if (chunk.span && chunk.span->start >= chunk.span->end) {
    throw InputError("chunk '" + chunk.id + "' has an empty or inverted span");
  }
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw DimensionError("embedding vector must have positive dimension");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw InputError("embedding vector contains a non-finite entry");
    }
  }
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values_) {
    sum += v * v;
  }
  return std::sqrt(sum);
}

Query::Query(std::string text, std::optional<std::string> id)
    : text_(std::move(text)), id_(std::move(id)) {
  if (text_.empty()) {
    throw InputError("query text must not be empty");
  }
}

std::string_view to_string(GraphMode mode) noexcept {
  return mode == GraphMode::Star ? "star" : "full";
}

GraphMode parse_graph_mode(std::string_view text) {
  if (text == "star") return GraphMode::Star;
  if (text == "full") return GraphMode::Full;
  throw ConfigError("unknown graph mode '" + std::string(text) + "' (expected star|full)");
}

ChunksGraph::ChunksGraph(std::size_t node_count, std::vector<double> weights, GraphMode mode)
    : node_count_(node_count), weights_(std::move(weights)), mode_(mode) {
  if (node_count_ < 2) {
    throw InputError("chunks graph needs the query node and at least one chunk");
  }
  if (weights_.size() != node_count_ * node_count_) {
    throw DimensionError("weight matrix size does not match node count");
  }
  for (std::size_t i = 0; i < node_count_; ++i) {
    if (weight(i, i) != 0.0) {
      throw InputError("chunks graph has a self loop at node " + std::to_string(i));
    }
    for (std::size_t j = i + 1; j < node_count_; ++j) {
      const double w = weight(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw InputError("edge weights must be finite and non-negative");
      }
      if (w != weight(j, i)) {
        throw InputError("edge weights must be symmetric");
      }
      if (mode_ == GraphMode::Star && i != 0 && w != 0.0) {
        throw InputError("star graph cannot carry chunk-chunk edges");
      }
    }
  }
  scores_.assign(node_count_, 0.0);
  scores_[0] = 1.0;
}

void ChunksGraph::set_scores(std::vector<double> scores) {
  if (scores.size() != node_count_) {
    throw DimensionError("score vector size does not match node count");
  }
  scores_ = std::move(scores);
}

void RerankConfig::validate() const {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (top_k > top_n) throw ConfigError("top_k must not exceed top_n");
  if (n_dup < 1) throw ConfigError("n_dup must be >= 1");
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("damping must lie in (0, 1)");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("cosine_similarity: dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateVectorError("cosine_similarity: zero-norm vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
  }
  return dot / (na * nb);
}

}  // namespace qcg

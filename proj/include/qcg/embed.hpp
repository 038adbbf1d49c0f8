// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qcg/core.hpp"

namespace qcg {

enum class EmbedderKind { Remote, DeterministicLocal };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::DeterministicLocal;
  std::string endpoint;    // Remote only
  std::string model_name;  // Remote only
  std::size_t dim = 256;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 32;

  void validate() const;
};

/// Maps texts to vectors of a fixed dimension. Implementations are safe to
/// call from several threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;

  /// One vector per input, same order. Inputs are canonicalized (NFC, trimmed)
  /// before use; a text that is empty after trimming raises InputError.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;

  virtual std::size_t dim() const noexcept = 0;

  /// Identifies the model and output space; stored with every vector store.
  virtual std::string fingerprint() const = 0;
};

/// Signed feature hashing of lower-cased character 3-grams, L2-normalized.
/// Output depends only on the text bytes, so it is stable across runs and
/// platforms.
class DeterministicLocalEmbedder final : public Embedder {
 public:
  explicit DeterministicLocalEmbedder(std::size_t dim);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  std::size_t dim() const noexcept override { return dim_; }
  std::string fingerprint() const override;

  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
};

/// Client for an `/embeddings` endpoint speaking the common
/// {"model","input"} -> {"data":[{"index","embedding"}]} convention.
/// Reads a bearer token from QCG_EMBED_API_KEY when set.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderSpec spec);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  std::size_t dim() const noexcept override { return spec_.dim; }
  std::string fingerprint() const override;

 private:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> batch) const;

  EmbedderSpec spec_;
};

/// Write-through disk cache in front of another embedder. One JSON-lines file
/// per embedder fingerprint, each line {"h": sha256(text), "v": [...]}.
class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<const Embedder> inner, std::filesystem::path cache_dir);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  std::size_t dim() const noexcept override { return inner_->dim(); }
  std::string fingerprint() const override { return inner_->fingerprint(); }

  std::size_t cached_entries() const;
  const std::filesystem::path& cache_file() const noexcept { return cache_file_; }

 private:
  std::shared_ptr<const Embedder> inner_;
  std::filesystem::path cache_file_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, EmbeddingVector> entries_;
};

/// Builds the embedder described by `spec`, wrapped in a disk cache when
/// `cache_dir` is non-empty.
std::shared_ptr<const Embedder> make_embedder(const EmbedderSpec& spec,
                                              const std::filesystem::path& cache_dir = {});

/// Convenience wrapper: validates inputs and embeds with a fresh embedder.
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbedderSpec& spec);

}  // namespace qcg

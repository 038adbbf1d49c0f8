// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "qcg/core.hpp"
#include "qcg/embed.hpp"

namespace qcg {

/// Splitting rule for long documents. `split_on` is a list of priority levels;
/// each level holds interchangeable separators. The highest level with a
/// usable occurrence in the window decides the cut, and within a level the
/// latest occurrence wins.
struct ChunkingPolicy {
  std::size_t max_chars = 512;
  std::size_t overlap_chars = 64;
  std::vector<std::vector<std::string>> split_on = {
      {"\n\n"},
      {". ", "! ", "? ", ".\n", "!\n", "?\n", "\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F"},
      {" ", "\n", "\t"},
  };

  void validate() const;
};

/// Splits `text` into chunks no longer than max_chars code points. Adjacent
/// chunks overlap by at most overlap_chars. Chunk ids are "<doc_id>#<ordinal>"
/// and spans are code-point offsets into `text`. Whitespace-only windows are
/// dropped.
std::vector<Chunk> chunk_document(const std::string& doc_id, const std::string& text,
                                  const ChunkingPolicy& policy = {});

/// One line of an input corpus file.
struct Document {
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> meta;
};

/// Reads {"doc_id","text","meta"?} JSON-lines. Non-string meta values are
/// kept as their JSON serialization.
std::vector<Document> load_corpus_jsonl(const std::filesystem::path& path);

/// Chunk text plus embedding, keyed by chunk id. Readers share the store
/// concurrently; ingest and load-time mutation take an exclusive lock.
class VectorStore {
 public:
  VectorStore();
  VectorStore(VectorStore&&) noexcept;
  VectorStore& operator=(VectorStore&&) noexcept;
  ~VectorStore();

  /// Embeds and stores `chunks`. Duplicate ids raise DuplicateIdError unless
  /// `upsert` is set; an embedder whose fingerprint or dim disagrees with the
  /// existing contents raises StoreSchemaError. All-or-nothing.
  void ingest(std::span<const Chunk> chunks, const Embedder& embedder, bool upsert = false);

  /// Lower-level insert of precomputed vectors; same checks as ingest.
  void insert(std::span<const Chunk> chunks, std::span<const EmbeddingVector> vectors,
              const std::string& embedder_fingerprint, bool upsert = false);

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t dim() const;
  std::string embedder_fingerprint() const;

  std::optional<Chunk> find(const std::string& id) const;
  std::optional<EmbeddingVector> vector(const std::string& id) const;

  /// Visits every entry in ascending id order under a shared lock.
  void scan(const std::function<void(const Chunk&, const EmbeddingVector&)>& visit) const;

  /// Writes chunks.jsonl, vectors.bin and manifest.json into `dir`.
  void save(const std::filesystem::path& dir) const;
  static VectorStore load(const std::filesystem::path& dir);

 private:
  struct Entry {
    Chunk chunk;
    EmbeddingVector vector;
  };

  std::unique_ptr<std::shared_mutex> mutex_;
  std::map<std::string, Entry> entries_;
  std::size_t dim_ = 0;
  std::string fingerprint_;
};

/// Exact cosine top-n over the whole store, best first, ties by ascending id.
/// Throws EmptyStoreError, DimensionError.
std::vector<ScoredChunk> retrieve_top_n(const VectorStore& store, const EmbeddingVector& query_vec,
                                        std::size_t n);

}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcg/answer.hpp"
#include "qcg/bm25.hpp"
#include "qcg/chat.hpp"
#include "qcg/core.hpp"
#include "qcg/embed.hpp"
#include "qcg/expand.hpp"
#include "qcg/graph.hpp"
#include "qcg/store.hpp"

namespace qcg {

enum class PipelineMode { WoRag, WRag, Qcg, Bm25, Bm25L };

std::string_view to_string(PipelineMode mode) noexcept;
PipelineMode parse_pipeline_mode(std::string_view text);

/// Everything needed to run ingest/ask/eval. Serialized as versioned JSON.
struct PipelineConfig {
  static constexpr int kVersion = 1;

  EmbedderSpec embedder;
  ChatSpec chat;
  RerankConfig rerank;
  ExtractionSpec extraction;
  ChunkingPolicy chunking;
  Bm25Params bm25;
  DuplicationMode duplication = DuplicationMode::Unit;
  QuerySlot query_slot = QuerySlot::Original;

  std::string extraction_template_path;
  std::string answer_template_path;
  std::string direct_template_path;
  std::string store_path;
  std::string cache_dir;

  int jobs = 0;  ///< 0 = min(hardware threads, 8)
  std::uint64_t seed = 42;

  /// Checks nested invariants and that referenced template files exist.
  void validate() const;
};

/// Named hyperparameter presets: "cultour" (K=3, n=3), "iirc" (K=2, n=2),
/// "strategyqa" (K=5), "hotpotqa" (K=2), "squad" (K=1), "musique" (K=1).
void apply_preset(PipelineConfig& config, std::string_view preset);

std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// SHA-256 of the canonical JSON form; identifies a run configuration.
/// sha256 of the canonical config JSON, leaving out store, cache_dir and jobs.
std::string config_hash(const PipelineConfig& config);

int effective_jobs(const PipelineConfig& config);

struct AskResult {
  PipelineMode mode = PipelineMode::Qcg;
  std::string answer;
  std::string prompt;
  std::vector<ScoredChunk> candidates;  ///< first-stage results
  std::vector<ScoredChunk> contexts;    ///< the K chunks given to the chat model
  std::vector<std::string> ranked_ids;  ///< final candidate order
  std::optional<std::string> critical_info;
  bool extraction_fell_back = false;
  std::optional<std::string> expanded_query;
  std::vector<double> expanded_sims;  ///< similarity to the expanded query, candidate order
  int iterations = 0;
  bool converged = false;
};

/// Retrieval, expansion, graph rerank and answer synthesis over one store.
/// `ask` is const and safe to call from several threads.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::shared_ptr<const VectorStore> store,
           std::shared_ptr<const Embedder> embedder, std::shared_ptr<const ChatClient> chat);

  /// Builds embedder and chat client from the config and loads the store
  /// from config.store_path.
  static Pipeline open(const PipelineConfig& config);

  AskResult ask(const Query& query, PipelineMode mode,
                const IterationObserver& observer = {}) const;

  /// Steps up to the chunks graph without calling the chat model.
  struct GraphTrace {
    std::vector<ScoredChunk> candidates;
    ExpandedQuery expanded;
    bool extraction_fell_back = false;
    std::vector<double> sims;
    RerankResult rerank;
  };
  GraphTrace trace_graph(const Query& query, const IterationObserver& observer = {}) const;

  const PipelineConfig& config() const noexcept { return config_; }
  const VectorStore& store() const noexcept { return *store_; }
  const CorpusStats& corpus_stats() const noexcept { return stats_; }

 private:
  std::vector<EmbeddingVector> candidate_vectors(const std::vector<ScoredChunk>& candidates) const;

  PipelineConfig config_;
  std::shared_ptr<const VectorStore> store_;
  std::shared_ptr<const Embedder> embedder_;
  std::shared_ptr<const ChatClient> chat_;
  CorpusStats stats_;
  AnswerTemplate answer_template_;
  std::string direct_template_;
};

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::size_t dim = 0;
  std::size_t store_size = 0;
};

/// Chunks every document, embeds, and writes the store to `store_dir`,
/// extending an existing store there if present.
IngestSummary ingest_corpus(const std::vector<Document>& docs, const PipelineConfig& config,
                            const std::filesystem::path& store_dir, bool upsert = false);

}  // namespace qcg

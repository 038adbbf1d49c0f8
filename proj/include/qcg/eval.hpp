// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcg/pipeline.hpp"

namespace qcg {

struct QaExample {
  std::string id;
  std::string question;
  std::vector<std::string> answers;  ///< non-empty
  std::optional<std::vector<std::string>> gold_chunk_ids;
};

/// JSON lines of {"id", "question", "answers": [...], "gold_chunk_ids": [...]?}.
/// Duplicate ids, empty answers or blank questions raise InputError with the
/// offending line number.
std::vector<QaExample> load_dataset_jsonl(const std::filesystem::path& path);

struct ExampleScores {
  std::string id;
  std::map<std::string, double> scores;  ///< metric name -> value x100, 2 decimals
  std::vector<std::string> context_ids;
  bool unparseable = false;  ///< binary accuracy could not read the answer
  std::optional<std::string> error;  ///< "<category>: <message>" when the example failed
  std::vector<std::string> warnings;
};

struct MetricReport {
  std::string config_hash;
  PipelineMode mode = PipelineMode::Qcg;
  GraphMode graph_mode = GraphMode::Full;
  int top_n = 0;
  int top_k = 0;
  int n_dup = 0;
  std::vector<std::string> metrics;       ///< enabled metric names, report order
  std::map<std::string, double> means;    ///< over examples that have the metric
  std::vector<ExampleScores> examples;    ///< sorted by id
  std::size_t failures = 0;
  std::size_t unparseable = 0;
  std::optional<std::string> generated_at;  ///< only when requested; breaks byte equality

  std::string to_json() const;
  std::string to_markdown() const;
};

/// Scores the pipeline on every example with `jobs` workers (0 = from config).
/// Text metrics take the best value over the acceptable answers; BLEU-1 uses
/// all of them as references. Accuracy is enabled when every reference
/// answer reads as true/false/yes/no. MRR@1/10 and nDCG@1/10 are added when
/// any example carries gold chunk ids. A failing example is recorded and
/// excluded from the means.
MetricReport run_experiment(const Pipeline& pipeline, const std::vector<QaExample>& dataset,
                            PipelineMode mode, int jobs = 0);

enum class SweepParameter { NDup, TopN };

std::string_view to_string(SweepParameter p) noexcept;
SweepParameter parse_sweep_parameter(std::string_view text);

/// {1,2,3,4,5} for n_dup and {5,10,15,20} for top_n.
std::vector<int> default_sweep_values(SweepParameter p);

struct SweepPoint {
  int value = 0;
  MetricReport report;
  double wall_seconds = 0.0;
};

/// One run_experiment per value, each on a copy of `base` with the parameter
/// replaced. Store, embedder and chat client are shared across points.
std::vector<SweepPoint> run_sweep(const PipelineConfig& base,
                                  std::shared_ptr<const VectorStore> store,
                                  std::shared_ptr<const Embedder> embedder,
                                  std::shared_ptr<const ChatClient> chat,
                                  const std::vector<QaExample>& dataset, PipelineMode mode,
                                  SweepParameter parameter, const std::vector<int>& values,
                                  int jobs = 0);

/// JSON summary of a sweep: parameter, and per point the value, report file
/// name and wall-clock seconds.
std::string sweep_summary_json(SweepParameter parameter, const std::vector<SweepPoint>& points,
                               const std::string& config_hash);

struct ExportSummary {
  std::size_t examples = 0;
  std::size_t with_replacement = 0;  ///< examples whose negatives had to repeat
};

/// Writes one {"query", "pos", "neg"} JSON object per line. Positives are the
/// example's answers followed by the text of its gold chunks found in
/// `store` (may be null). Negatives are drawn uniformly without replacement,
/// from a generator seeded with `seed`, out of the distinct positives of the
/// other examples, excluding anything equal to one of the example's own
/// positives. When too few remain the rest are drawn with replacement.
ExportSummary export_finetune_corpus(const std::vector<QaExample>& examples,
                                     const VectorStore* store, std::size_t negatives_per_example,
                                     std::uint64_t seed, std::ostream& out);

}  // namespace qcg

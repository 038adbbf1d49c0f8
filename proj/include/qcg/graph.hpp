// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qcg/core.hpp"
#include "qcg/embed.hpp"

namespace qcg {

/// Cosine between the expanded-query vector and each candidate vector, in
/// candidate order.
std::vector<double> score_candidates(const EmbeddingVector& query_vec,
                                     std::span<const EmbeddingVector> candidate_vecs);

/// Embeds expanded.concatenated and every candidate text with `embedder`.
std::vector<double> score_candidates(const ExpandedQuery& expanded,
                                     std::span<const ScoredChunk> candidates,
                                     const Embedder& embedder);

/// Query node 0 linked to chunk i+1 with weight max(sims[i], 0). Full mode also
/// links chunk pairs with max(cos(v_i, v_j), 0) and needs `chunk_vectors`.
/// Throws DegenerateGraphError when no query edge survives clamping.
ChunksGraph build_graph(std::span<const double> sims, GraphMode mode,
                        std::optional<std::span<const EmbeddingVector>> chunk_vectors = {});

/// Called after every iteration t >= 1 with the new scores and the L1 change.
using IterationObserver =
    std::function<void(int t, std::span<const double> scores, double delta_l1)>;

struct Propagation {
  std::vector<double> scores;  ///< length N+1, query node first
  int iterations = 0;
  bool converged = false;
  double last_delta = 0.0;
};

/// Damped synchronous propagation from the graph's current scores:
///   S'(i) = (1-d) S(i) + d * sum_j w_ji / (sum_k w_jk) * S(j)
/// Nodes with zero out-weight pass nothing on. Stops once the L1 change drops
/// below config.tolerance or after config.max_iters steps.
Propagation propagate(const ChunksGraph& graph, const RerankConfig& config,
                      const IterationObserver& observer = {});

struct RerankResult {
  std::vector<ScoredChunk> ranked;  ///< by final score desc, ties by candidate index
  std::vector<std::size_t> order;   ///< candidate index of each ranked entry
  int iterations = 0;
  bool converged = false;
  double last_delta = 0.0;
  std::vector<double> final_scores;  ///< includes the query node at [0]
};

/// Runs propagate() and ranks `candidates` (one per chunk node) by final score.
RerankResult iterate_scores(const ChunksGraph& graph, std::span<const ScoredChunk> candidates,
                            const RerankConfig& config, const IterationObserver& observer = {});

/// First min(k, N) ranked chunks. k < 1 raises InputError.
std::vector<ScoredChunk> select_top_k(const RerankResult& result, int k);

/// Observer writing {"t","scores","delta_l1"} JSON lines to `out`.
IterationObserver jsonl_iteration_dump(std::ostream& out);

}  // namespace qcg

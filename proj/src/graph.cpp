// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <ostream>

#include "qcg/errors.hpp"

namespace qcg {

std::vector<double> score_candidates(const EmbeddingVector& query_vec,
                                     std::span<const EmbeddingVector> candidate_vecs) {
  if (candidate_vecs.empty()) throw InputError("score_candidates: no candidates");
  std::vector<double> sims;
  sims.reserve(candidate_vecs.size());
  for (const auto& v : candidate_vecs) {
    sims.push_back(cosine_similarity(query_vec, v));
  }
  return sims;
}

std::vector<double> score_candidates(const ExpandedQuery& expanded,
                                     std::span<const ScoredChunk> candidates,
                                     const Embedder& embedder) {
  if (candidates.empty()) throw InputError("score_candidates: no candidates");
  std::vector<std::string> texts;
  texts.reserve(candidates.size() + 1);
  texts.push_back(expanded.concatenated);
  for (const auto& c : candidates) texts.push_back(c.chunk.text);
  const auto vecs = embedder.embed(texts);
  return score_candidates(vecs.front(), std::span(vecs).subspan(1));
}

ChunksGraph build_graph(std::span<const double> sims, GraphMode mode,
                        std::optional<std::span<const EmbeddingVector>> chunk_vectors) {
  const std::size_t n = sims.size();
  if (n == 0) throw InputError("build_graph: no candidates");
  const std::size_t nodes = n + 1;
  std::vector<double> w(nodes * nodes, 0.0);

  bool any_query_edge = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(sims[i])) throw InputError("build_graph: non-finite similarity");
    const double weight = std::max(sims[i], 0.0);
    w[i + 1] = weight;
    w[(i + 1) * nodes] = weight;
    any_query_edge = any_query_edge || weight > 0.0;
  }
  if (!any_query_edge) {
    throw DegenerateGraphError("every query-chunk similarity is <= 0; the query node is isolated");
  }

  if (mode == GraphMode::Full) {
    if (!chunk_vectors) throw InputError("full graph mode requires chunk vectors");
    const auto vecs = *chunk_vectors;
    if (vecs.size() != n) throw DimensionError("chunk vector count does not match similarities");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double weight = std::max(cosine_similarity(vecs[i], vecs[j]), 0.0);
        w[(i + 1) * nodes + (j + 1)] = weight;
        w[(j + 1) * nodes + (i + 1)] = weight;
      }
    }
  }
  return ChunksGraph(nodes, std::move(w), mode);
}

Propagation propagate(const ChunksGraph& graph, const RerankConfig& config,
                      const IterationObserver& observer) {
  config.validate();
  const std::size_t nodes = graph.node_count();
  const double d = config.damping;

  std::vector<double> out_weight(nodes, 0.0);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t k = 0; k < nodes; ++k) out_weight[j] += graph.weight(j, k);
  }
  if (out_weight[0] == 0.0) {
    throw DegenerateGraphError("the query node has no edges");
  }

  Propagation result;
  std::vector<double> current(graph.scores().begin(), graph.scores().end());
  std::vector<double> next(nodes);
  for (int t = 1; t <= config.max_iters; ++t) {
    for (std::size_t i = 0; i < nodes; ++i) next[i] = (1.0 - d) * current[i];
    for (std::size_t j = 0; j < nodes; ++j) {
      if (out_weight[j] == 0.0 || current[j] == 0.0) continue;
      const double share = d * current[j] / out_weight[j];
      for (std::size_t i = 0; i < nodes; ++i) {
        next[i] += graph.weight(j, i) * share;
      }
    }
#ifndef NDEBUG
    const double before = std::accumulate(current.begin(), current.end(), 0.0);
    const double after = std::accumulate(next.begin(), next.end(), 0.0);
    assert(std::abs(before - after) < 1e-9 && "score mass must be conserved");
#endif
    double delta = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) delta += std::abs(next[i] - current[i]);
    current.swap(next);
    result.iterations = t;
    result.last_delta = delta;
    if (observer) observer(t, current, delta);
    if (delta < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.scores = std::move(current);
  return result;
}

RerankResult iterate_scores(const ChunksGraph& graph, std::span<const ScoredChunk> candidates,
                            const RerankConfig& config, const IterationObserver& observer) {
  if (candidates.size() != graph.chunk_count()) {
    throw DimensionError("candidate count does not match graph chunk nodes");
  }
  Propagation p = propagate(graph, config, observer);

  RerankResult result;
  result.order.resize(candidates.size());
  std::iota(result.order.begin(), result.order.end(), std::size_t{0});
  std::stable_sort(result.order.begin(), result.order.end(), [&](std::size_t a, std::size_t b) {
    return p.scores[a + 1] > p.scores[b + 1];
  });
  result.ranked.reserve(candidates.size());
  for (std::size_t idx : result.order) {
    result.ranked.push_back({candidates[idx].chunk, p.scores[idx + 1]});
  }
  result.iterations = p.iterations;
  result.converged = p.converged;
  result.last_delta = p.last_delta;
  result.final_scores = std::move(p.scores);
  return result;
}

std::vector<ScoredChunk> select_top_k(const RerankResult& result, int k) {
  if (k < 1) throw InputError("select_top_k: k must be >= 1");
  const std::size_t take = std::min(static_cast<std::size_t>(k), result.ranked.size());
  return {result.ranked.begin(), result.ranked.begin() + static_cast<std::ptrdiff_t>(take)};
}

IterationObserver jsonl_iteration_dump(std::ostream& out) {
  return [&out](int t, std::span<const double> scores, double delta) {
    nlohmann::ordered_json row = {{"t", t},
                          {"scores", std::vector<double>(scores.begin(), scores.end())},
                          {"delta_l1", delta}};
    out << row.dump() << '\n';
  };
}

}  // namespace qcg

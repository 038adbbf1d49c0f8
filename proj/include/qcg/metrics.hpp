// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcg::metrics {

// All text metrics tokenize with text::tokenize (lower-cased, punctuation
// split, Han/Kana per character) and return values in [0, 1]. Inputs that
// tokenize to nothing score 0.

/// F1 of clipped n-gram overlap.
double rouge_n(std::string_view candidate, std::string_view reference, int n = 1);

/// F1 built from the token longest common subsequence.
double rouge_l(std::string_view candidate, std::string_view reference);

/// Clipped unigram precision times the brevity penalty exp(1 - r/c) when the
/// candidate is shorter than the closest reference length (ties prefer the
/// shorter reference).
double bleu_1(std::string_view candidate, std::span<const std::string> references);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

/// Exact-token alignment only (no stemming or synonyms).
struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;
};

/// Maximum exact-match alignment with the fewest chunks (maximal runs
/// contiguous on both sides). Greedy longest-run tiling gives the starting
/// point; a bounded exhaustive search then lowers the chunk count. On very
/// long, highly repetitive inputs the search may stop at its node budget and
/// return the best alignment found so far.
Alignment meteor_align(std::span<const std::string> candidate,
                       std::span<const std::string> reference);

/// Fmean * (1 - gamma * (chunks/matches)^beta), Fmean = PR / (alpha P + (1-alpha) R).
double meteor_simplified(std::string_view candidate, std::string_view reference,
                         const MeteorParams& params = {});

struct BinaryJudgement {
  int correct = 0;         ///< 1 when both sides parse and agree
  bool parseable = false;  ///< false when the candidate has no true/false/yes/no token
};

/// Compares the first true/false/yes/no token (yes=true, no=false) of each side.
BinaryJudgement accuracy_binary(std::string_view candidate, std::string_view reference);

/// 1/rank of the first gold id within the top k, else 0.
double mrr_at_k(std::span<const std::string> ranked_ids, const std::set<std::string>& gold,
                std::size_t k);

/// Binary-gain DCG@k / IDCG@k with log2(rank + 1) discounts.
double ndcg_at_k(std::span<const std::string> ranked_ids, const std::set<std::string>& gold,
                 std::size_t k);

}  // namespace qcg::metrics

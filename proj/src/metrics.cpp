// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg::metrics {
namespace {

using Tokens = std::vector<std::string>;

std::map<Tokens, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<Tokens, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double f1(double overlap, double cand_total, double ref_total) {
  if (overlap <= 0.0 || cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int binary_label(std::string_view s) {
  for (const auto& token : text::tokenize(s)) {
    if (token == "true" || token == "yes") return 1;
    if (token == "false" || token == "no") return 0;
  }
  return -1;
}

}  // namespace

double rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw InputError("rouge_n: n must be >= 1");
  const auto size = static_cast<std::size_t>(n);
  const auto cand = ngram_counts(text::tokenize(candidate), size);
  const auto ref = ngram_counts(text::tokenize(reference), size);
  std::size_t overlap = 0;
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  for (const auto& [gram, count] : cand) {
    cand_total += count;
    if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [gram, count] : ref) ref_total += count;
  return f1(static_cast<double>(overlap), static_cast<double>(cand_total),
            static_cast<double>(ref_total));
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  return f1(static_cast<double>(lcs_length(cand, ref)), static_cast<double>(cand.size()),
            static_cast<double>(ref.size()));
}

double bleu_1(std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw InputError("bleu_1: at least one reference is required");
  const auto cand = text::tokenize(candidate);
  if (cand.empty()) return 0.0;

  std::map<std::string, std::size_t> cand_counts;
  for (const auto& t : cand) ++cand_counts[t];
  std::map<std::string, std::size_t> max_ref_counts;
  std::size_t closest_len = 0;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (const auto& reference : references) {
    const auto ref = text::tokenize(reference);
    std::map<std::string, std::size_t> counts;
    for (const auto& t : ref) ++counts[t];
    for (const auto& [t, c] : counts) {
      auto& slot = max_ref_counts[t];
      slot = std::max(slot, c);
    }
    const std::size_t gap = ref.size() > cand.size() ? ref.size() - cand.size()
                                                     : cand.size() - ref.size();
    if (gap < best_gap || (gap == best_gap && ref.size() < closest_len)) {
      best_gap = gap;
      closest_len = ref.size();
    }
  }

  std::size_t clipped = 0;
  for (const auto& [t, c] : cand_counts) {
    if (auto it = max_ref_counts.find(t); it != max_ref_counts.end()) {
      clipped += std::min(c, it->second);
    }
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(closest_len);
  const double precision = static_cast<double>(clipped) / c;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return precision * bp;
}

namespace {

constexpr std::size_t kUnaligned = std::numeric_limits<std::size_t>::max();

std::size_t count_chunks(const std::vector<std::size_t>& cand_to_ref) {
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < cand_to_ref.size(); ++i) {
    if (cand_to_ref[i] == kUnaligned) continue;
    const bool continues = i > 0 && cand_to_ref[i - 1] != kUnaligned &&
                           cand_to_ref[i - 1] + 1 == cand_to_ref[i];
    if (!continues) ++chunks;
  }
  return chunks;
}

// Greedy tiling: repeatedly align the longest common run of unaligned tokens.
std::vector<std::size_t> tile(std::span<const std::string> candidate,
                              std::span<const std::string> reference) {
  const std::size_t n = candidate.size();
  const std::size_t m = reference.size();
  std::vector<std::size_t> cand_to_ref(n, kUnaligned);
  std::vector<bool> ref_used(m, false);

  // run[i][j]: length of the common unaligned run ending at (i-1, j-1).
  std::vector<std::size_t> run((n + 1) * (m + 1));
  while (true) {
    std::fill(run.begin(), run.end(), 0);
    std::size_t best_len = 0;
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        if (cand_to_ref[i - 1] != kUnaligned || ref_used[j - 1] ||
            candidate[i - 1] != reference[j - 1]) {
          continue;
        }
        const std::size_t len = run[(i - 1) * (m + 1) + (j - 1)] + 1;
        run[i * (m + 1) + j] = len;
        const std::size_t start_i = i - len;
        const std::size_t start_j = j - len;
        if (len > best_len || (len == best_len && (start_i < best_i ||
                                                   (start_i == best_i && start_j < best_j)))) {
          best_len = len;
          best_i = start_i;
          best_j = start_j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      cand_to_ref[best_i + k] = best_j + k;
      ref_used[best_j + k] = true;
    }
  }
  return cand_to_ref;
}

// Depth-first search over maximum-match alignments for the fewest chunks,
// seeded with the tiling result and cut off after a node budget.
class ChunkSearch {
 public:
  ChunkSearch(std::span<const std::string> candidate, std::span<const std::string> reference,
              std::size_t best_chunks, std::size_t budget)
      : cand_(candidate), ref_(reference), best_(best_chunks), budget_(budget),
        used_(reference.size(), false) {
    std::map<std::string, std::size_t> in_ref;
    for (const auto& t : ref_) ++in_ref[t];
    std::map<std::string, std::size_t> in_cand;
    for (const auto& t : cand_) ++in_cand[t];
    for (const auto& [t, c] : in_cand) {
      auto it = in_ref.find(t);
      need_[t] = it == in_ref.end() ? 0 : std::min(c, it->second);
      left_[t] = c;
    }
  }

  std::size_t run() {
    descend(0, kUnaligned, 0);
    return best_;
  }

 private:
  void descend(std::size_t i, std::size_t prev, std::size_t chunks) {
    if (chunks >= best_ || budget_ == 0) return;
    --budget_;
    if (i == cand_.size()) {
      best_ = chunks;
      return;
    }
    const std::string& t = cand_[i];
    std::size_t& need = need_[t];
    std::size_t& left = left_[t];
    --left;
    if (need > 0) {
      // Continuing the current chunk first finds good bounds early.
      if (prev != kUnaligned && prev + 1 < ref_.size() && !used_[prev + 1] &&
          ref_[prev + 1] == t) {
        take(i, prev + 1, chunks);
      }
      for (std::size_t j = 0; j < ref_.size(); ++j) {
        if (used_[j] || ref_[j] != t || (prev != kUnaligned && j == prev + 1)) continue;
        take(i, j, chunks + 1);
      }
    }
    if (left >= need) descend(i + 1, kUnaligned, chunks);
    ++left;
  }

  void take(std::size_t i, std::size_t j, std::size_t chunks) {
    used_[j] = true;
    --need_[cand_[i]];
    descend(i + 1, j, chunks);
    ++need_[cand_[i]];
    used_[j] = false;
  }

  std::span<const std::string> cand_;
  std::span<const std::string> ref_;
  std::size_t best_;
  std::size_t budget_;
  std::vector<bool> used_;
  std::map<std::string, std::size_t> need_;
  std::map<std::string, std::size_t> left_;
};

constexpr std::size_t kSearchBudget = 200000;

}  // namespace

Alignment meteor_align(std::span<const std::string> candidate,
                       std::span<const std::string> reference) {
  const auto tiled = tile(candidate, reference);
  Alignment a;
  a.candidate_len = candidate.size();
  a.reference_len = reference.size();
  a.matches = static_cast<std::size_t>(
      std::count_if(tiled.begin(), tiled.end(), [](std::size_t j) { return j != kUnaligned; }));
  a.chunks = count_chunks(tiled);
  if (a.chunks > 1) {
    a.chunks = ChunkSearch(candidate, reference, a.chunks, kSearchBudget).run();
  }
  return a;
}

double meteor_simplified(std::string_view candidate, std::string_view reference,
                         const MeteorParams& params) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  const Alignment a = meteor_align(cand, ref);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(a.candidate_len);
  const double r = m / static_cast<double>(a.reference_len);
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return fmean * (1.0 - penalty);
}

BinaryJudgement accuracy_binary(std::string_view candidate, std::string_view reference) {
  const int cand = binary_label(candidate);
  const int ref = binary_label(reference);
  BinaryJudgement j;
  j.parseable = cand >= 0;
  j.correct = (cand >= 0 && ref >= 0 && cand == ref) ? 1 : 0;
  return j;
}

double mrr_at_k(std::span<const std::string> ranked_ids, const std::set<std::string>& gold,
                std::size_t k) {
  const std::size_t limit = std::min(k, ranked_ids.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (gold.contains(ranked_ids[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double ndcg_at_k(std::span<const std::string> ranked_ids, const std::set<std::string>& gold,
                 std::size_t k) {
  if (gold.empty() || k == 0) return 0.0;
  const std::size_t limit = std::min(k, ranked_ids.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < limit; ++i) {
    if (gold.contains(ranked_ids[i])) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, gold.size());
  for (std::size_t i = 0; i < ideal; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  return dcg / idcg;
}

}  // namespace qcg::metrics

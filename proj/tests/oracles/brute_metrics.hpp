// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference metrics over pre-split, already lower-case tokens.
// Exponential in input length; meant for short fixture sentences only.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

using Toks = std::vector<std::string>;

inline Toks words(const std::string& s) {
  std::istringstream in(s);
  Toks out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline double harmonic(double hits, double c, double r) {
  if (hits == 0.0) return 0.0;
  return 2.0 * (hits / c) * (hits / r) / (hits / c + hits / r);
}

// Pairs each candidate token with an unused equal reference token.
inline double rouge1(const Toks& c, const Toks& r) {
  std::vector<bool> used(r.size(), false);
  double hits = 0.0;
  for (const auto& t : c) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!used[j] && r[j] == t) {
        used[j] = true;
        hits += 1.0;
        break;
      }
    }
  }
  return harmonic(hits, static_cast<double>(c.size()), static_cast<double>(r.size()));
}

inline bool is_subsequence(const Toks& sub, const Toks& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) {
    if (of[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

// Longest subsequence of c (enumerated by bitmask) that is also one of r.
inline double rouge_l(const Toks& c, const Toks& r) {
  std::size_t best = 0;
  for (unsigned long mask = 0; mask < (1UL << c.size()); ++mask) {
    Toks sub;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (mask & (1UL << i)) sub.push_back(c[i]);
    }
    if (sub.size() > best && is_subsequence(sub, r)) best = sub.size();
  }
  return harmonic(static_cast<double>(best), static_cast<double>(c.size()),
                  static_cast<double>(r.size()));
}

inline double bleu1(const Toks& c, const std::vector<Toks>& refs) {
  if (c.empty()) return 0.0;
  double clipped = 0.0;
  std::set<std::string> seen;
  for (const auto& t : c) {
    if (!seen.insert(t).second) continue;
    const double in_c = static_cast<double>(std::count(c.begin(), c.end(), t));
    double max_r = 0.0;
    for (const auto& r : refs) {
      max_r = std::max(max_r, static_cast<double>(std::count(r.begin(), r.end(), t)));
    }
    clipped += std::min(in_c, max_r);
  }
  // Closest reference length, shorter one on a tie.
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto gap = [&](std::size_t len) {
      return len > c.size() ? len - c.size() : c.size() - len;
    };
    if (gap(r.size()) < gap(best) || (gap(r.size()) == gap(best) && r.size() < best)) {
      best = r.size();
    }
  }
  const double cl = static_cast<double>(c.size());
  const double bp = cl > static_cast<double>(best) ? 1.0 : std::exp(1.0 - best / cl);
  return clipped / cl * bp;
}

// Every partial injective alignment of equal tokens; keeps the most matches,
// then the fewest chunks.
inline void enumerate_alignments(const Toks& c, const Toks& r, std::size_t i,
                                 std::vector<long>& map, std::vector<bool>& used,
                                 std::size_t& best_matches, std::size_t& best_chunks) {
  if (i == c.size()) {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    for (std::size_t k = 0; k < map.size(); ++k) {
      if (map[k] < 0) continue;
      ++matches;
      if (k == 0 || map[k - 1] < 0 || map[k - 1] + 1 != map[k]) ++chunks;
    }
    if (matches > best_matches || (matches == best_matches && chunks < best_chunks)) {
      best_matches = matches;
      best_chunks = chunks;
    }
    return;
  }
  map[i] = -1;
  enumerate_alignments(c, r, i + 1, map, used, best_matches, best_chunks);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (used[j] || r[j] != c[i]) continue;
    used[j] = true;
    map[i] = static_cast<long>(j);
    enumerate_alignments(c, r, i + 1, map, used, best_matches, best_chunks);
    used[j] = false;
  }
  map[i] = -1;
}

// alpha = 0.9, beta = 3, gamma = 0.5.
inline double meteor(const Toks& c, const Toks& r) {
  std::vector<long> map(c.size(), -1);
  std::vector<bool> used(r.size(), false);
  std::size_t matches = 0;
  std::size_t chunks = 0;
  enumerate_alignments(c, r, 0, map, used, matches, chunks);
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(c.size());
  const double rc = m / static_cast<double>(r.size());
  const double fmean = 10.0 * p * rc / (rc + 9.0 * p);
  const double frag = static_cast<double>(chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

inline double mrr(const std::vector<std::string>& ranked, const std::set<std::string>& gold,
                  std::size_t k) {
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    if (gold.count(ranked[i]) != 0) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double ndcg(const std::vector<std::string>& ranked, const std::set<std::string>& gold,
                   std::size_t k) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    if (gold.count(ranked[i]) != 0) dcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < gold.size() && i < k; ++i) {
    ideal += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
  }
  return ideal == 0.0 ? 0.0 : dcg / ideal;
}

}  // namespace oracle

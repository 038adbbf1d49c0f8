// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "qcg/core.hpp"

namespace qcg::internal {

/// Bounded heap that keeps the n best (score desc, id asc) chunks seen.
class TopNCollector {
 public:
  explicit TopNCollector(std::size_t n) : n_(n) {}

  void offer(double score, const Chunk& chunk) {
    if (n_ == 0) return;
    if (heap_.size() < n_) {
      heap_.push({score, chunk});
      return;
    }
    if (better_than(score, chunk.id, heap_.top())) {
      heap_.pop();
      heap_.push({score, chunk});
    }
  }

  std::vector<ScoredChunk> take() {
    std::vector<Item> items;
    items.reserve(heap_.size());
    while (!heap_.empty()) {
      items.push_back(heap_.top());
      heap_.pop();
    }
    std::sort(items.begin(), items.end(), better);
    std::vector<ScoredChunk> out;
    out.reserve(items.size());
    for (auto& item : items) {
      out.push_back({std::move(item.chunk), item.score});
    }
    return out;
  }

 private:
  struct Item {
    double score;
    Chunk chunk;  // owned copy, so results outlive the store's read lock
  };

  static bool better_than(double score, const std::string& id, const Item& b) {
    if (score != b.score) return score > b.score;
    return id < b.chunk.id;
  }
  static bool better(const Item& a, const Item& b) { return better_than(a.score, a.chunk.id, b); }

  // Worst item on top.
  struct WorseLast {
    bool operator()(const Item& a, const Item& b) const { return better(a, b); }
  };

  std::size_t n_;
  std::priority_queue<Item, std::vector<Item>, WorseLast> heap_;
};

}  // namespace qcg::internal

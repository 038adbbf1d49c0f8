// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/embed.hpp"

#include <unicode/locid.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <json.hpp>
#include <optional>

#include "internal/hash.hpp"
#include "internal/http.hpp"
#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string lower(std::string_view s) {
  icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string canonical_nonempty(const std::string& raw) {
  std::string c = text::canonical(raw);
  if (c.empty()) {
    throw InputError("cannot embed an empty text");
  }
  return c;
}

}  // namespace

void EmbedderSpec::validate() const {
  if (dim == 0) throw ConfigError("embedder dim must be positive");
  if (max_batch == 0) throw ConfigError("embedder max_batch must be >= 1");
  if (kind == EmbedderKind::Remote) {
    if (endpoint.empty()) throw ConfigError("remote embedder requires an endpoint");
    if (model_name.empty()) throw ConfigError("remote embedder requires a model name");
  }
}

DeterministicLocalEmbedder::DeterministicLocalEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ConfigError("embedder dim must be positive");
}

std::string DeterministicLocalEmbedder::fingerprint() const {
  return "local-char3-fnv1a/dim=" + std::to_string(dim_);
}

EmbeddingVector DeterministicLocalEmbedder::embed_one(std::string_view raw) const {
  const std::string folded = lower(canonical_nonempty(std::string(raw)));
  const auto offsets = text::code_point_offsets(folded);
  const std::size_t cps = offsets.size() - 1;

  std::vector<double> v(dim_, 0.0);
  auto add = [&](std::string_view gram) {
    const std::uint64_t h = fnv1a(gram);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[h % dim_] += sign;
  };
  if (cps < 3) {
    add(folded);
  } else {
    for (std::size_t i = 0; i + 3 <= cps; ++i) {
      add(std::string_view(folded).substr(offsets[i], offsets[i + 3] - offsets[i]));
    }
  }

  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) {
    // Every gram cancelled out; fall back to a single whole-text feature.
    v[fnv1a(folded) % dim_] = 1.0;
    return EmbeddingVector(std::move(v));
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return EmbeddingVector(std::move(v));
}

std::vector<EmbeddingVector> DeterministicLocalEmbedder::embed(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    out.push_back(embed_one(t));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  internal::parse_endpoint(spec_.endpoint);
}

std::string RemoteEmbedder::fingerprint() const {
  return "remote:" + spec_.model_name + "/dim=" + std::to_string(spec_.dim);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += spec_.max_batch) {
    const std::size_t len = std::min(spec_.max_batch, texts.size() - start);
    auto batch = embed_batch(texts.subspan(start, len));
    std::move(batch.begin(), batch.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> batch) const {
  json input = json::array();
  for (const auto& t : batch) {
    input.push_back(canonical_nonempty(t));
  }
  const json request = {{"model", spec_.model_name}, {"input", std::move(input)}};
  const auto endpoint = internal::parse_endpoint(spec_.endpoint);
  const auto outcome = internal::post_json(endpoint, "/embeddings", request.dump(),
                                           internal::env("QCG_EMBED_API_KEY"), spec_.timeout);
  if (!outcome.delivered) {
    throw EmbedServiceError("embedding request failed: " + outcome.transport_error, true);
  }
  if (outcome.status != 200) {
    throw EmbedServiceError("embedding service returned HTTP " + std::to_string(outcome.status),
                            outcome.retriable());
  }

  std::vector<std::pair<long long, std::vector<double>>> rows;
  try {
    const json response = json::parse(outcome.body);
    for (const auto& item : response.at("data")) {
      rows.emplace_back(item.at("index").get<long long>(),
                        item.at("embedding").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw EmbedServiceError(std::string("malformed embedding response: ") + e.what(), false);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (rows.size() != batch.size()) {
    throw EmbedServiceError("embedding service returned " + std::to_string(rows.size()) +
                                " vectors for " + std::to_string(batch.size()) + " inputs",
                            false);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long long>(i)) {
      throw EmbedServiceError("embedding response indices are not 0..n-1", false);
    }
    if (rows[i].second.size() != spec_.dim) {
      throw DimensionError("embedding service returned dim " +
                           std::to_string(rows[i].second.size()) + ", expected " +
                           std::to_string(spec_.dim));
    }
    out.emplace_back(std::move(rows[i].second));
  }
  return out;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<const Embedder> inner,
                                 std::filesystem::path cache_dir)
    : inner_(std::move(inner)) {
  std::filesystem::create_directories(cache_dir);
  std::string name = inner_->fingerprint();
  std::replace_if(
      name.begin(), name.end(),
      [](char c) { return !(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.'); },
      '_');
  cache_file_ = cache_dir / (name + ".jsonl");

  std::ifstream in(cache_file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json row = json::parse(line);
      auto values = row.at("v").get<std::vector<double>>();
      if (values.size() != inner_->dim()) continue;
      entries_.insert_or_assign(row.at("h").get<std::string>(), EmbeddingVector(std::move(values)));
    } catch (const std::exception&) {
      // A torn final line from an interrupted write; the entry is recomputed.
    }
  }
}

std::size_t CachingEmbedder::cached_entries() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<EmbeddingVector> CachingEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<std::string> keys;
  keys.reserve(texts.size());
  for (const auto& t : texts) {
    keys.push_back(internal::sha256_hex(canonical_nonempty(t)));
  }

  std::vector<std::optional<EmbeddingVector>> found(texts.size());
  std::vector<std::string> missing_texts;
  std::vector<std::size_t> missing_at;
  {
    std::shared_lock lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto it = entries_.find(keys[i]); it != entries_.end()) {
        found[i] = it->second;
      } else {
        missing_texts.push_back(texts[i]);
        missing_at.push_back(i);
      }
    }
  }

  if (!missing_texts.empty()) {
    auto fresh = inner_->embed(missing_texts);
    std::unique_lock lock(mutex_);
    std::ofstream out(cache_file_, std::ios::app);
    for (std::size_t m = 0; m < missing_at.size(); ++m) {
      const std::string& key = keys[missing_at[m]];
      if (entries_.emplace(key, fresh[m]).second && out) {
        const auto values = fresh[m].values();
        out << json{{"h", key}, {"v", std::vector<double>(values.begin(), values.end())}}.dump()
            << '\n';
      }
      found[missing_at[m]] = std::move(fresh[m]);
    }
  }

  std::vector<EmbeddingVector> result;
  result.reserve(found.size());
  for (auto& f : found) result.push_back(std::move(*f));
  return result;
}

std::shared_ptr<const Embedder> make_embedder(const EmbedderSpec& spec,
                                              const std::filesystem::path& cache_dir) {
  spec.validate();
  std::shared_ptr<const Embedder> base;
  if (spec.kind == EmbedderKind::Remote) {
    base = std::make_shared<RemoteEmbedder>(spec);
  } else {
    base = std::make_shared<DeterministicLocalEmbedder>(spec.dim);
  }
  if (cache_dir.empty()) return base;
  return std::make_shared<CachingEmbedder>(std::move(base), cache_dir);
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbedderSpec& spec) {
  if (texts.empty()) {
    throw InputError("embed_texts requires at least one text");
  }
  return make_embedder(spec)->embed(texts);
}

}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <json.hpp>
#include <set>
#include <sstream>

#include "internal/top_n.hpp"
#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kFormatVersion = "1";

bool is_ascii_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

std::string format_chunk_id(const std::string& doc_id, std::size_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", ordinal);
  return doc_id + "#" + buf;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw StoreSchemaError("vectors.bin is truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | bytes[i];
  }
  return v;
}

json chunk_to_json(const Chunk& c) {
  json j = {{"id", c.id}, {"text", c.text}, {"doc_id", c.doc_id}, {"metadata", c.metadata}};
  j["span"] = c.span ? json::array({c.span->start, c.span->end}) : json(nullptr);
  return j;
}

Chunk chunk_from_json(const json& j) {
  Chunk c;
  c.id = j.at("id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.doc_id = j.value("doc_id", "");
  if (j.contains("span") && !j.at("span").is_null()) {
    const auto& s = j.at("span");
    c.span = Span{s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()};
  }
  if (j.contains("metadata")) {
    c.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  }
  return c;
}

// Writes via a sibling temp file so a crash never leaves a half-written file.
template <typename Writer>
void write_atomically(const fs::path& target, std::ios::openmode mode, Writer&& writer) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, mode | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

void ChunkingPolicy::validate() const {
  if (max_chars == 0) throw ConfigError("chunking max_chars must be positive");
  if (overlap_chars >= max_chars) throw ConfigError("chunking overlap_chars must be < max_chars");
}

std::vector<Chunk> chunk_document(const std::string& doc_id, const std::string& text,
                                  const ChunkingPolicy& policy) {
  policy.validate();
  if (text.empty()) throw InputError("document '" + doc_id + "' is empty");

  const auto offsets = text::code_point_offsets(text);
  const std::size_t total = offsets.size() - 1;
  const std::string_view sv(text);

  auto cp_index = [&](std::size_t byte) {
    return static_cast<std::size_t>(std::lower_bound(offsets.begin(), offsets.end(), byte) -
                                    offsets.begin());
  };

  std::vector<Chunk> chunks;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string piece(sv.substr(offsets[begin], offsets[end] - offsets[begin]));
    if (text::trim(piece).empty()) return;
    Chunk c;
    c.id = format_chunk_id(doc_id, chunks.size());
    c.text = std::move(piece);
    c.doc_id = doc_id;
    c.span = Span{begin, end};
    chunks.push_back(std::move(c));
  };

  std::size_t start = 0;
  while (start < total) {
    if (total - start <= policy.max_chars) {
      emit(start, total);
      break;
    }
    const std::size_t limit = start + policy.max_chars;
    const std::size_t window_begin = offsets[start];
    const std::string_view window = sv.substr(window_begin, offsets[limit] - window_begin);

    std::size_t cut = 0;
    for (const auto& level : policy.split_on) {
      for (const auto& sep : level) {
        if (sep.empty()) continue;
        const auto pos = window.rfind(sep);
        if (pos == std::string_view::npos) continue;
        const std::size_t end = cp_index(window_begin + pos + sep.size());
        if (end > start + policy.overlap_chars) {
          cut = std::max(cut, end);
        }
      }
      if (cut != 0) break;
    }
    if (cut == 0) cut = limit;
    emit(start, cut);

    std::size_t next = cut - policy.overlap_chars;
    if (policy.overlap_chars > 0) {
      for (std::size_t p = cut - policy.overlap_chars; p < cut; ++p) {
        if (p > 0 && is_ascii_space(text[offsets[p - 1]])) {
          next = p;
          break;
        }
      }
    }
    start = next;
  }
  return chunks;
}

std::vector<Document> load_corpus_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      if (j.contains("meta") && j.at("meta").is_object()) {
        for (const auto& [k, v] : j.at("meta").items()) {
          d.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

VectorStore::VectorStore() : mutex_(std::make_unique<std::shared_mutex>()) {}
VectorStore::VectorStore(VectorStore&&) noexcept = default;
VectorStore& VectorStore::operator=(VectorStore&&) noexcept = default;
VectorStore::~VectorStore() = default;

void VectorStore::ingest(std::span<const Chunk> chunks, const Embedder& embedder, bool upsert) {
  if (chunks.empty()) return;
  {
    // Fail fast before paying for embeddings.
    std::shared_lock lock(*mutex_);
    if (dim_ != 0 && embedder.dim() != dim_) {
      throw StoreSchemaError("store holds dim " + std::to_string(dim_) + ", embedder produces " +
                             std::to_string(embedder.dim()));
    }
    if (!fingerprint_.empty() && embedder.fingerprint() != fingerprint_) {
      throw StoreSchemaError("store was built with '" + fingerprint_ + "', not '" +
                             embedder.fingerprint() + "'");
    }
    if (!upsert) {
      for (const auto& c : chunks) {
        if (entries_.contains(c.id)) throw DuplicateIdError("chunk id '" + c.id + "' already stored");
      }
    }
  }
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) {
    validate_chunk(c);
    texts.push_back(c.text);
  }
  const auto vectors = embedder.embed(texts);
  insert(chunks, vectors, embedder.fingerprint(), upsert);
}

void VectorStore::insert(std::span<const Chunk> chunks, std::span<const EmbeddingVector> vectors,
                         const std::string& embedder_fingerprint, bool upsert) {
  if (chunks.size() != vectors.size()) {
    throw InputError("insert: chunk and vector counts differ");
  }
  if (chunks.empty()) return;
  std::unique_lock lock(*mutex_);
  const std::size_t dim = dim_ != 0 ? dim_ : vectors.front().dim();
  if (!fingerprint_.empty() && embedder_fingerprint != fingerprint_) {
    throw StoreSchemaError("store was built with '" + fingerprint_ + "', not '" +
                           embedder_fingerprint + "'");
  }
  std::set<std::string> batch_ids;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    validate_chunk(chunks[i]);
    if (vectors[i].dim() != dim) {
      throw StoreSchemaError("vector for '" + chunks[i].id + "' has dim " +
                             std::to_string(vectors[i].dim()) + ", store expects " +
                             std::to_string(dim));
    }
    if (!batch_ids.insert(chunks[i].id).second) {
      throw DuplicateIdError("chunk id '" + chunks[i].id + "' appears twice in one batch");
    }
    if (!upsert && entries_.contains(chunks[i].id)) {
      throw DuplicateIdError("chunk id '" + chunks[i].id + "' already stored");
    }
  }
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    entries_.insert_or_assign(chunks[i].id, Entry{chunks[i], vectors[i]});
  }
  dim_ = dim;
  fingerprint_ = embedder_fingerprint;
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(*mutex_);
  return entries_.size();
}

std::size_t VectorStore::dim() const {
  std::shared_lock lock(*mutex_);
  return dim_;
}

std::string VectorStore::embedder_fingerprint() const {
  std::shared_lock lock(*mutex_);
  return fingerprint_;
}

std::optional<Chunk> VectorStore::find(const std::string& id) const {
  std::shared_lock lock(*mutex_);
  if (auto it = entries_.find(id); it != entries_.end()) return it->second.chunk;
  return std::nullopt;
}

std::optional<EmbeddingVector> VectorStore::vector(const std::string& id) const {
  std::shared_lock lock(*mutex_);
  if (auto it = entries_.find(id); it != entries_.end()) return it->second.vector;
  return std::nullopt;
}

void VectorStore::scan(
    const std::function<void(const Chunk&, const EmbeddingVector&)>& visit) const {
  std::shared_lock lock(*mutex_);
  for (const auto& [id, entry] : entries_) {
    visit(entry.chunk, entry.vector);
  }
}

void VectorStore::save(const fs::path& dir) const {
  std::shared_lock lock(*mutex_);
  fs::create_directories(dir);

  write_atomically(dir / "chunks.jsonl", std::ios::out, [&](std::ostream& out) {
    for (const auto& [id, entry] : entries_) {
      out << chunk_to_json(entry.chunk).dump() << '\n';
    }
  });

  write_atomically(dir / "vectors.bin", std::ios::out | std::ios::binary, [&](std::ostream& out) {
    write_u64(out, dim_);
    write_u64(out, entries_.size());
    for (const auto& [id, entry] : entries_) {
      for (double v : entry.vector.values()) {
        write_u64(out, std::bit_cast<std::uint64_t>(v));
      }
    }
  });

  const json manifest = {{"format_version", kFormatVersion},
                         {"embedder_fingerprint", fingerprint_},
                         {"dim", dim_},
                         {"count", entries_.size()}};
  write_atomically(dir / "manifest.json", std::ios::out,
                   [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

VectorStore VectorStore::load(const fs::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw StoreSchemaError("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(manifest_in);
  } catch (const json::exception& e) {
    throw StoreSchemaError(std::string("unreadable manifest.json: ") + e.what());
  }
  if (manifest.value("format_version", "") != kFormatVersion) {
    throw StoreSchemaError("unsupported store format version " +
                           manifest.value("format_version", std::string("<missing>")));
  }

  std::vector<Chunk> chunks;
  {
    std::ifstream in(dir / "chunks.jsonl");
    if (!in) throw StoreSchemaError("no chunks.jsonl in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        chunks.push_back(chunk_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw StoreSchemaError(std::string("bad row in chunks.jsonl: ") + e.what());
      }
    }
  }

  std::ifstream vin(dir / "vectors.bin", std::ios::binary);
  if (!vin) throw StoreSchemaError("no vectors.bin in " + dir.string());
  const std::uint64_t dim = read_u64(vin);
  const std::uint64_t count = read_u64(vin);
  if (count != chunks.size() || count != manifest.value("count", std::uint64_t{0}) ||
      dim != manifest.value("dim", std::uint64_t{0})) {
    throw StoreSchemaError("store files disagree on dim/count");
  }
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<double> values(dim);
    for (auto& v : values) v = std::bit_cast<double>(read_u64(vin));
    vectors.emplace_back(std::move(values));
  }

  VectorStore store;
  store.insert(chunks, vectors, manifest.value("embedder_fingerprint", ""));
  store.dim_ = dim;
  return store;
}

std::vector<ScoredChunk> retrieve_top_n(const VectorStore& store, const EmbeddingVector& query_vec,
                                        std::size_t n) {
  if (n == 0) throw InputError("retrieve_top_n: n must be positive");
  if (store.empty()) throw EmptyStoreError("vector store is empty");
  if (query_vec.dim() != store.dim()) {
    throw DimensionError("query has dim " + std::to_string(query_vec.dim()) + ", store has " +
                         std::to_string(store.dim()));
  }
  internal::TopNCollector top(n);
  store.scan([&](const Chunk& chunk, const EmbeddingVector& v) {
    top.offer(cosine_similarity(query_vec, v), chunk);
  });
  return top.take();
}

}  // namespace qcg

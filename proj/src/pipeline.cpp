// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "internal/hash.hpp"
#include "qcg/errors.hpp"

namespace qcg {
namespace {

using json = nlohmann::json;

template <typename T>
void read(const json& section, const char* key, T& target) {
  if (section.contains(key)) {
    try {
      target = section.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

void reject_unknown(const json& section, std::string_view where,
                    std::initializer_list<std::string_view> known) {
  if (!section.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : section.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + std::string(where) + "." + key + "'");
    }
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExpandedQuery plain_query(const Query& query) {
  return ExpandedQuery{query, "", 1, DuplicationMode::Unit, query.text()};
}

std::vector<Chunk> chunks_of(const std::vector<ScoredChunk>& scored) {
  std::vector<Chunk> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.chunk);
  return out;
}

std::vector<std::string> ids_of(const std::vector<ScoredChunk>& scored) {
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.chunk.id);
  return out;
}

}  // namespace

std::string_view to_string(PipelineMode mode) noexcept {
  switch (mode) {
    case PipelineMode::WoRag: return "wo-rag";
    case PipelineMode::WRag: return "w-rag";
    case PipelineMode::Qcg: return "qcg";
    case PipelineMode::Bm25: return "bm25";
    case PipelineMode::Bm25L: return "bm25l";
  }
  return "qcg";
}

PipelineMode parse_pipeline_mode(std::string_view text) {
  for (auto mode : {PipelineMode::WoRag, PipelineMode::WRag, PipelineMode::Qcg,
                    PipelineMode::Bm25, PipelineMode::Bm25L}) {
    if (to_string(mode) == text) return mode;
  }
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected wo-rag|w-rag|qcg|bm25|bm25l)");
}

void PipelineConfig::validate() const {
  embedder.validate();
  chat.validate();
  rerank.validate();
  extraction.validate();
  chunking.validate();
  bm25.validate();
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  for (const auto* path : {&extraction_template_path, &answer_template_path, &direct_template_path}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw ConfigError("template file '" + *path + "' does not exist");
    }
  }
}

void apply_preset(PipelineConfig& config, std::string_view preset) {
  if (preset == "cultour") {
    config.rerank.top_k = 3;
    config.rerank.n_dup = 3;
  } else if (preset == "iirc") {
    config.rerank.top_k = 2;
    config.rerank.n_dup = 2;
  } else if (preset == "strategyqa") {
    config.rerank.top_k = 5;
  } else if (preset == "hotpotqa") {
    config.rerank.top_k = 2;
  } else if (preset == "squad" || preset == "musique") {
    config.rerank.top_k = 1;
  } else {
    throw ConfigError("unknown preset '" + std::string(preset) + "'");
  }
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["version"] = PipelineConfig::kVersion;
  j["embedder"] = {
      {"kind", c.embedder.kind == EmbedderKind::Remote ? "remote" : "local"},
      {"endpoint", c.embedder.endpoint},
      {"model", c.embedder.model_name},
      {"dim", c.embedder.dim},
      {"timeout_ms", c.embedder.timeout.count()},
      {"max_batch", c.embedder.max_batch},
  };
  j["chat"] = {
      {"kind", c.chat.kind == ChatKind::RemoteChat ? "remote" : "mock"},
      {"endpoint", c.chat.endpoint},
      {"model", c.chat.model_name},
      {"temperature", c.chat.temperature},
      {"timeout_ms", c.chat.timeout.count()},
      {"mock_script", c.chat.mock_script},
  };
  j["rerank"] = {
      {"top_n", c.rerank.top_n},         {"top_k", c.rerank.top_k},
      {"n_dup", c.rerank.n_dup},         {"damping", c.rerank.damping},
      {"max_iters", c.rerank.max_iters}, {"tolerance", c.rerank.tolerance},
      {"graph_mode", std::string(to_string(c.rerank.graph_mode))},
  };
  j["extraction"] = {
      {"kind", c.extraction.kind == ExtractionKind::LlmPrompted ? "llm" : "keyword"},
      {"max_keywords", c.extraction.max_keywords},
      {"template_path", c.extraction_template_path},
  };
  j["chunking"] = {{"max_chars", c.chunking.max_chars},
                   {"overlap_chars", c.chunking.overlap_chars}};
  j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"delta", c.bm25.delta}};
  j["answer"] = {
      {"template_path", c.answer_template_path},
      {"direct_template_path", c.direct_template_path},
      {"query_slot", c.query_slot == QuerySlot::Original ? "original" : "expanded"},
  };
  j["duplication_mode"] = c.duplication == DuplicationMode::Unit ? "unit" : "critical-only";
  j["store"] = c.store_path;
  j["cache_dir"] = c.cache_dir;
  j["jobs"] = c.jobs;
  j["seed"] = c.seed;
  return j.dump(2);
}

PipelineConfig config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config",
                 {"version", "preset", "embedder", "chat", "rerank", "extraction", "chunking",
                  "bm25", "answer", "duplication_mode", "store", "cache_dir", "jobs", "seed"});
  if (j.contains("version") && j.at("version") != PipelineConfig::kVersion) {
    throw ConfigError("unsupported config version " + j.at("version").dump());
  }

  PipelineConfig c;
  if (j.contains("preset")) apply_preset(c, j.at("preset").get<std::string>());

  if (j.contains("embedder")) {
    const auto& s = j.at("embedder");
    reject_unknown(s, "embedder", {"kind", "endpoint", "model", "dim", "timeout_ms", "max_batch"});
    std::string kind = "local";
    read(s, "kind", kind);
    if (kind != "local" && kind != "remote") throw ConfigError("embedder.kind must be local|remote");
    c.embedder.kind = kind == "remote" ? EmbedderKind::Remote : EmbedderKind::DeterministicLocal;
    read(s, "endpoint", c.embedder.endpoint);
    read(s, "model", c.embedder.model_name);
    read(s, "dim", c.embedder.dim);
    read(s, "max_batch", c.embedder.max_batch);
    long long timeout = c.embedder.timeout.count();
    read(s, "timeout_ms", timeout);
    c.embedder.timeout = std::chrono::milliseconds(timeout);
  }
  if (j.contains("chat")) {
    const auto& s = j.at("chat");
    reject_unknown(s, "chat",
                   {"kind", "endpoint", "model", "temperature", "timeout_ms", "mock_script"});
    std::string kind = "mock";
    read(s, "kind", kind);
    if (kind != "mock" && kind != "remote") throw ConfigError("chat.kind must be mock|remote");
    c.chat.kind = kind == "remote" ? ChatKind::RemoteChat : ChatKind::MockChat;
    read(s, "endpoint", c.chat.endpoint);
    read(s, "model", c.chat.model_name);
    read(s, "temperature", c.chat.temperature);
    read(s, "mock_script", c.chat.mock_script);
    long long timeout = c.chat.timeout.count();
    read(s, "timeout_ms", timeout);
    c.chat.timeout = std::chrono::milliseconds(timeout);
  }
  if (j.contains("rerank")) {
    const auto& s = j.at("rerank");
    reject_unknown(s, "rerank",
                   {"top_n", "top_k", "n_dup", "damping", "max_iters", "tolerance", "graph_mode"});
    read(s, "top_n", c.rerank.top_n);
    read(s, "top_k", c.rerank.top_k);
    read(s, "n_dup", c.rerank.n_dup);
    read(s, "damping", c.rerank.damping);
    read(s, "max_iters", c.rerank.max_iters);
    read(s, "tolerance", c.rerank.tolerance);
    if (s.contains("graph_mode")) {
      c.rerank.graph_mode = parse_graph_mode(s.at("graph_mode").get<std::string>());
    }
  }
  if (j.contains("extraction")) {
    const auto& s = j.at("extraction");
    reject_unknown(s, "extraction", {"kind", "max_keywords", "template_path"});
    std::string kind = "keyword";
    read(s, "kind", kind);
    if (kind != "keyword" && kind != "llm") throw ConfigError("extraction.kind must be keyword|llm");
    c.extraction.kind =
        kind == "llm" ? ExtractionKind::LlmPrompted : ExtractionKind::DeterministicKeyword;
    read(s, "max_keywords", c.extraction.max_keywords);
    read(s, "template_path", c.extraction_template_path);
  }
  if (j.contains("chunking")) {
    const auto& s = j.at("chunking");
    reject_unknown(s, "chunking", {"max_chars", "overlap_chars"});
    read(s, "max_chars", c.chunking.max_chars);
    read(s, "overlap_chars", c.chunking.overlap_chars);
  }
  if (j.contains("bm25")) {
    const auto& s = j.at("bm25");
    reject_unknown(s, "bm25", {"k1", "b", "delta"});
    read(s, "k1", c.bm25.k1);
    read(s, "b", c.bm25.b);
    read(s, "delta", c.bm25.delta);
  }
  if (j.contains("answer")) {
    const auto& s = j.at("answer");
    reject_unknown(s, "answer", {"template_path", "direct_template_path", "query_slot"});
    read(s, "template_path", c.answer_template_path);
    read(s, "direct_template_path", c.direct_template_path);
    std::string slot = "original";
    read(s, "query_slot", slot);
    if (slot != "original" && slot != "expanded") {
      throw ConfigError("answer.query_slot must be original|expanded");
    }
    c.query_slot = slot == "expanded" ? QuerySlot::Expanded : QuerySlot::Original;
  }
  if (j.contains("duplication_mode")) {
    const auto mode = j.at("duplication_mode").get<std::string>();
    if (mode != "unit" && mode != "critical-only") {
      throw ConfigError("duplication_mode must be unit|critical-only");
    }
    c.duplication = mode == "unit" ? DuplicationMode::Unit : DuplicationMode::CriticalOnly;
  }
  read(j, "store", c.store_path);
  read(j, "cache_dir", c.cache_dir);
  read(j, "jobs", c.jobs);
  read(j, "seed", c.seed);

  if (!c.extraction_template_path.empty()) {
    c.extraction.prompt_template = load_prompt_template(c.extraction_template_path);
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(slurp(path));
}

std::string config_hash(const PipelineConfig& config) {
  // Where files live and how many threads run do not change results.
  json j = json::parse(config_to_json(config));
  j.erase("store");
  j.erase("cache_dir");
  j.erase("jobs");
  return internal::sha256_hex(j.dump());
}

int effective_jobs(const PipelineConfig& config) {
  if (config.jobs > 0) return config.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw == 0 ? 1U : hw, 1U, 8U));
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const VectorStore> store,
                   std::shared_ptr<const Embedder> embedder, std::shared_ptr<const ChatClient> chat)
    : config_(std::move(config)),
      store_(std::move(store)),
      embedder_(std::move(embedder)),
      chat_(std::move(chat)),
      answer_template_(config_.answer_template_path.empty()
                           ? AnswerTemplate()
                           : AnswerTemplate::from_file(config_.answer_template_path)),
      direct_template_(config_.direct_template_path.empty() ? std::string(kDefaultDirectTemplate)
                                                            : slurp(config_.direct_template_path)) {
  config_.validate();
  if (!store_ || !embedder_ || !chat_) {
    throw ConfigError("pipeline needs a store, an embedder and a chat client");
  }
  if (!store_->empty()) {
    if (store_->embedder_fingerprint() != embedder_->fingerprint()) {
      throw StoreSchemaError("store was built with '" + store_->embedder_fingerprint() +
                             "' but the pipeline embeds with '" + embedder_->fingerprint() + "'");
    }
    stats_ = CorpusStats::build(*store_);
  }
  // Validate the direct template up front rather than on first use.
  render_direct_prompt(direct_template_, "probe");
}

Pipeline Pipeline::open(const PipelineConfig& config) {
  if (config.store_path.empty()) throw ConfigError("no store path configured (use --store)");
  auto store = std::make_shared<VectorStore>(VectorStore::load(config.store_path));
  return Pipeline(config, std::move(store), make_embedder(config.embedder, config.cache_dir),
                  make_chat_client(config.chat));
}

std::vector<EmbeddingVector> Pipeline::candidate_vectors(
    const std::vector<ScoredChunk>& candidates) const {
  std::vector<EmbeddingVector> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto v = store_->vector(c.chunk.id);
    if (!v) throw StoreSchemaError("candidate '" + c.chunk.id + "' has no stored vector");
    out.push_back(std::move(*v));
  }
  return out;
}

Pipeline::GraphTrace Pipeline::trace_graph(const Query& query,
                                           const IterationObserver& observer) const {
  const auto& rc = config_.rerank;
  const std::vector<std::string> query_text{query.text()};
  const auto query_vec = embedder_->embed(query_text).front();
  auto candidates = retrieve_top_n(*store_, query_vec, static_cast<std::size_t>(rc.top_n));

  const ChatClient* llm =
      config_.extraction.kind == ExtractionKind::LlmPrompted ? chat_.get() : nullptr;
  const CriticalInfo info = extract_critical_info(query, config_.extraction, llm, &stats_);
  ExpandedQuery expanded = build_expanded_query(query, info.text, rc.n_dup, config_.duplication);

  const std::vector<std::string> expanded_text{expanded.concatenated};
  const auto expanded_vec = embedder_->embed(expanded_text).front();
  const auto vectors = candidate_vectors(candidates);
  auto sims = score_candidates(expanded_vec, vectors);

  const ChunksGraph graph = build_graph(sims, rc.graph_mode, std::span(vectors));
  auto rerank = iterate_scores(graph, candidates, rc, observer);
  return GraphTrace{std::move(candidates), std::move(expanded), info.fell_back, std::move(sims),
                    std::move(rerank)};
}

AskResult Pipeline::ask(const Query& query, PipelineMode mode,
                        const IterationObserver& observer) const {
  AskResult result;
  result.mode = mode;
  const auto& rc = config_.rerank;
  const auto k = static_cast<std::size_t>(rc.top_k);
  const auto n = static_cast<std::size_t>(rc.top_n);

  ExpandedQuery carrier = plain_query(query);
  switch (mode) {
    case PipelineMode::WoRag: {
      result.prompt = render_direct_prompt(direct_template_, query.text());
      result.answer = generate_answer(*chat_, result.prompt);
      return result;
    }
    case PipelineMode::WRag: {
      const std::vector<std::string> text{query.text()};
      result.candidates = retrieve_top_n(*store_, embedder_->embed(text).front(), n);
      break;
    }
    case PipelineMode::Bm25:
    case PipelineMode::Bm25L: {
      const auto variant = mode == PipelineMode::Bm25 ? Bm25Variant::Bm25 : Bm25Variant::Bm25L;
      result.candidates = retrieve_bm25(*store_, stats_, query, n, config_.bm25, variant);
      break;
    }
    case PipelineMode::Qcg: {
      auto trace = trace_graph(query, observer);
      result.candidates = std::move(trace.candidates);
      result.critical_info = trace.expanded.critical_info;
      result.extraction_fell_back = trace.extraction_fell_back;
      result.expanded_query = trace.expanded.concatenated;
      result.expanded_sims = std::move(trace.sims);
      result.iterations = trace.rerank.iterations;
      result.converged = trace.rerank.converged;
      result.ranked_ids = ids_of(trace.rerank.ranked);
      result.contexts = select_top_k(trace.rerank, rc.top_k);
      carrier = std::move(trace.expanded);
      break;
    }
  }

  if (mode != PipelineMode::Qcg) {
    result.ranked_ids = ids_of(result.candidates);
    result.contexts.assign(result.candidates.begin(),
                           result.candidates.begin() +
                               static_cast<std::ptrdiff_t>(std::min(k, result.candidates.size())));
  }
  if (result.contexts.empty()) {
    throw EmptyStoreError("retrieval returned no chunks");
  }
  const auto contexts = chunks_of(result.contexts);
  result.prompt = render_prompt(answer_template_, carrier, contexts, config_.query_slot);
  result.answer = generate_answer(*chat_, result.prompt);
  return result;
}

IngestSummary ingest_corpus(const std::vector<Document>& docs, const PipelineConfig& config,
                            const std::filesystem::path& store_dir, bool upsert) {
  config.chunking.validate();
  VectorStore store;
  if (std::filesystem::exists(store_dir / "manifest.json")) {
    store = VectorStore::load(store_dir);
  }
  std::vector<Chunk> chunks;
  std::set<std::string> doc_ids;
  for (const auto& doc : docs) {
    if (!doc_ids.insert(doc.doc_id).second) {
      throw DuplicateIdError("document id '" + doc.doc_id + "' appears twice in the corpus");
    }
    for (auto& chunk : chunk_document(doc.doc_id, doc.text, config.chunking)) {
      chunk.metadata = doc.meta;
      chunks.push_back(std::move(chunk));
    }
  }
  const auto embedder = make_embedder(config.embedder, config.cache_dir);
  store.ingest(chunks, *embedder, upsert);
  store.save(store_dir);
  return IngestSummary{docs.size(), chunks.size(), store.dim(), store.size()};
}

}  // namespace qcg

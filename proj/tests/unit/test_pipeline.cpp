// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include "qcg/errors.hpp"
#include "qcg/pipeline.hpp"
#include "support.hpp"

namespace qcg {
namespace {

using testing_support::TempDir;

std::vector<Document> tourism_docs() {
  return {
      {"louvre", "The Louvre museum in Paris opens at nine and closes at six.", {}},
      {"eiffel", "The Eiffel Tower is 330 metres tall and was finished in 1889.", {}},
      {"li", "Bamboo rafts drift down the Li River from Guilin to Yangshuo.", {{"city", "Guilin"}}},
      {"colosseum", "The Colosseum in Rome held gladiator games for centuries.", {}},
      {"sagrada", "The Sagrada Familia in Barcelona is still under construction.", {}},
  };
}

struct Fixture {
  TempDir dir;
  PipelineConfig config;
  std::shared_ptr<const VectorStore> store;

  Fixture() {
    config.embedder.dim = 128;
    config.rerank.top_n = 4;
    config.rerank.top_k = 2;
    config.store_path = (dir.path() / "store").string();
    ingest_corpus(tourism_docs(), config, config.store_path);
    store = std::make_shared<VectorStore>(VectorStore::load(config.store_path));
  }

  Pipeline pipeline(std::shared_ptr<const ChatClient> chat =
                        std::make_shared<MockChatClient>()) const {
    return Pipeline(config, store, make_embedder(config.embedder), std::move(chat));
  }
};

TEST(PipelineConfig, JsonRoundTripIsStable) {
  PipelineConfig c;
  c.rerank.graph_mode = GraphMode::Star;
  c.rerank.n_dup = 5;
  c.duplication = DuplicationMode::CriticalOnly;
  c.query_slot = QuerySlot::Expanded;
  c.chat.mock_script = {"a", "b"};
  c.seed = 7;
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(back.rerank.graph_mode, GraphMode::Star);
  EXPECT_EQ(back.duplication, DuplicationMode::CriticalOnly);
}

TEST(PipelineConfig, HashTracksResultAffectingFields) {
  const PipelineConfig base;
  PipelineConfig other;
  other.rerank.damping = 0.8;
  EXPECT_NE(config_hash(base), config_hash(other));
  EXPECT_EQ(config_hash(base).size(), 64u);
  EXPECT_EQ(config_hash(base), config_hash(PipelineConfig{}));
  PipelineConfig relocated;
  relocated.jobs = 5;
  relocated.store_path = "/elsewhere";
  relocated.cache_dir = "/tmp/cache";
  EXPECT_EQ(config_hash(relocated), config_hash(base));
}

TEST(PipelineConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(R"({"rerank":{"top_kk":3}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"surprise":1})"), ConfigError);
  EXPECT_THROW(config_from_json("not json"), ConfigError);
  // Parsing layers values; validation runs once flags have been applied.
  EXPECT_THROW(config_from_json(R"({"rerank":{"top_k":20,"top_n":10}})").validate(), ConfigError);
  EXPECT_THROW(
      config_from_json(R"({"answer":{"template_path":"/nonexistent/t.txt"}})").validate(),
      ConfigError);
}

TEST(PipelineConfig, Presets) {
  PipelineConfig c;
  apply_preset(c, "cultour");
  EXPECT_EQ(c.rerank.top_k, 3);
  EXPECT_EQ(c.rerank.n_dup, 3);
  apply_preset(c, "iirc");
  EXPECT_EQ(c.rerank.top_k, 2);
  EXPECT_EQ(c.rerank.n_dup, 2);
  apply_preset(c, "strategyqa");
  EXPECT_EQ(c.rerank.top_k, 5);
  apply_preset(c, "squad");
  EXPECT_EQ(c.rerank.top_k, 1);
  EXPECT_THROW(apply_preset(c, "nope"), ConfigError);
  const auto from_json = config_from_json(R"({"preset":"hotpotqa"})");
  EXPECT_EQ(from_json.rerank.top_k, 2);
}

TEST(PipelineConfig, EffectiveJobs) {
  PipelineConfig c;
  c.jobs = 3;
  EXPECT_EQ(effective_jobs(c), 3);
  c.jobs = 0;
  EXPECT_GE(effective_jobs(c), 1);
  EXPECT_LE(effective_jobs(c), 8);
}

TEST(PipelineMode, Names) {
  for (auto m : {PipelineMode::WoRag, PipelineMode::WRag, PipelineMode::Qcg, PipelineMode::Bm25,
                 PipelineMode::Bm25L}) {
    EXPECT_EQ(parse_pipeline_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_pipeline_mode("rag"), ConfigError);
}

TEST(Ingest, ChunksCarryDocumentMetadata) {
  const Fixture f;
  EXPECT_EQ(f.store->size(), 5u);
  bool found = false;
  f.store->scan([&](const Chunk& c, const EmbeddingVector&) {
    if (c.doc_id == "li") {
      found = true;
      EXPECT_EQ(c.metadata.at("city"), "Guilin");
    }
  });
  EXPECT_TRUE(found);
}

TEST(Ingest, DuplicateDocumentIdsRejected) {
  TempDir dir;
  auto docs = tourism_docs();
  docs.push_back(docs.front());
  EXPECT_THROW(ingest_corpus(docs, PipelineConfig{}, dir.path() / "s"), DuplicateIdError);
}

TEST(Ingest, SecondRunNeedsUpsert) {
  Fixture f;
  EXPECT_THROW(ingest_corpus(tourism_docs(), f.config, f.config.store_path), DuplicateIdError);
  const auto summary = ingest_corpus(tourism_docs(), f.config, f.config.store_path, true);
  EXPECT_EQ(summary.store_size, 5u);
}

TEST(Pipeline, QcgPromptContainsRelevantChunk) {
  const Fixture f;
  const auto p = f.pipeline();
  const auto r = p.ask(Query("When does the Louvre museum open?"), PipelineMode::Qcg);
  EXPECT_EQ(r.contexts.size(), 2u);
  EXPECT_EQ(r.candidates.size(), 4u);
  EXPECT_EQ(r.answer, r.prompt);  // echo mock
  EXPECT_NE(r.prompt.find("opens at nine"), std::string::npos);
  EXPECT_NE(r.prompt.find("Question: When does the Louvre museum open?"), std::string::npos);
  ASSERT_TRUE(r.expanded_query.has_value());
  EXPECT_EQ(r.expanded_sims.size(), 4u);
  EXPECT_GT(r.iterations, 0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.ranked_ids.size(), 4u);
}

TEST(Pipeline, EveryRetrievalModeAnswers) {
  const Fixture f;
  const auto p = f.pipeline();
  for (auto m : {PipelineMode::WRag, PipelineMode::Bm25, PipelineMode::Bm25L}) {
    const auto r = p.ask(Query("How tall is the Eiffel Tower?"), m);
    ASSERT_EQ(r.contexts.size(), 2u) << to_string(m);
    EXPECT_EQ(r.contexts[0].chunk.doc_id, "eiffel") << to_string(m);
    EXPECT_FALSE(r.expanded_query.has_value());
  }
}

TEST(Pipeline, WithoutRagSendsNoContexts) {
  const Fixture f;
  const auto chat = std::make_shared<MockChatClient>(std::vector<std::string>{"Paris"});
  const auto p = f.pipeline(chat);
  const auto r = p.ask(Query("Where is the Louvre?"), PipelineMode::WoRag);
  EXPECT_EQ(r.answer, "Paris");
  EXPECT_TRUE(r.contexts.empty());
  EXPECT_TRUE(r.candidates.empty());
  EXPECT_EQ(r.prompt.find("[1]"), std::string::npos);
  EXPECT_EQ(chat->prompts().size(), 1u);
}

TEST(Pipeline, TraceMatchesAsk) {
  const Fixture f;
  const auto p = f.pipeline();
  const Query q("Bamboo rafts in Guilin");
  const auto trace = p.trace_graph(q);
  const auto ask = p.ask(q, PipelineMode::Qcg);
  EXPECT_EQ(trace.expanded.concatenated, *ask.expanded_query);
  EXPECT_EQ(trace.sims, ask.expanded_sims);
  EXPECT_EQ(trace.rerank.ranked.front().chunk.id, ask.ranked_ids.front());
  EXPECT_EQ(trace.expanded.n, f.config.rerank.n_dup);
}

TEST(Pipeline, ExpandedQuerySlot) {
  Fixture f;
  f.config.query_slot = QuerySlot::Expanded;
  const auto r = f.pipeline().ask(Query("Louvre hours"), PipelineMode::Qcg);
  EXPECT_NE(r.prompt.find("Question: " + *r.expanded_query), std::string::npos);
}

TEST(Pipeline, RejectsMismatchedEmbedder) {
  const Fixture f;
  EmbedderSpec other;
  other.dim = 64;
  EXPECT_THROW(Pipeline(f.config, f.store, make_embedder(other),
                        std::make_shared<MockChatClient>()),
               StoreSchemaError);
}

TEST(Pipeline, EmptyStoreFailsRetrievalModes) {
  const PipelineConfig c;
  const Pipeline p(c, std::make_shared<VectorStore>(), make_embedder(c.embedder),
                   std::make_shared<MockChatClient>());
  EXPECT_THROW(p.ask(Query("x"), PipelineMode::WRag), EmptyStoreError);
  EXPECT_NO_THROW(p.ask(Query("x"), PipelineMode::WoRag));
}

TEST(Pipeline, OpenLoadsFromConfig) {
  const Fixture f;
  const auto p = Pipeline::open(f.config);
  EXPECT_EQ(p.store().size(), 5u);
  PipelineConfig missing;
  EXPECT_THROW(Pipeline::open(missing), ConfigError);
}

}  // namespace
}  // namespace qcg

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "qcg/errors.hpp"
#include "qcg/expand.hpp"
#include "support.hpp"

namespace qcg {
namespace {

TEST(Keywords, KeepsContentWordsInQueryOrder) {
  const Query q("What are the famous attractions in Guilin?");
  const auto kw = extract_keywords(q, 5, nullptr);
  EXPECT_NE(kw.find("Guilin"), std::string::npos);
  EXPECT_NE(kw.find("attractions"), std::string::npos);
  EXPECT_EQ(kw.find("the"), std::string::npos);
  EXPECT_LT(kw.find("attractions"), kw.find("Guilin"));
}

TEST(Keywords, StopwordOnlyQueryFallsBackToQuery) {
  EXPECT_EQ(extract_keywords(Query("  what is the  "), 5, nullptr), "what is the");
}

TEST(Keywords, CapAndRarityOrdering) {
  const std::vector<Chunk> cs{Chunk{"1", "river river river boat", "d", {}, {}},
                              Chunk{"2", "river", "d", {}, {}},
                              Chunk{"3", "river tour", "d", {}, {}}};
  const auto stats = CorpusStats::build(cs);
  // "river" is everywhere, "boat" once, "karst" never: rarest first.
  EXPECT_EQ(extract_keywords(Query("river boat karst"), 2, &stats), "karst boat");
  EXPECT_EQ(extract_keywords(Query("river river boat"), 5, nullptr), "river boat");
  EXPECT_THROW(extract_keywords(Query("x"), 0, nullptr), ConfigError);
}

TEST(CriticalInfo, LlmReplyIsTrimmed) {
  const MockChatClient llm({"  Guilin attractions \n"});
  ExtractionSpec spec;
  spec.kind = ExtractionKind::LlmPrompted;
  const auto info = extract_critical_info(Query("What to see in Guilin?"), spec, &llm);
  EXPECT_EQ(info.text, "Guilin attractions");
  EXPECT_FALSE(info.fell_back);
  ASSERT_EQ(llm.prompts().size(), 1u);
  EXPECT_NE(llm.prompts()[0].find("What to see in Guilin?"), std::string::npos);
  EXPECT_EQ(llm.prompts()[0].find("{query}"), std::string::npos);
}

TEST(CriticalInfo, EmptyLlmReplyFallsBackToKeywords) {
  const MockChatClient llm({"   "});
  ExtractionSpec spec;
  spec.kind = ExtractionKind::LlmPrompted;
  const auto info = extract_critical_info(Query("Opening hours of the Louvre"), spec, &llm);
  EXPECT_TRUE(info.fell_back);
  EXPECT_NE(info.text.find("Louvre"), std::string::npos);
  EXPECT_THROW(extract_critical_info(Query("x"), spec, nullptr), ConfigError);
}

TEST(CriticalInfo, KeywordModeNeverCallsTheModel) {
  const MockChatClient llm({"unused"});
  const auto info = extract_critical_info(Query("Guilin rivers"), ExtractionSpec{}, &llm);
  EXPECT_EQ(info.text, "Guilin rivers");
  EXPECT_TRUE(llm.prompts().empty());
}

TEST(ExtractionSpec, TemplateNeedsOnePlaceholder) {
  ExtractionSpec spec;
  spec.kind = ExtractionKind::LlmPrompted;
  spec.prompt_template = "no slot";
  EXPECT_THROW(spec.validate(), TemplateError);
  spec.prompt_template = "{query} {query}";
  EXPECT_THROW(spec.validate(), TemplateError);
  spec.prompt_template = "Extract: {query}";
  EXPECT_NO_THROW(spec.validate());
}

TEST(ExtractionSpec, LoadsTemplateFromFile) {
  testing_support::TempDir dir;
  const auto good = dir.path() / "good.txt";
  const auto bad = dir.path() / "bad.txt";
  testing_support::write_file(good, "Keywords for {query}:");
  testing_support::write_file(bad, "Keywords:");
  EXPECT_EQ(load_prompt_template(good), "Keywords for {query}:");
  EXPECT_THROW(load_prompt_template(bad), TemplateError);
  EXPECT_THROW(load_prompt_template(dir.path() / "missing.txt"), ConfigError);
}

TEST(ExpandedQuery, UnitDuplication) {
  const Query q("A");
  EXPECT_EQ(build_expanded_query(q, "B", 1).concatenated, "A B");
  EXPECT_EQ(build_expanded_query(q, "B", 3).concatenated, "A B A B A B");
  EXPECT_THROW(build_expanded_query(q, "B", 0), InputError);
}

TEST(ExpandedQuery, CriticalOnlyDuplication) {
  const Query q("A");
  const auto e = build_expanded_query(q, "B", 3, DuplicationMode::CriticalOnly);
  EXPECT_EQ(e.concatenated, "A B B B");
  EXPECT_EQ(e.mode, DuplicationMode::CriticalOnly);
}

TEST(ExpandedQuery, EmptyCriticalInfoCollapses) {
  EXPECT_EQ(build_expanded_query(Query("A"), "", 3).concatenated, "A A A");
  EXPECT_EQ(build_expanded_query(Query("A"), "", 3, DuplicationMode::CriticalOnly).concatenated,
            "A");
}

TEST(ExpandedQuery, LengthProperty) {
  const Query q("Which museums open late in Paris?");
  const std::string cr = "museums Paris late";
  for (int n = 1; n <= 8; ++n) {
    const auto unit = build_expanded_query(q, cr, n);
    const std::size_t u = q.text().size() + 1 + cr.size();
    EXPECT_EQ(unit.concatenated.size(), n * u + (n - 1)) << n;
    const auto crit = build_expanded_query(q, cr, n, DuplicationMode::CriticalOnly);
    EXPECT_EQ(crit.concatenated.size(), q.text().size() + n * (cr.size() + 1)) << n;
    EXPECT_EQ(unit.original.text(), q.text());
    EXPECT_EQ(unit.critical_info, cr);
    EXPECT_EQ(unit.n, n);
  }
}

TEST(ExpandedQuery, Deterministic) {
  const Query q("Guilin rivers");
  const auto a = build_expanded_query(q, "Li river", 4);
  const auto b = build_expanded_query(q, "Li river", 4);
  EXPECT_EQ(a.concatenated, b.concatenated);
}

}  // namespace
}  // namespace qcg

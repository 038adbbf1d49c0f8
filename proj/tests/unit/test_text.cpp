// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "qcg/errors.hpp"
#include "qcg/text.hpp"

namespace qcg::text {
namespace {

using Tokens = std::vector<std::string>;

TEST(Nfc, ComposesCombiningMarks) {
  EXPECT_EQ(nfc("Cafe\xCC\x81"), "Caf\xC3\xA9");
  EXPECT_EQ(nfc("plain ascii"), "plain ascii");
}

TEST(Nfc, RejectsInvalidUtf8) { EXPECT_THROW(nfc("bad \xFF byte"), InputError); }

TEST(Trim, StripsUnicodeWhitespace) {
  EXPECT_EQ(trim("  \t hi there \n"), "hi there");
  EXPECT_EQ(trim("\xC2\xA0x\xE3\x80\x80"), "x");  // NBSP and ideographic space
  EXPECT_EQ(trim("   "), "");
}

TEST(Canonical, NormalizesThenTrims) { EXPECT_EQ(canonical("  e\xCC\x81  "), "\xC3\xA9"); }

TEST(CodePointOffsets, CountsCodePointsNotBytes) {
  const auto offsets = code_point_offsets("a\xC3\xA9\xE6\xA1\x82");  // a, e-acute, Han
  EXPECT_EQ(offsets, (std::vector<std::size_t>{0, 1, 3, 6}));
  EXPECT_EQ(code_point_offsets(""), (std::vector<std::size_t>{0}));
}

TEST(Tokenize, SplitsOnWhitespaceAndPunctuation) {
  EXPECT_EQ(tokenize("Hello, World! It's 2024."), (Tokens{"hello", "world", "it", "s", "2024"}));
}

TEST(Tokenize, KeepsCaseWhenAsked) {
  EXPECT_EQ(tokenize("Guilin Rivers", false), (Tokens{"Guilin", "Rivers"}));
}

TEST(Tokenize, SplitsHanAndKanaPerCharacter) {
  // Guilin landscape, then katakana "kamera"
  EXPECT_EQ(tokenize("\xE6\xA1\x82\xE6\x9E\x97\xE5\xB1\xB1\xE6\xB0\xB4 ok"),
            (Tokens{"\xE6\xA1\x82", "\xE6\x9E\x97", "\xE5\xB1\xB1", "\xE6\xB0\xB4", "ok"}));
  EXPECT_EQ(tokenize("\xE3\x82\xAB\xE3\x83\xA1\xE3\x83\xA9"),
            (Tokens{"\xE3\x82\xAB", "\xE3\x83\xA1", "\xE3\x83\xA9"}));
}

TEST(Tokenize, MixedScriptRunBreaksAtHan) {
  EXPECT_EQ(tokenize("abc\xE6\xA1\x82xyz"), (Tokens{"abc", "\xE6\xA1\x82", "xyz"}));
}

TEST(Tokenize, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,.;!? ").empty());
}

}  // namespace
}  // namespace qcg::text

// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include "qcg/errors.hpp"

namespace qcg::text {
namespace {

// Decodes one code point at `pos`, advancing it. Returns a negative value on
// malformed input.
UChar32 next_code_point(std::string_view s, std::size_t& pos) {
  UChar32 c = 0;
  int32_t i = static_cast<int32_t>(pos);
  U8_NEXT(s.data(), i, static_cast<int32_t>(s.size()), c);
  pos = static_cast<std::size_t>(i);
  return c;
}

bool is_ideographic(UChar32 c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA;
}

bool is_token_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const auto type = static_cast<UCharCategory>(u_charType(c));
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  // Validate first: fromUTF8 silently substitutes U+FFFD.
  code_point_offsets(s);
  const icu::UnicodeString in =
      icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (normalizer->isNormalized(in, status) && U_SUCCESS(status)) {
    return std::string(s);
  }
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = normalizer->normalize(in, status);
  if (U_FAILURE(status)) {
    throw InputError(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t next = begin;
    const UChar32 c = next_code_point(s, next);
    if (c < 0 || !u_isUWhiteSpace(c)) break;
    begin = next;
  }
  std::size_t end = s.size();
  while (end > begin) {
    int32_t i = static_cast<int32_t>(end);
    UChar32 c = 0;
    U8_PREV(s.data(), 0, i, c);
    if (c < 0 || !u_isUWhiteSpace(c)) break;
    end = static_cast<std::size_t>(i);
  }
  return s.substr(begin, end - begin);
}

std::string canonical(std::string_view s) {
  const std::string normalized = nfc(s);
  return std::string(trim(normalized));
}

std::vector<std::size_t> code_point_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  offsets.reserve(s.size() + 1);
  std::size_t pos = 0;
  while (pos < s.size()) {
    offsets.push_back(pos);
    if (next_code_point(s, pos) < 0) {
      throw InputError("invalid UTF-8 at byte " + std::to_string(offsets.back()));
    }
  }
  offsets.push_back(s.size());
  return offsets;
}

std::vector<std::string> tokenize(std::string_view s, bool lowercase) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t at = pos;
    UChar32 c = next_code_point(s, pos);
    if (c < 0) {
      throw InputError("invalid UTF-8 at byte " + std::to_string(at));
    }
    if (is_ideographic(c)) {
      flush();
      std::string single;
      append_utf8(single, c);
      tokens.push_back(std::move(single));
      continue;
    }
    if (!is_token_char(c)) {
      flush();
      continue;
    }
    append_utf8(current, lowercase ? u_tolower(c) : c);
  }
  flush();
  return tokens;
}

}  // namespace qcg::text

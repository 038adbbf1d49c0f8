// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qcg::text {

/// Unicode NFC. Invalid UTF-8 raises InputError.
std::string nfc(std::string_view s);

/// Strips leading and trailing Unicode whitespace.
std::string_view trim(std::string_view s);

/// NFC followed by trim; the canonical form fed to embedders and cache keys.
std::string canonical(std::string_view s);

/// Byte offset of every code point in `s`, plus a final entry equal to
/// s.size(). Invalid UTF-8 raises InputError.
std::vector<std::size_t> code_point_offsets(std::string_view s);

/// Splits on whitespace and punctuation. Runs of Han/Kana are emitted one
/// character per token. Letters are lower-cased when `lowercase` is set.
std::vector<std::string> tokenize(std::string_view s, bool lowercase = true);

}  // namespace qcg::text

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace driftdiff::datadiff {

/// Decodes UTF-8 into code points. Invalid bytes map to U+DC80..U+DCFF so the
/// original bytes survive a round trip through encode_utf8.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t c);

enum class EditKind : std::uint8_t { Insert, Delete, Substitute };

std::string_view to_string(EditKind kind);

/// One edit. Delete/Substitute positions index the source string, Insert
/// positions index the target string. `ch` is the inserted or substituted-in
/// character, or the deleted character.
struct EditOp {
    EditKind kind = EditKind::Substitute;
    std::size_t position = 0;
    char32_t ch = 0;

    bool operator==(const EditOp&) const = default;
};

struct EditScript {
    std::size_t distance = 0;
    std::vector<EditOp> ops; // ascending by position of the source walk
};

/// Full DP table with backtrace; on ties the backtrace prefers substitution,
/// then deletion, then insertion.
EditScript levenshtein(std::u32string_view a, std::u32string_view b);
EditScript levenshtein(std::string_view a, std::string_view b);

/// Distance only, O(min(|a|,|b|)) memory.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

} // namespace driftdiff::datadiff

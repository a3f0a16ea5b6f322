// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace driftdiff {

namespace {

constexpr std::array<std::string_view, 7> kValueTypeNames = {
    "Text", "Integer", "Float", "DateTime", "Json", "Boolean", "NullOnly"};

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

} // namespace

std::string_view to_string(ValueType type) {
    return kValueTypeNames[static_cast<std::size_t>(type)];
}

std::optional<ValueType> value_type_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kValueTypeNames.size(); ++i) {
        if (kValueTypeNames[i] == name) return static_cast<ValueType>(i);
    }
    return std::nullopt;
}

bool is_null_token(std::string_view raw) noexcept {
    return raw.empty() || raw == "null" || raw == "NULL" || raw == "NA" || raw == "N/A";
}

std::int64_t Timestamp::instant() const noexcept {
    const std::int64_t days =
        days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second;
    if (offset_minutes) secs -= static_cast<std::int64_t>(*offset_minutes) * 60;
    return secs;
}

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::File: return "File";
        case SourceKind::Database: return "Database";
        case SourceKind::Query: return "Query";
    }
    return "File";
}

std::string_view to_string(KeySpec::Mode mode) {
    switch (mode) {
        case KeySpec::Mode::Primary: return "Primary";
        case KeySpec::Mode::CompositeBusiness: return "CompositeBusiness";
        case KeySpec::Mode::Surrogate: return "Surrogate";
    }
    return "Surrogate";
}

const ColumnDescriptor* Schema::find(std::string_view name) const noexcept {
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::vector<std::string> Schema::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.name);
    return out;
}

std::string fold_column_name(std::string_view name) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!name.empty() && is_space(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
    while (!name.empty() && is_space(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
    std::string out(name);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string RowKey::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '|';
        out += parts[i];
    }
    return out;
}

} // namespace driftdiff

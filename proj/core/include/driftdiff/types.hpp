// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace driftdiff {

enum class ValueType : std::uint8_t { Text, Integer, Float, DateTime, Json, Boolean, NullOnly };

std::string_view to_string(ValueType type);
std::optional<ValueType> value_type_from_string(std::string_view name);

/// Null tokens, case-sensitive: "", "null", "NULL", "NA", "N/A".
bool is_null_token(std::string_view raw) noexcept;

/// A calendar timestamp as written. Naive timestamps (no offset) are read as UTC
/// when an instant is needed.
struct Timestamp {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
    bool has_time = false;
    std::optional<int> offset_minutes;

    /// Seconds since 1970-01-01T00:00:00Z.
    std::int64_t instant() const noexcept;

    bool operator==(const Timestamp&) const = default;
};

using Payload = std::variant<std::monostate, std::string, std::int64_t, double, Timestamp,
                             nlohmann::json, bool>;

/// One parsed cell. `raw` is always the verbatim input text; `payload` is
/// monostate iff the cell is null. A raw that does not conform to the column
/// type falls back to Text with `nonconforming` set.
struct Value {
    ValueType type = ValueType::Text;
    Payload payload;
    std::string raw;
    bool nonconforming = false;

    bool is_null() const noexcept { return std::holds_alternative<std::monostate>(payload); }
    /// Type the payload actually carries (Text for fallbacks).
    ValueType effective_type() const noexcept { return nonconforming ? ValueType::Text : type; }

    bool operator==(const Value&) const = default;
};

enum class SourceKind : std::uint8_t { File, Database, Query };

std::string_view to_string(SourceKind kind);

struct ColumnDescriptor {
    std::string name;
    std::size_t ordinal = 0;
    ValueType value_type = ValueType::Text;
    bool nullable = false;
    double null_fraction = 0.0;

    bool operator==(const ColumnDescriptor&) const = default;
};

struct Schema {
    std::vector<ColumnDescriptor> columns;
    SourceKind source_kind = SourceKind::File;
    /// Declared key columns, when the source carries them (database primary keys).
    std::vector<std::string> key_columns;

    const ColumnDescriptor* find(std::string_view name) const noexcept;
    std::vector<std::string> column_names() const;

    bool operator==(const Schema&) const = default;
};

/// Lowercase (ASCII) and trimmed; the uniqueness domain for column names.
std::string fold_column_name(std::string_view name);

struct KeySpec {
    enum class Mode : std::uint8_t { Primary, CompositeBusiness, Surrogate };

    Mode mode = Mode::Surrogate;
    std::vector<std::string> columns;

    static KeySpec primary(std::vector<std::string> cols) { return {Mode::Primary, std::move(cols)}; }
    static KeySpec composite(std::vector<std::string> cols) {
        return {Mode::CompositeBusiness, std::move(cols)};
    }
    static KeySpec surrogate() { return {Mode::Surrogate, {}}; }

    bool operator==(const KeySpec&) const = default;
};

std::string_view to_string(KeySpec::Mode mode);

/// Row identity. Ordered lexicographically over its parts.
struct RowKey {
    std::vector<std::string> parts;

    std::string to_string() const;
    auto operator<=>(const RowKey&) const = default;
    bool operator==(const RowKey&) const = default;
};

} // namespace driftdiff

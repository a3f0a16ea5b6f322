// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftdiff/types.hpp"

namespace driftdiff::ingest {

/// Rows sampled for type inference.
inline constexpr std::size_t kInferenceSampleCap = 1000;

/// Most specific type every non-null sample satisfies, checked in the order
/// Integer, Float, Boolean, DateTime, Json, Text. NullOnly when nothing but
/// null tokens was seen. Only the first `sample_cap` samples are considered.
ValueType infer_type(std::span<const std::string_view> samples,
                     std::size_t sample_cap = kInferenceSampleCap);
ValueType infer_type(std::span<const std::string> samples,
                     std::size_t sample_cap = kInferenceSampleCap);

std::optional<std::int64_t> parse_integer(std::string_view raw) noexcept;
std::optional<double> parse_float(std::string_view raw) noexcept;
std::optional<bool> parse_boolean(std::string_view raw) noexcept;
/// Accepts YYYY-MM-DD, YYYY-MM-DDTHH:MM:SS[Z|+HH:MM], "YYYY-MM-DD HH:MM:SS"
/// and MM/DD/YYYY. Anything else is not a timestamp.
std::optional<Timestamp> parse_timestamp(std::string_view raw) noexcept;
/// JSON objects and arrays only; bare scalars are not documents.
std::optional<nlohmann::json> parse_json_document(std::string_view raw);

/// Never fails: a raw that does not conform to `target` comes back as a Text
/// value with `nonconforming` set.
Value parse_value(std::string_view raw, ValueType target);

enum class CellState : std::uint8_t { Ok, Null, Nonconforming };

CellState classify(std::string_view raw, ValueType type);

/// Column-major raw storage: one contiguous arena per column.
class ColumnData {
public:
    void push(std::string_view raw) {
        arena_.append(raw);
        ends_.push_back(arena_.size());
    }
    void reserve(std::size_t rows) { ends_.reserve(rows); }

    std::size_t size() const noexcept { return ends_.size(); }
    std::string_view raw(std::size_t row) const noexcept {
        const std::uint64_t begin = row == 0 ? 0 : ends_[row - 1];
        return std::string_view(arena_).substr(begin, ends_[row] - begin);
    }
    CellState state(std::size_t row) const noexcept { return states_[row]; }

    std::size_t memory_bytes() const noexcept {
        return arena_.capacity() + ends_.capacity() * sizeof(std::uint64_t) + states_.capacity();
    }

private:
    friend class SnapshotBuilder;

    std::string arena_;
    std::vector<std::uint64_t> ends_;
    std::vector<CellState> states_;
};

/// Immutable typed table. Safe for concurrent readers.
class TableSnapshot {
public:
    TableSnapshot() = default;

    const Schema& schema() const noexcept { return schema_; }
    std::size_t row_count() const noexcept { return row_count_; }
    std::size_t column_count() const noexcept { return columns_.size(); }
    const std::string& provenance() const noexcept { return provenance_; }

    std::string_view raw(std::size_t row, std::size_t col) const noexcept {
        return columns_[col].raw(row);
    }
    CellState state(std::size_t row, std::size_t col) const noexcept {
        return columns_[col].state(row);
    }
    const ColumnData& column(std::size_t col) const noexcept { return columns_[col]; }

    Value value(std::size_t row, std::size_t col) const {
        return parse_value(raw(row, col), schema_.columns[col].value_type);
    }
    std::vector<Value> row(std::size_t row) const;

    std::size_t memory_bytes() const noexcept;

private:
    friend class SnapshotBuilder;

    Schema schema_;
    std::vector<ColumnData> columns_;
    std::size_t row_count_ = 0;
    std::string provenance_;
};

/// Accumulates raw rows, then infers the schema.
class SnapshotBuilder {
public:
    explicit SnapshotBuilder(std::vector<std::string> column_names);

    std::size_t column_count() const noexcept { return names_.size(); }
    std::size_t row_count() const noexcept { return rows_; }

    void add_row(std::span<const std::string_view> raws);
    void add_row(std::span<const std::string> raws);
    void reserve(std::size_t rows);

    /// Declared types win over inference for the given columns.
    void declare_type(std::size_t col, ValueType type);

    /// Throws EmptyInput when no rows were added and DuplicateColumn when two
    /// names collide after folding.
    TableSnapshot finish(SourceKind kind, std::string provenance,
                         std::vector<std::string> key_columns = {});

private:
    std::vector<std::string> names_;
    std::vector<ColumnData> columns_;
    std::vector<std::optional<ValueType>> declared_;
    std::size_t rows_ = 0;
};

struct SourceDescriptor {
    enum class Kind : std::uint8_t { DelimitedFile, JsonLinesFile, DatabaseTable, Query };

    Kind kind = Kind::DelimitedFile;
    std::filesystem::path path;
    std::string table;
    std::string sql;

    /// .jsonl / .ndjson are JSON-lines; everything else is read as delimited text.
    static SourceDescriptor file(std::filesystem::path p);
    static SourceDescriptor database_table(std::filesystem::path db, std::string table);
    static SourceDescriptor query(std::filesystem::path db, std::string sql);

    std::string describe() const;
};

TableSnapshot read_snapshot(const SourceDescriptor& source);
TableSnapshot read_delimited(const std::filesystem::path& path);
TableSnapshot read_json_lines(const std::filesystem::path& path);
TableSnapshot read_table(const std::filesystem::path& database, const std::string& table);
/// Runs one read-only statement against a database opened read-only.
TableSnapshot execute_query(const std::filesystem::path& database, std::string_view sql);

char detect_delimiter(std::string_view header_line) noexcept;

void write_delimited(const TableSnapshot& snapshot, const std::filesystem::path& path,
                     char delimiter = ',');
void write_json_lines(const TableSnapshot& snapshot, const std::filesystem::path& path);

} // namespace driftdiff::ingest

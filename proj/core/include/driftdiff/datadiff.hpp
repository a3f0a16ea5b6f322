// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftdiff/edit_distance.hpp"
#include "driftdiff/ingest.hpp"
#include "driftdiff/schema.hpp"
#include "driftdiff/types.hpp"

namespace driftdiff::datadiff {

enum class StringPattern : std::uint8_t { Truncation, Padding, CaseChange, WhitespaceChange };
enum class DigitPattern : std::uint8_t { Transposition, ZeroPadding };
enum class NullDirection : std::uint8_t { BecameNull, BecameNonNull };

std::string_view to_string(StringPattern p);
std::string_view to_string(DigitPattern p);
std::string_view to_string(NullDirection d);

struct StringEdit {
    std::size_t distance = 0;
    std::vector<EditOp> ops;
    std::optional<StringPattern> pattern;

    bool operator==(const StringEdit&) const = default;
};

struct IntDelta {
    std::int64_t delta = 0;
    std::optional<DigitPattern> digit_pattern;

    bool operator==(const IntDelta&) const = default;
};

struct FloatDelta {
    double delta = 0;
    double rel_delta = 0;
    std::optional<int> rounding_decimals;
    bool precision_artifact = false;

    bool operator==(const FloatDelta&) const = default;
};

inline constexpr std::array<std::string_view, 6> kDateComponents = {"year",   "month",  "day",
                                                                    "hour",   "minute", "second"};

struct DateTimeDelta {
    std::array<std::int64_t, 6> component_deltas{}; // indexed like kDateComponents
    std::optional<int> offset_minutes;

    bool operator==(const DateTimeDelta&) const = default;
};

struct JsonPatch {
    std::vector<std::string> added_paths;
    std::vector<std::string> removed_paths;
    std::vector<std::string> changed_paths;
    /// Node count of the larger document (root excluded); the density denominator.
    std::size_t total_paths = 0;

    bool operator==(const JsonPatch&) const = default;
};

struct NullChange {
    NullDirection direction = NullDirection::BecameNull;

    bool operator==(const NullChange&) const = default;
};

struct TypeMismatch {
    ValueType source_type = ValueType::Text;
    ValueType target_type = ValueType::Text;

    bool operator==(const TypeMismatch&) const = default;
};

using DiffDetail =
    std::variant<StringEdit, IntDelta, FloatDelta, DateTimeDelta, JsonPatch, NullChange, TypeMismatch>;

/// Variant index order; also the one-hot order of the feature vector.
enum class DetailKind : std::uint8_t {
    StringEdit,
    IntDelta,
    FloatDelta,
    DateTimeDelta,
    JsonPatch,
    NullChange,
    TypeMismatch,
};
inline constexpr std::size_t kDetailKindCount = 7;

std::string_view to_string(DetailKind kind);
std::optional<DetailKind> detail_kind_from_string(std::string_view name);
inline DetailKind detail_kind(const DiffDetail& d) noexcept { return static_cast<DetailKind>(d.index()); }

struct CellDiff {
    RowKey key;
    std::string column; // source-side name
    DiffDetail detail;
    Value source_value;
    Value target_value;

    bool operator==(const CellDiff&) const = default;
};

enum class RowStatus : std::uint8_t { Added, Removed, Modified };

std::string_view to_string(RowStatus s);

struct RowDiff {
    RowKey key;
    RowStatus status = RowStatus::Modified;
    std::vector<CellDiff> cells;
};

inline constexpr std::size_t kFeatureDims = 12;
using FeatureVector = std::array<double, kFeatureDims>;

// ── comparators ───────────────────────────────────────────────────

/// Half-away-from-zero rounding on the shortest decimal form of `x`.
double round_decimal(double x, int decimals);
/// Smallest d in [0, 12] with round_decimal(a, d) == b.
std::optional<int> rounding_signature(double a, double b);

std::optional<DiffDetail> diff_string(const Value& a, const Value& b);
std::optional<DiffDetail> diff_integer(const Value& a, const Value& b);
std::optional<DiffDetail> diff_float(const Value& a, const Value& b);
std::optional<DiffDetail> diff_datetime(const Value& a, const Value& b);
std::optional<DiffDetail> diff_json(const Value& a, const Value& b);

/// Null handling, type-mismatch detection, then the per-type comparator.
std::optional<DiffDetail> diff_values(const Value& a, const Value& b);
/// `column.value_type` is the comparison type; `key` is left empty.
std::optional<CellDiff> diff_cell(const Value& a, const Value& b, const ColumnDescriptor& column);

/// Type both sides of a mapped pair are parsed under: the source type, widened
/// to Float for Integer/Float pairs.
ValueType comparison_type(ValueType src, ValueType tgt) noexcept;

/// Raw-text entry point; equal raws short-circuit without parsing.
std::optional<CellDiff> diff_raw(std::string_view a, std::string_view b, const std::string& column,
                                 ValueType cmp);

FeatureVector featurize(const CellDiff& diff);

// ── keys and alignment ────────────────────────────────────────────

/// A mapped column pair as column indices into the two snapshots.
struct ColumnPair {
    std::size_t source_index = 0;
    std::size_t target_index = 0;
    std::string name; // source-side
    ValueType cmp = ValueType::Text;
    bool is_key = false;
};

/// Mapped pairs sorted by source column name (the canonical cell order).
std::vector<ColumnPair> column_pairs(const Schema& src, const Schema& tgt,
                                     const schema::MappingSet& mapping, const KeySpec& key);

struct KeyedRow {
    RowKey key;
    std::uint32_t row = 0;
};

/// Resolved key columns for both sides.
struct KeyPlan {
    KeySpec::Mode mode = KeySpec::Mode::Surrogate;
    std::vector<std::size_t> source_columns; // key columns, or all mapped columns for Surrogate
    std::vector<std::size_t> target_columns;
    std::vector<ValueType> types;            // canonicalization type per column
};

/// Throws UnknownColumn for a key column missing from the source and
/// KeyNotMapped when it has no target counterpart.
KeyPlan plan_keys(const Schema& src, const Schema& tgt, const KeySpec& key, const schema::MappingSet& mapping);

/// Numeric keys lose leading zeros and signs; anything else is verbatim.
std::string canonical_key_part(std::string_view raw, ValueType type);

/// Key per row, sorted by key. Throws DuplicateKey for Primary/Composite keys.
/// Surrogate keys are a content hash of the mapped raws plus an occurrence index.
std::vector<KeyedRow> index_keys(const ingest::TableSnapshot& snap, const KeyPlan& plan, bool target_side);

inline constexpr std::uint32_t kNoRow = UINT32_MAX;

/// One entry of the key-sorted union.
struct AlignedRow {
    RowKey key;
    std::uint32_t source_row = kNoRow;
    std::uint32_t target_row = kNoRow;
};

std::vector<AlignedRow> merge_keys(std::vector<KeyedRow> src, std::vector<KeyedRow> tgt);

struct Alignment {
    std::vector<AlignedRow> pairs;
    std::vector<RowKey> added;
    std::vector<RowKey> removed;
};

Alignment align_rows(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt, const KeySpec& key,
                     const schema::MappingSet& mapping);

/// The key-sorted union of both sides: matched, added and removed rows in one
/// sequence, as batches consume it.
std::vector<AlignedRow> align_union(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                    const KeySpec& key, const schema::MappingSet& mapping);

/// Compares one aligned row. Added/Removed rows carry no cells; a matched row
/// with no differing cells yields nullopt.
std::optional<RowDiff> diff_row(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                const AlignedRow& row, const std::vector<ColumnPair>& pairs);

} // namespace driftdiff::datadiff

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "driftdiff/ingest.hpp"
#include "driftdiff/schema.hpp"

namespace driftdiff::profile {

inline constexpr std::size_t kDefaultBins = 20;
inline constexpr std::size_t kTopValues = 50;
/// Spans longer than this many months switch to quarterly buckets.
inline constexpr int kMonthlySpanLimit = 36;

struct NumericHistogram {
    std::vector<double> edges; // bins + 1 ascending; two equal edges for a degenerate range
    std::vector<std::uint64_t> counts;
    double mean = 0;
    double variance = 0;

    bool operator==(const NumericHistogram&) const = default;
};

struct FrequencyTable {
    std::vector<std::pair<std::string, std::uint64_t>> top; // count desc, then value asc
    std::uint64_t other_count = 0;
    std::uint64_t distinct_count = 0;

    bool operator==(const FrequencyTable&) const = default;
};

enum class Granularity : std::uint8_t { Month, Quarter };

std::string_view to_string(Granularity g);

struct TemporalBuckets {
    Granularity granularity = Granularity::Month;
    std::vector<std::pair<std::string, std::uint64_t>> buckets; // ascending period

    bool operator==(const TemporalBuckets&) const = default;
};

using ProfileBody = std::variant<NumericHistogram, FrequencyTable, TemporalBuckets>;

struct ColumnProfile {
    std::string column;
    ValueType value_type = ValueType::Text;
    ProfileBody body;
    std::uint64_t row_count = 0;
    std::uint64_t null_count = 0;
    /// Non-null cells that do not parse under `value_type`; kept out of the buckets.
    std::uint64_t invalid_count = 0;

    bool operator==(const ColumnProfile&) const = default;
};

struct ProfileOptions {
    /// Shared numeric range; computed from the column when absent.
    std::optional<std::pair<double, double>> range;
    /// Shared temporal granularity; computed from the column when absent.
    std::optional<Granularity> granularity;
    std::size_t bins = kDefaultBins;
    std::size_t top = kTopValues;
};

/// Profiles column `col` read as `as_type`.
ColumnProfile profile_column(const ingest::TableSnapshot& snapshot, std::size_t col, ValueType as_type,
                             const ProfileOptions& options = {});
ColumnProfile profile_column(const ingest::TableSnapshot& snapshot, const ColumnDescriptor& column);

struct BucketDelta {
    std::string bucket;
    std::int64_t delta = 0;

    bool operator==(const BucketDelta&) const = default;
};

struct DistributionDelta {
    std::string column;
    std::vector<BucketDelta> bucket_deltas;
    std::vector<std::string> emerging;
    std::vector<std::string> disappearing;
    std::optional<double> mean_shift;
    std::optional<double> variance_shift;
    bool skew_flag = false;

    bool operator==(const DistributionDelta&) const = default;
};

/// Throws IncomparableProfiles on a variant, edge or granularity mismatch.
DistributionDelta compare_profiles(const ColumnProfile& src, const ColumnProfile& tgt);

struct ColumnSummary {
    ColumnProfile source;
    ColumnProfile target;
    DistributionDelta delta;

    bool operator==(const ColumnSummary&) const = default;
};

struct SummaryDiff {
    std::vector<ColumnSummary> columns; // source ordinal order

    bool operator==(const SummaryDiff&) const = default;
};

/// Runs a list of independent tasks, possibly concurrently, and returns when all are done.
using TaskRunner = std::function<void(std::vector<std::function<void()>>&)>;

SummaryDiff summarize(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                      const schema::MappingSet& mapping, const TaskRunner& runner = {});

} // namespace driftdiff::profile

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftdiff/datadiff.hpp"

namespace driftdiff::cluster {

inline constexpr double kDefaultRadius = 0.15;
inline constexpr std::size_t kSampleCount = 5;

enum class StaticPattern : std::uint8_t {
    Rounding,
    Truncation,
    ZeroPadding,
    CaseChange,
    WhitespaceChange,
    NullInflation,
    NullDeflation,
    Transposition,
    TimeZoneShift,
    TypeMismatch,
};
inline constexpr std::size_t kStaticPatternCount = 10;

std::string_view to_string(StaticPattern p);
std::optional<StaticPattern> static_pattern_from_string(std::string_view name);

/// Every pattern whose predicate holds, sorted by name. Empty means direct
/// inequality, which is routed to dynamic clustering.
std::vector<StaticPattern> static_classify(const datadiff::CellDiff& diff);

struct MicroCluster {
    std::uint32_t id = 0;
    datadiff::FeatureVector centroid{};
    std::uint64_t weight = 0;
    std::vector<std::string> column_set; // sorted, unique

    bool operator==(const MicroCluster&) const = default;
};

struct StreamState {
    std::vector<MicroCluster> clusters; // ascending id
    std::uint32_t next_id = 0;

    bool operator==(const StreamState&) const = default;
};

double distance(const datadiff::FeatureVector& a, const datadiff::FeatureVector& b) noexcept;

/// Nearest micro-cluster within `radius` (lowest id on ties) absorbs `v`;
/// otherwise a new one is opened with the next id.
std::uint32_t stream_insert(StreamState& state, const datadiff::FeatureVector& v, const std::string& column,
                            double radius = kDefaultRadius);

/// `remap[k]` is the id in the merged state of b's cluster with id k.
struct MergeResult {
    StreamState state;
    std::vector<std::uint32_t> remap;
};

/// Folds b's clusters into a in b's id order with the insertion rule on centroids.
MergeResult merge_states(StreamState a, const StreamState& b, double radius = kDefaultRadius);

enum class ClusterKind : std::uint8_t { Static, Dynamic };

std::string_view to_string(ClusterKind k);

std::string static_cluster_id(StaticPattern p);
std::string dynamic_cluster_id(std::uint32_t id);

struct Cluster {
    std::string id;
    ClusterKind kind = ClusterKind::Static;
    std::uint64_t member_count = 0;
    std::vector<std::string> columns;
    std::vector<std::size_t> members; // indices into the diff list, canonical order
    std::vector<std::size_t> samples; // first kSampleCount members
    double purity = 0;
    double entropy = 0;
    /// Static patterns held by more than half of the members.
    std::vector<std::string> candidate_patterns;

    bool operator==(const Cluster&) const = default;
};

/// Cluster-id order: dynamic clusters by number, then static clusters by name.
bool cluster_id_less(const std::string& a, const std::string& b);

struct RowClusterSignature {
    RowKey key;
    std::vector<std::string> signature;

    bool operator==(const RowClusterSignature&) const = default;
};

std::vector<RowClusterSignature> aggregate_rows(const std::vector<std::pair<RowKey, std::string>>& assignments);

/// Clustering outcome for one contiguous run of diffs in canonical order.
struct Assignment {
    std::vector<std::vector<StaticPattern>> patterns; // per diff
    std::vector<std::optional<std::uint32_t>> dynamic; // per diff, id in `state`
    StreamState state;
};

/// Static classification plus stream insertion of the unexplained diffs.
Assignment assign(const std::vector<datadiff::CellDiff>& diffs, double radius = kDefaultRadius);

/// Appends b (covering the diffs right after a's) onto a.
void merge_assignments(Assignment& a, Assignment b, double radius = kDefaultRadius);

std::vector<Cluster> finalize_clusters(const Assignment& assignment, const std::vector<datadiff::CellDiff>& diffs);

/// Cluster ids per diff, in cluster-id order.
std::vector<std::vector<std::string>> cluster_ids_per_diff(const Assignment& assignment);

double purity_of(const std::vector<datadiff::DetailKind>& kinds);
/// Shannon entropy in bits.
double entropy_of(const std::vector<datadiff::DetailKind>& kinds);

} // namespace driftdiff::cluster

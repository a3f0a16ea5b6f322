// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "driftdiff/label.hpp"
#include "driftdiff/profile.hpp"
#include "driftdiff/schema.hpp"
#include "driftdiff/synthetic.hpp"

namespace driftdiff::report {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMarkdownClusters = 10;
inline constexpr std::size_t kMarkdownSamples = 5;

struct LabelMetrics {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;

    bool operator==(const LabelMetrics&) const = default;
};

struct EvaluationResult {
    double precision = 0; // cell diffs
    double recall = 0;
    std::uint64_t true_positives = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t false_negatives = 0;
    std::map<std::string, LabelMetrics> per_label; // labels seen in gold or predictions
    double macro_f1 = 0;                             // over labels present in gold

    bool operator==(const EvaluationResult&) const = default;
};

struct RowGroup {
    std::vector<std::string> signature;
    std::vector<RowKey> keys;

    bool operator==(const RowGroup&) const = default;
};

struct RowCounts {
    std::uint64_t added = 0;
    std::uint64_t removed = 0;
    std::uint64_t modified = 0;

    bool operator==(const RowCounts&) const = default;
};

struct Report {
    nlohmann::json job; // config echo; runtime-only settings are left out
    std::uint64_t source_rows = 0;
    std::uint64_t target_rows = 0;
    schema::MappingSet mapping;
    schema::MetadataDiff metadata;
    profile::SummaryDiff summary;
    RowCounts rows;
    std::vector<RowKey> added_keys;
    std::vector<RowKey> removed_keys;
    std::vector<datadiff::CellDiff> cells;               // canonical order
    std::vector<std::vector<std::string>> cell_clusters; // per cell, cluster-id order
    std::vector<cluster::Cluster> clusters;              // cluster-id order
    std::vector<label::LabelJudgment> judgments;         // parallel to clusters
    std::vector<RowGroup> row_groups;                    // by signature
    std::optional<EvaluationResult> evaluation;

    /// Any added, removed or modified row, or any metadata change.
    bool has_differences() const noexcept;
};

/// Modified count, per-cell cluster ids and row groups from cells + assignment.
void fill_derived(Report& report, const cluster::Assignment& assignment);

nlohmann::json to_json(const Report& report);
/// Canonical bytes: sorted keys, shortest round-trip floats, LF endings.
std::string render_json(const Report& report);
/// Overview, Metadata Diff, Summary Diff, Clusters, Evaluation.
std::string render_markdown(const Report& report);

/// Throws SeedMismatch when the ledger was not generated for this job.
EvaluationResult evaluate(const Report& report, const synthetic::GroundTruthLedger& gold);

nlohmann::json to_json(const EvaluationResult& e);

enum class Format : std::uint8_t { Json, Markdown, Both };

/// Writes report.json and/or report.md into `dir`.
void write_reports(const Report& report, const std::filesystem::path& dir, Format format);

/// 0 = no differences, 1 = differences found.
int exit_code(const Report& report) noexcept;

} // namespace driftdiff::report

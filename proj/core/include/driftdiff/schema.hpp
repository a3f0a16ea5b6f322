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

#include <nlohmann/json.hpp>

#include "driftdiff/types.hpp"

namespace driftdiff::schema {

inline constexpr double kDefaultThreshold = 0.6;
inline constexpr double kMemoryFloor = 0.95;

struct ScoreWeights {
    double lexical = 0.5;
    double structural = 0.2;
    double type_compat = 0.3;
};

enum class MappingOrigin : std::uint8_t { Auto, Memory, Override };

std::string_view to_string(MappingOrigin origin);

struct ColumnMapping {
    std::string source_column;
    std::string target_column;
    double lexical = 0;
    double structural = 0;
    double type_compat = 0;
    double combined = 0;
    MappingOrigin origin = MappingOrigin::Auto;

    bool operator==(const ColumnMapping&) const = default;
};

/// Injective both ways; every column is either mapped or listed as unmapped.
struct MappingSet {
    std::vector<ColumnMapping> mappings;
    std::vector<std::string> unmapped_source;
    std::vector<std::string> unmapped_target;

    const ColumnMapping* by_source(std::string_view name) const noexcept;
    const ColumnMapping* by_target(std::string_view name) const noexcept;

    bool operator==(const MappingSet&) const = default;
};

/// Lowercase, with underscores, hyphens and spaces removed.
std::string fold_for_matching(std::string_view name);

/// 1 - levenshtein(fold(a), fold(b)) / max(|a|, |b|).
double lexical_similarity(std::string_view a, std::string_view b);

/// 1.0 equal, 0.8 Integer/Float, 0.5 anything against Text, else 0.
double type_compatibility(ValueType src, ValueType tgt) noexcept;

struct MemoryEntry {
    std::string source;
    std::string target;
    std::string fingerprint;
    std::uint64_t count = 0;

    bool operator==(const MemoryEntry&) const = default;
};

/// Hash of the sorted source column-name list.
std::string context_fingerprint(const Schema& source);

/// Remembered user corrections. Persisted as a JSON array of entry objects.
class MappingMemory {
public:
    MappingMemory() = default;

    /// Missing file yields an empty memory bound to `path`.
    static MappingMemory load(const std::filesystem::path& path);

    const std::vector<MemoryEntry>& entries() const noexcept { return entries_; }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }
    void bind(std::filesystem::path path) { path_ = std::move(path); }

    bool contains(std::string_view source, std::string_view target,
                  std::string_view fingerprint) const noexcept;
    void add(const std::string& source, const std::string& target, const std::string& fingerprint);

    nlohmann::json to_json() const;
    /// Write-to-temp then rename.
    void save() const;

private:
    std::vector<MemoryEntry> entries_;
    std::optional<std::filesystem::path> path_;
};

struct CandidateScore {
    double lexical = 0;
    double structural = 0;
    double type_compat = 0;
    double combined = 0;
    bool remembered = false;
};

class ScoreMatrix {
public:
    ScoreMatrix(std::vector<std::string> sources, std::vector<std::string> targets);

    std::size_t rows() const noexcept { return sources_.size(); }
    std::size_t cols() const noexcept { return targets_.size(); }
    const std::vector<std::string>& sources() const noexcept { return sources_; }
    const std::vector<std::string>& targets() const noexcept { return targets_; }

    CandidateScore& at(std::size_t i, std::size_t j) { return cells_[i * targets_.size() + j]; }
    const CandidateScore& at(std::size_t i, std::size_t j) const { return cells_[i * targets_.size() + j]; }

    /// |i/rows - j/cols|, the tie-break distance.
    double ordinal_distance(std::size_t i, std::size_t j) const noexcept;

private:
    std::vector<std::string> sources_;
    std::vector<std::string> targets_;
    std::vector<CandidateScore> cells_;
};

ScoreMatrix score_candidates(const Schema& src, const Schema& tgt, const MappingMemory& memory,
                             const ScoreWeights& weights = {});

struct Override {
    std::string source;
    std::string target;

    bool operator==(const Override&) const = default;
};

/// Parses "src=tgt".
std::optional<Override> parse_override(std::string_view text);

/// Overrides first, then greedy by descending combined score. Ties go to the
/// smaller ordinal distance, then the lexicographically smaller source name.
MappingSet resolve_mapping(const ScoreMatrix& matrix, double threshold,
                           std::span<const Override> overrides = {});

/// Inserts or increments the (source, target, fingerprint) entry and rewrites
/// the memory file when the memory is bound to one.
MappingMemory record_correction(MappingMemory memory, const Override& correction, const Schema& src,
                                const Schema& tgt);

enum class ChangeKind : std::uint8_t {
    TypeChanged,
    KeyChanged,
    ColumnRemoved,
    ColumnAdded,
    ColumnRenamed,
    NullabilityChanged,
};

std::string_view to_string(ChangeKind kind);
std::optional<ChangeKind> change_kind_from_string(std::string_view name);
/// 1 = highest downstream impact.
int impact_rank(ChangeKind kind) noexcept;

struct MetadataChange {
    ChangeKind kind = ChangeKind::ColumnAdded;
    std::vector<std::string> subject;
    nlohmann::json before;
    nlohmann::json after;
    int impact_rank = 0;

    bool operator==(const MetadataChange&) const = default;
};

struct MetadataDiff {
    std::vector<MetadataChange> changes; // by impact_rank, then column name

    bool operator==(const MetadataDiff&) const = default;
};

MetadataDiff metadata_diff(const Schema& src, const Schema& tgt, const MappingSet& mapping);

} // namespace driftdiff::schema

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftdiff/types.hpp"

namespace driftdiff::synthetic {

enum class Family : std::uint8_t {
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
    JsonKeyAdd,
    CategoricalRemap,
    ValueReplace,
};
inline constexpr std::size_t kFamilyCount = 13;

std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view name);
std::vector<Family> all_families();

/// Families whose gold label follows directly from a static pattern.
std::vector<Family> static_families();

/// Ontology label a family's differences should receive.
std::string gold_label(Family f);

struct SyntheticSpec {
    std::uint64_t rows = 1000;
    double diff_rate = 0.01;
    std::vector<Family> families = all_families(); // equal weights
    std::uint64_t seed = 42;
};

/// Name and type of the fixed 20-column layout; column 0 ("id") is the key.
struct LayoutColumn {
    std::string name;
    ValueType type;
};
const std::vector<LayoutColumn>& layout();

struct LedgerEntry {
    RowKey key;
    std::string column;
    Family family = Family::Rounding;
    std::optional<std::string> before; // nullopt = null cell
    std::optional<std::string> after;

    bool operator==(const LedgerEntry&) const = default;
};

struct GroundTruthLedger {
    std::uint64_t seed = 0;
    std::uint64_t rows = 0;
    double diff_rate = 0;
    std::vector<LedgerEntry> entries; // key order; one per mutated row

    nlohmann::json to_json() const;
    static GroundTruthLedger from_json(const nlohmann::json& j);
    static GroundTruthLedger load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    bool operator==(const GroundTruthLedger&) const = default;
};

struct SyntheticFiles {
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path ledger;
};

/// round(rows * diff_rate) distinct rows, chosen uniformly, each get exactly one
/// mutated cell. Families are dealt in shuffled rounds so their counts differ
/// by at most one.
GroundTruthLedger plan_mutations(const SyntheticSpec& spec);

/// Writes source.csv, target.csv and ledger.json into `dir`.
SyntheticFiles generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

} // namespace driftdiff::synthetic

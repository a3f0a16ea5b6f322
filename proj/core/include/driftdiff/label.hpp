// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"

namespace driftdiff::label {

inline constexpr std::size_t kDefaultK = 8;
inline constexpr std::size_t kDefaultM = 3;
inline constexpr std::size_t kDefaultTokenBudget = 1200;
inline constexpr std::size_t kDefaultConcurrency = 4;
inline constexpr std::size_t kTopSnippets = 3;

/// The closed label set, "Other" included.
const std::vector<std::string>& ontology();
bool in_ontology(std::string_view name);

/// Labels implied by static patterns: Rounding, Truncation, NullInflation and
/// TimeZoneShift map to themselves, TypeMismatch to TypeCast. Sorted, unique.
std::vector<std::string> implied_labels(const std::vector<std::string>& patterns);

struct DiffLabel {
    std::string name;
    std::string other_explanation; // required iff name == "Other"

    bool operator==(const DiffLabel&) const = default;
};

/// Length- and class-preserving: digits stay digits, letters stay letters of
/// the same case, everything else is kept. Each output character depends on
/// the salt and the input prefix, so equal prefixes map to equal prefixes.
std::string pseudonymize(std::string_view value, std::string_view salt);

struct EvidenceRow {
    std::string row_id;
    std::string column;
    datadiff::DetailKind kind = datadiff::DetailKind::StringEdit;
    std::string source; // pseudonymized
    std::string target; // pseudonymized
    std::optional<int> rounding_decimals;
    std::optional<int> offset_minutes;
    std::optional<datadiff::NullDirection> null_direction;

    bool operator==(const EvidenceRow&) const = default;
};

/// Schema fragments and statistics the engine offers to evidence packs.
struct PackContext {
    std::map<std::string, std::string> column_types; // source column -> "Src->Tgt"
    std::string key_spec;
    std::map<std::string, std::vector<std::string>> column_stats;
};

struct EvidencePack {
    std::string cluster_id;
    std::vector<EvidenceRow> rows;
    std::vector<std::string> columns;        // column names the rationale may cite
    std::vector<std::string> context_lines;  // schema fragments, key spec, statistics
    std::vector<std::string> candidate_patterns;
    std::size_t token_budget = kDefaultTokenBudget;
    std::vector<std::string> evidence_row_ids;

    bool operator==(const EvidencePack&) const = default;
};

/// Whitespace-delimited token count.
std::size_t count_tokens(std::string_view text);

/// Evidence section text; rows start at `rotation` (mod row count).
std::string serialize_pack(const EvidencePack& pack, std::size_t rotation = 0);

/// Greedy farthest-point selection of up to k members, starting from the
/// first in canonical order. Context lines are dropped from the end until the
/// serialized pack fits the budget; rows are never dropped.
EvidencePack sample_evidence(const cluster::Cluster& cluster, const std::vector<datadiff::CellDiff>& diffs,
                             std::size_t k, std::string_view salt, const PackContext& context = {},
                             std::size_t token_budget = kDefaultTokenBudget);

struct KnowledgeSnippet {
    std::string doc_id;
    std::size_t passage = 0;
    std::string text;
    double score = 0;

    bool operator==(const KnowledgeSnippet&) const = default;
};

/// Plain-text and markdown passages, one per blank-line separated paragraph.
class KnowledgeIndex {
public:
    KnowledgeIndex() = default;
    /// A missing directory yields an empty index.
    static KnowledgeIndex load(const std::filesystem::path& dir);
    void add_document(std::string doc_id, std::string_view text);

    std::size_t passage_count() const noexcept { return passages_.size(); }

    /// Top passages by distinct query-token overlap; ties by doc_id, then passage order.
    std::vector<KnowledgeSnippet> retrieve(const std::vector<std::string>& columns,
                                           const std::vector<std::string>& patterns,
                                           std::size_t top = kTopSnippets) const;

private:
    struct Passage {
        std::string doc_id;
        std::size_t index = 0;
        std::string text;
        std::vector<std::string> tokens; // sorted, unique
    };
    std::vector<Passage> passages_;
};

/// Lowercased alphanumeric runs; camel-case names also contribute their parts.
std::vector<std::string> tokenize(std::string_view text);

struct Prompt {
    std::string text;
    nlohmann::json output_schema;
};

nlohmann::json output_schema();

Prompt build_prompt(const EvidencePack& pack, const std::vector<KnowledgeSnippet>& snippets,
                    std::size_t rotation = 0);

enum class Origin : std::uint8_t { Model, Template };

std::string_view to_string(Origin o);

struct LabelJudgment {
    std::vector<DiffLabel> labels; // sorted by name
    std::string rationale;
    double confidence = 0;
    std::vector<std::string> evidence_row_ids;
    std::vector<std::string> recommended_checks;
    Origin origin = Origin::Template;

    /// Label names joined with ':'.
    std::string label_string() const;
    std::vector<std::string> label_names() const;

    bool operator==(const LabelJudgment&) const = default;
};

enum class GuardFailure : std::uint8_t {
    WhitelistViolation,
    UnknownColumnReference,
    UnsupportedClaim,
    MalformedOutput,
    EvidenceIdUnknown,
};

std::string_view to_string(GuardFailure f);

struct GuardReport {
    bool passed = true;
    std::vector<GuardFailure> failures;
};

/// Completes a prompt under an output schema at temperature 0. Implementations
/// must be deterministic in (prompt, schema) and safe to call concurrently.
/// Transport failures throw Error(ClientUnavailable).
class LabelerClient {
public:
    virtual ~LabelerClient() = default;
    virtual std::string complete(const std::string& prompt, const nlohmann::json& output_schema,
                                 double temperature) = 0;
};

/// Parses one completion against the output schema. Labels outside the
/// ontology are rejected here, like any other schema violation.
std::optional<LabelJudgment> parse_judgment(std::string_view text);

struct DecodeResult {
    std::vector<LabelJudgment> candidates;
    std::vector<GuardFailure> failures; // one MalformedOutput per unparseable completion
};

/// Requests m completions, candidate i over the pack rotated by i * max(1, n/2) rows.
DecodeResult decode_labels(LabelerClient& client, const EvidencePack& pack,
                           const std::vector<KnowledgeSnippet>& snippets, std::size_t m);

/// Majority vote over candidates. Confidence is the mean confidence of the
/// candidates carrying every kept label times their share of all candidates.
LabelJudgment aggregate_judgments(const std::vector<LabelJudgment>& candidates);

/// 0.5 * aggregated + 0.3 * pattern agreement + 0.2 * purity.
double calibrate_confidence(const LabelJudgment& judgment, const cluster::Cluster& cluster,
                            const std::vector<std::string>& patterns);

GuardReport passes_guards(const LabelJudgment& judgment, const EvidencePack& pack);

LabelJudgment template_label(const cluster::Cluster& cluster, const std::vector<std::string>& patterns);

struct LabelConfig {
    bool enabled = true;
    std::size_t k = kDefaultK;
    std::size_t m = kDefaultM;
    std::size_t token_budget = kDefaultTokenBudget;
    std::size_t concurrency = kDefaultConcurrency;
    std::string salt = "driftdiff";
};

/// Sample, retrieve, build, decode, aggregate, guard. Any guard failure,
/// client error or missing client falls back to template_label.
LabelJudgment label_cluster(const cluster::Cluster& cluster, const std::vector<datadiff::CellDiff>& diffs,
                            const LabelConfig& config, LabelerClient* client, const KnowledgeIndex& index,
                            const PackContext& context = {});

/// Labels every cluster with at most config.concurrency client calls in
/// flight; results come back in the clusters' order.
std::vector<LabelJudgment> label_clusters(const std::vector<cluster::Cluster>& clusters,
                                          const std::vector<datadiff::CellDiff>& diffs, const LabelConfig& config,
                                          LabelerClient* client, const KnowledgeIndex& index,
                                          const PackContext& context = {});

} // namespace driftdiff::label

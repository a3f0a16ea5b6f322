// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "driftdiff/error.hpp"
#include "driftdiff/serialize.hpp"

namespace driftdiff::report {

namespace {

using nlohmann::json;

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    std::string out = buf;
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

// Pipes and line breaks would split a markdown table cell.
std::string cell_text(std::string_view s, std::size_t limit = 60) {
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    if (out.size() > limit) out = out.substr(0, limit) + "...";
    return out;
}

std::string value_text(const Value& v) { return v.is_null() ? "null" : "`" + cell_text(v.raw) + "`"; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

LabelMetrics finish(LabelMetrics m) {
    m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    const auto denom = 2 * m.tp + m.fp + m.fn;
    m.f1 = denom ? 2.0 * static_cast<double>(m.tp) / static_cast<double>(denom) : 0.0;
    return m;
}

} // namespace

bool Report::has_differences() const noexcept {
    return rows.added || rows.removed || rows.modified || !cells.empty() || !metadata.changes.empty();
}

void fill_derived(Report& report, const cluster::Assignment& assignment) {
    report.rows.added = report.added_keys.size();
    report.rows.removed = report.removed_keys.size();
    std::set<RowKey> modified;
    for (const auto& c : report.cells) modified.insert(c.key);
    report.rows.modified = modified.size();
    report.cell_clusters = cluster::cluster_ids_per_diff(assignment);

    std::vector<std::pair<RowKey, std::string>> touches;
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        for (const auto& id : report.cell_clusters[i]) touches.emplace_back(report.cells[i].key, id);
    }
    std::map<std::vector<std::string>, std::vector<RowKey>> groups;
    for (auto& sig : cluster::aggregate_rows(touches)) groups[sig.signature].push_back(std::move(sig.key));
    report.row_groups.clear();
    for (auto& [signature, keys] : groups) report.row_groups.push_back({signature, std::move(keys)});
}

json to_json(const EvaluationResult& e) {
    json labels = json::object();
    for (const auto& [name, m] : e.per_label) {
        labels[name] = {{"tp", m.tp},           {"fp", m.fp},         {"fn", m.fn},
                        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    }
    return {{"precision", e.precision},
            {"recall", e.recall},
            {"true_positives", e.true_positives},
            {"false_positives", e.false_positives},
            {"false_negatives", e.false_negatives},
            {"per_label", labels},
            {"macro_f1", e.macro_f1}};
}

json to_json(const Report& r) {
    json cells = json::array();
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        auto c = serialize::to_json(r.cells[i]);
        c["clusters"] = i < r.cell_clusters.size() ? r.cell_clusters[i] : std::vector<std::string>{};
        cells.push_back(std::move(c));
    }
    json clusters = json::array();
    for (std::size_t i = 0; i < r.clusters.size(); ++i) {
        const auto& c = r.clusters[i];
        auto j = serialize::to_json(c);
        json samples = json::array();
        for (auto s : c.samples) samples.push_back(serialize::to_json(r.cells.at(s)));
        j["sample_diffs"] = std::move(samples);
        if (i < r.judgments.size()) {
            j["judgment"] = serialize::to_json(r.judgments[i]);
            j["label"] = r.judgments[i].label_string();
        }
        clusters.push_back(std::move(j));
    }
    json groups = json::array();
    for (const auto& g : r.row_groups) {
        groups.push_back({{"signature", g.signature},
                          {"row_count", g.keys.size()},
                          {"keys", serialize::array_of(g.keys, [](const RowKey& k) { return serialize::to_json(k); })}});
    }
    json out = {
        {"schema_version", kSchemaVersion},
        {"job", r.job},
        {"rows", {{"source", r.source_rows}, {"target", r.target_rows}}},
        {"mapping", serialize::to_json(r.mapping)},
        {"metadata_diff", serialize::to_json(r.metadata)},
        {"summary_diff", serialize::to_json(r.summary)},
        {"row_diff_counts", {{"added", r.rows.added}, {"removed", r.rows.removed}, {"modified", r.rows.modified}}},
        {"cell_diff_count", r.cells.size()},
        {"diffs",
         {{"added_keys", serialize::array_of(r.added_keys, [](const RowKey& k) { return serialize::to_json(k); })},
          {"removed_keys", serialize::array_of(r.removed_keys, [](const RowKey& k) { return serialize::to_json(k); })},
          {"cells", cells}}},
        {"clusters", clusters},
        {"row_groups", groups},
    };
    if (r.evaluation) out["evaluation"] = to_json(*r.evaluation);
    return out;
}

std::string render_json(const Report& report) { return serialize::canonical_dump(to_json(report)); }

std::string render_markdown(const Report& r) {
    std::ostringstream md;
    md << "# driftdiff report\n\n## Overview\n\n";
    md << "| | |\n|---|---|\n";
    md << "| Source | `" << cell_text(r.job.value("source", std::string()), 200) << "` (" << r.source_rows
       << " rows) |\n";
    md << "| Target | `" << cell_text(r.job.value("target", std::string()), 200) << "` (" << r.target_rows
       << " rows) |\n";
    md << "| Rows added | " << r.rows.added << " |\n";
    md << "| Rows removed | " << r.rows.removed << " |\n";
    md << "| Rows modified | " << r.rows.modified << " |\n";
    md << "| Cell differences | " << r.cells.size() << " |\n";
    md << "| Clusters | " << r.clusters.size() << " |\n";
    md << "| Mapped columns | " << r.mapping.mappings.size() << " |\n\n";

    md << "## Metadata Diff\n\n";
    if (r.metadata.changes.empty()) {
        md << "No structural changes.\n\n";
    } else {
        md << "| Change | Subject | Before | After |\n|---|---|---|---|\n";
        for (const auto& c : r.metadata.changes) {
            md << "| " << to_string(c.kind) << " | " << cell_text(join(c.subject, ", ")) << " | "
               << cell_text(c.before.is_null() ? "" : c.before.dump()) << " | "
               << cell_text(c.after.is_null() ? "" : c.after.dump()) << " |\n";
        }
        md << '\n';
    }

    md << "## Summary Diff\n\n";
    if (r.summary.columns.empty()) {
        md << "No mapped columns were profiled.\n\n";
    } else {
        md << "| Column | Type | Nulls | Mean shift | Emerging | Disappearing | Skew |\n";
        md << "|---|---|---|---|---|---|---|\n";
        for (const auto& c : r.summary.columns) {
            md << "| " << cell_text(c.source.column) << " | " << to_string(c.source.value_type) << " | "
               << c.source.null_count << " -> " << c.target.null_count << " | "
               << (c.delta.mean_shift ? fixed(*c.delta.mean_shift, 4) : std::string("-")) << " | "
               << c.delta.emerging.size() << " | " << c.delta.disappearing.size() << " | "
               << (c.delta.skew_flag ? "yes" : "no") << " |\n";
        }
        md << '\n';
    }

    md << "## Clusters\n\n";
    if (r.clusters.empty()) {
        md << "0 clusters.\n\n";
    } else {
        std::vector<std::size_t> order(r.clusters.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return r.clusters[a].member_count > r.clusters[b].member_count;
        });
        if (order.size() > kMarkdownClusters) order.resize(kMarkdownClusters);
        md << "Top " << order.size() << " of " << r.clusters.size() << " clusters by size.\n\n";
        for (auto i : order) {
            const auto& c = r.clusters[i];
            const auto* j = i < r.judgments.size() ? &r.judgments[i] : nullptr;
            md << "### " << (j ? j->label_string() : c.id) << "\n\n";
            md << "- Cluster `" << c.id << "` (" << to_string(c.kind) << "), " << c.member_count
               << " differences in " << cell_text(join(c.columns, ", "), 200) << '\n';
            md << "- Purity " << fixed(c.purity, 2) << ", entropy " << fixed(c.entropy, 2) << '\n';
            if (j) {
                md << "- Confidence " << fixed(j->confidence, 2) << " (" << to_string(j->origin) << ")\n";
                for (const auto& l : j->labels) {
                    if (!l.other_explanation.empty()) md << "- Other: " << cell_text(l.other_explanation, 200) << '\n';
                }
                md << "- " << cell_text(j->rationale, 400) << '\n';
            }
            md << "\n| Key | Column | Kind | Source | Target |\n|---|---|---|---|---|\n";
            for (std::size_t s = 0; s < std::min(kMarkdownSamples, c.samples.size()); ++s) {
                const auto& d = r.cells.at(c.samples[s]);
                md << "| " << cell_text(d.key.to_string()) << " | " << cell_text(d.column) << " | "
                   << datadiff::to_string(datadiff::detail_kind(d.detail)) << " | " << value_text(d.source_value)
                   << " | " << value_text(d.target_value) << " |\n";
            }
            md << '\n';
        }
    }

    md << "## Evaluation\n\n";
    if (!r.evaluation) {
        md << "Not evaluated.\n";
    } else {
        const auto& e = *r.evaluation;
        md << "| Metric | Value |\n|---|---|\n";
        md << "| Cell precision | " << fixed(e.precision, 4) << " |\n";
        md << "| Cell recall | " << fixed(e.recall, 4) << " |\n";
        md << "| Macro-F1 | " << fixed(e.macro_f1, 4) << " |\n\n";
        md << "| Label | Precision | Recall | F1 |\n|---|---|---|---|\n";
        for (const auto& [name, m] : e.per_label) {
            md << "| " << name << " | " << fixed(m.precision, 4) << " | " << fixed(m.recall, 4) << " | "
               << fixed(m.f1, 4) << " |\n";
        }
    }
    return md.str();
}

EvaluationResult evaluate(const Report& report, const synthetic::GroundTruthLedger& gold) {
    const auto seed = report.job.find("seed");
    if (seed == report.job.end() || !seed->is_number_unsigned() || seed->get<std::uint64_t>() != gold.seed)
        throw Error(ErrorCode::SeedMismatch, "ledger seed " + std::to_string(gold.seed) + " does not match the job");
    if (report.source_rows != gold.rows)
        throw Error(ErrorCode::SeedMismatch, "ledger covers " + std::to_string(gold.rows) + " rows, job read " +
                                                 std::to_string(report.source_rows));

    EvaluationResult out;
    std::map<std::pair<RowKey, std::string>, std::size_t> predicted;
    for (std::size_t i = 0; i < report.cells.size(); ++i)
        predicted.emplace(std::make_pair(report.cells[i].key, report.cells[i].column), i);
    std::set<std::pair<RowKey, std::string>> expected;
    for (const auto& e : gold.entries) expected.emplace(e.key, e.column);
    for (const auto& p : predicted) {
        if (expected.count(p.first)) {
            ++out.true_positives;
        } else {
            ++out.false_positives;
        }
    }
    out.false_negatives = expected.size() - out.true_positives;
    out.precision = predicted.empty() ? (expected.empty() ? 1.0 : 0.0)
                                      : static_cast<double>(out.true_positives) / static_cast<double>(predicted.size());
    out.recall = expected.empty() ? 1.0 : static_cast<double>(out.true_positives) / static_cast<double>(expected.size());

    std::map<std::string, std::size_t> cluster_index;
    for (std::size_t i = 0; i < report.clusters.size(); ++i) cluster_index[report.clusters[i].id] = i;

    std::map<synthetic::Family, std::map<std::string, std::size_t>> votes;
    std::set<synthetic::Family> families;
    for (const auto& e : gold.entries) {
        families.insert(e.family);
        auto it = predicted.find({e.key, e.column});
        if (it == predicted.end() || it->second >= report.cell_clusters.size()) continue;
        for (const auto& id : report.cell_clusters[it->second]) ++votes[e.family][id];
    }
    std::map<std::string, LabelMetrics> confusion;
    for (auto family : families) {
        std::set<std::string> pred;
        const auto& v = votes[family];
        const std::string* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [id, count] : v) {
            if (count > best_count || (count == best_count && best && cluster::cluster_id_less(id, *best))) {
                best = &id;
                best_count = count;
            }
        }
        if (best) {
            const auto ci = cluster_index.find(*best);
            if (ci != cluster_index.end() && ci->second < report.judgments.size()) {
                for (const auto& name : report.judgments[ci->second].label_names()) pred.insert(name);
            }
        }
        const std::string truth = synthetic::gold_label(family);
        for (const auto& name : pred) {
            if (name == truth) {
                ++confusion[name].tp;
            } else {
                ++confusion[name].fp;
            }
        }
        if (!pred.count(truth)) ++confusion[truth].fn;
    }
    double sum = 0;
    std::size_t gold_labels = 0;
    for (auto& [name, m] : confusion) {
        m = finish(m);
        if (m.tp + m.fn > 0) {
            sum += m.f1;
            ++gold_labels;
        }
    }
    out.per_label = std::move(confusion);
    out.macro_f1 = gold_labels ? sum / static_cast<double>(gold_labels) : 0.0;
    return out;
}

void write_reports(const Report& report, const std::filesystem::path& dir, Format format) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::filesystem::path& path, const std::string& bytes) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
        out << bytes;
    };
    if (format != Format::Markdown) write(dir / "report.json", render_json(report));
    if (format != Format::Json) write(dir / "report.md", render_markdown(report));
}

int exit_code(const Report& report) noexcept { return report.has_differences() ? 1 : 0; }

} // namespace driftdiff::report

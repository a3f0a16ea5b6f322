// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/cluster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace driftdiff::cluster {

namespace {

constexpr std::array<std::string_view, kStaticPatternCount> kPatternNames = {
    "Rounding",      "Truncation",    "ZeroPadding",   "CaseChange",    "WhitespaceChange",
    "NullInflation", "NullDeflation", "Transposition", "TimeZoneShift", "TypeMismatch"};

void insert_sorted(std::vector<std::string>& set, const std::string& value) {
    auto it = std::lower_bound(set.begin(), set.end(), value);
    if (it == set.end() || *it != value) set.insert(it, value);
}

// Index of the nearest cluster within radius, lowest id on ties.
std::optional<std::size_t> nearest(const StreamState& state, const datadiff::FeatureVector& v, double radius) {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.clusters.size(); ++i) {
        const double d = distance(state.clusters[i].centroid, v);
        if (d <= radius && d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

void absorb(MicroCluster& c, const datadiff::FeatureVector& v, std::uint64_t weight) {
    const double w0 = static_cast<double>(c.weight);
    const double w1 = static_cast<double>(weight);
    for (std::size_t k = 0; k < v.size(); ++k) c.centroid[k] = (c.centroid[k] * w0 + v[k] * w1) / (w0 + w1);
    c.weight += weight;
}

std::optional<double> numeric_text(const Value& v) {
    if (v.is_null()) return std::nullopt;
    return ingest::parse_float(v.raw);
}

} // namespace

std::string_view to_string(StaticPattern p) { return kPatternNames[static_cast<std::size_t>(p)]; }

std::optional<StaticPattern> static_pattern_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kPatternNames.size(); ++i) {
        if (kPatternNames[i] == name) return static_cast<StaticPattern>(i);
    }
    return std::nullopt;
}

std::vector<StaticPattern> static_classify(const datadiff::CellDiff& diff) {
    using namespace datadiff;
    std::vector<StaticPattern> out;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, StringEdit>) {
                if (d.pattern) {
                    switch (*d.pattern) {
                        case StringPattern::Truncation: out.push_back(StaticPattern::Truncation); break;
                        case StringPattern::Padding: out.push_back(StaticPattern::ZeroPadding); break;
                        case StringPattern::CaseChange: out.push_back(StaticPattern::CaseChange); break;
                        case StringPattern::WhitespaceChange: out.push_back(StaticPattern::WhitespaceChange); break;
                    }
                }
                // Numbers stored as text can carry a rounding signature too.
                const auto a = numeric_text(diff.source_value);
                const auto b = numeric_text(diff.target_value);
                if (a && b && rounding_signature(*a, *b)) out.push_back(StaticPattern::Rounding);
            } else if constexpr (std::is_same_v<T, IntDelta>) {
                if (d.digit_pattern == DigitPattern::Transposition) out.push_back(StaticPattern::Transposition);
                if (d.digit_pattern == DigitPattern::ZeroPadding) out.push_back(StaticPattern::ZeroPadding);
            } else if constexpr (std::is_same_v<T, FloatDelta>) {
                if (d.rounding_decimals) out.push_back(StaticPattern::Rounding);
            } else if constexpr (std::is_same_v<T, DateTimeDelta>) {
                if (d.offset_minutes) out.push_back(StaticPattern::TimeZoneShift);
            } else if constexpr (std::is_same_v<T, NullChange>) {
                out.push_back(d.direction == NullDirection::BecameNull ? StaticPattern::NullInflation
                                                                       : StaticPattern::NullDeflation);
            } else if constexpr (std::is_same_v<T, datadiff::TypeMismatch>) {
                out.push_back(StaticPattern::TypeMismatch);
            }
        },
        diff.detail);
    std::sort(out.begin(), out.end(), [](StaticPattern a, StaticPattern b) { return to_string(a) < to_string(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double distance(const datadiff::FeatureVector& a, const datadiff::FeatureVector& b) noexcept {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::uint32_t stream_insert(StreamState& state, const datadiff::FeatureVector& v, const std::string& column,
                            double radius) {
    if (auto i = nearest(state, v, radius)) {
        auto& c = state.clusters[*i];
        absorb(c, v, 1);
        insert_sorted(c.column_set, column);
        return c.id;
    }
    MicroCluster c;
    c.id = state.next_id++;
    c.centroid = v;
    c.weight = 1;
    c.column_set = {column};
    state.clusters.push_back(std::move(c));
    return state.clusters.back().id;
}

MergeResult merge_states(StreamState a, const StreamState& b, double radius) {
    MergeResult out;
    out.remap.assign(b.next_id, 0);
    for (const auto& c : b.clusters) {
        if (auto i = nearest(a, c.centroid, radius)) {
            auto& target = a.clusters[*i];
            absorb(target, c.centroid, c.weight);
            for (const auto& col : c.column_set) insert_sorted(target.column_set, col);
            out.remap[c.id] = target.id;
        } else {
            MicroCluster n = c;
            n.id = a.next_id++;
            out.remap[c.id] = n.id;
            a.clusters.push_back(std::move(n));
        }
    }
    out.state = std::move(a);
    return out;
}

std::string_view to_string(ClusterKind k) { return k == ClusterKind::Static ? "Static" : "Dynamic"; }

std::string static_cluster_id(StaticPattern p) { return "S:" + std::string(to_string(p)); }
std::string dynamic_cluster_id(std::uint32_t id) { return "D:" + std::to_string(id); }

bool cluster_id_less(const std::string& a, const std::string& b) {
    const bool da = a.rfind("D:", 0) == 0;
    const bool db = b.rfind("D:", 0) == 0;
    if (da != db) return da;
    if (da) {
        const auto na = std::stoull(a.substr(2));
        const auto nb = std::stoull(b.substr(2));
        if (na != nb) return na < nb;
    }
    return a < b;
}

std::vector<RowClusterSignature> aggregate_rows(const std::vector<std::pair<RowKey, std::string>>& assignments) {
    std::map<RowKey, std::vector<std::string>> rows;
    for (const auto& [key, id] : assignments) rows[key].push_back(id);
    std::vector<RowClusterSignature> out;
    out.reserve(rows.size());
    for (auto& [key, ids] : rows) {
        std::sort(ids.begin(), ids.end(), cluster_id_less);
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        out.push_back({key, std::move(ids)});
    }
    return out;
}

Assignment assign(const std::vector<datadiff::CellDiff>& diffs, double radius) {
    Assignment a;
    a.patterns.reserve(diffs.size());
    a.dynamic.reserve(diffs.size());
    for (const auto& d : diffs) {
        auto patterns = static_classify(d);
        if (patterns.empty()) {
            a.dynamic.push_back(stream_insert(a.state, datadiff::featurize(d), d.column, radius));
        } else {
            a.dynamic.push_back(std::nullopt);
        }
        a.patterns.push_back(std::move(patterns));
    }
    return a;
}

void merge_assignments(Assignment& a, Assignment b, double radius) {
    auto merged = merge_states(std::move(a.state), b.state, radius);
    a.state = std::move(merged.state);
    for (auto& p : b.patterns) a.patterns.push_back(std::move(p));
    for (auto& id : b.dynamic) {
        if (id) id = merged.remap[*id];
        a.dynamic.push_back(id);
    }
}

double purity_of(const std::vector<datadiff::DetailKind>& kinds) {
    if (kinds.empty()) return 0.0;
    std::array<std::size_t, datadiff::kDetailKindCount> counts{};
    for (auto k : kinds) ++counts[static_cast<std::size_t>(k)];
    const auto modal = *std::max_element(counts.begin(), counts.end());
    return static_cast<double>(modal) / static_cast<double>(kinds.size());
}

double entropy_of(const std::vector<datadiff::DetailKind>& kinds) {
    if (kinds.empty()) return 0.0;
    std::array<std::size_t, datadiff::kDetailKindCount> counts{};
    for (auto k : kinds) ++counts[static_cast<std::size_t>(k)];
    double h = 0;
    const double n = static_cast<double>(kinds.size());
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h; // no negative zero
}

std::vector<Cluster> finalize_clusters(const Assignment& assignment, const std::vector<datadiff::CellDiff>& diffs) {
    std::map<std::string, std::vector<std::size_t>> members;
    std::map<std::string, ClusterKind> kinds;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        for (auto p : assignment.patterns[i]) {
            const auto id = static_cluster_id(p);
            members[id].push_back(i);
            kinds[id] = ClusterKind::Static;
        }
        if (assignment.dynamic[i]) {
            const auto id = dynamic_cluster_id(*assignment.dynamic[i]);
            members[id].push_back(i);
            kinds[id] = ClusterKind::Dynamic;
        }
    }
    std::vector<Cluster> out;
    for (auto& [id, idx] : members) {
        Cluster c;
        c.id = id;
        c.kind = kinds[id];
        c.member_count = idx.size();
        std::vector<datadiff::DetailKind> detail_kinds;
        std::map<std::string, std::size_t> pattern_counts;
        for (auto i : idx) {
            insert_sorted(c.columns, diffs[i].column);
            detail_kinds.push_back(datadiff::detail_kind(diffs[i].detail));
            for (auto p : assignment.patterns[i]) ++pattern_counts[std::string(to_string(p))];
        }
        for (const auto& [name, count] : pattern_counts) {
            if (count * 2 > idx.size()) c.candidate_patterns.push_back(name);
        }
        c.purity = purity_of(detail_kinds);
        c.entropy = entropy_of(detail_kinds);
        c.samples.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(kSampleCount, idx.size())));
        c.members = std::move(idx);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return cluster_id_less(a.id, b.id); });
    return out;
}

std::vector<std::vector<std::string>> cluster_ids_per_diff(const Assignment& assignment) {
    std::vector<std::vector<std::string>> out(assignment.patterns.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (auto p : assignment.patterns[i]) out[i].push_back(static_cluster_id(p));
        if (assignment.dynamic[i]) out[i].push_back(dynamic_cluster_id(*assignment.dynamic[i]));
        std::sort(out[i].begin(), out[i].end(), cluster_id_less);
    }
    return out;
}

} // namespace driftdiff::cluster

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/serialize.hpp"

#include "driftdiff/edit_distance.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/ingest.hpp"

namespace driftdiff::serialize {

namespace {

template <class E>
E enum_from(const json& j, std::size_t count) {
    const auto s = j.get<std::string>();
    for (std::size_t i = 0; i < count; ++i) {
        if (to_string(static_cast<E>(i)) == s) return static_cast<E>(i);
    }
    throw Error(ErrorCode::CorruptCheckpoint, "unknown enumerator '" + s + "'");
}

template <class E>
json enum_json(E e) {
    return std::string(to_string(e));
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptCheckpoint, std::string("malformed artifact: ") + e.what());
    }
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

template <class E>
json opt_enum(const std::optional<E>& v) {
    return v ? enum_json(*v) : json(nullptr);
}

template <class E>
std::optional<E> opt_enum_from(const json& j, std::size_t count) {
    if (j.is_null()) return std::nullopt;
    return enum_from<E>(j, count);
}

using StringCounts = std::vector<std::pair<std::string, std::uint64_t>>;

json pairs_json(const StringCounts& v) {
    json out = json::array();
    for (const auto& [k, c] : v) out.push_back(json::array({k, c}));
    return out;
}

StringCounts pairs_from(const json& j) {
    StringCounts out;
    for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::uint64_t>());
    return out;
}

schema::ColumnMapping column_mapping_from(const json& j) {
    schema::ColumnMapping m;
    m.source_column = j.at("source").get<std::string>();
    m.target_column = j.at("target").get<std::string>();
    m.lexical = j.at("lexical").get<double>();
    m.structural = j.at("structural").get<double>();
    m.type_compat = j.at("type_compat").get<double>();
    m.combined = j.at("combined").get<double>();
    m.origin = enum_from<schema::MappingOrigin>(j.at("origin"), 3);
    return m;
}

} // namespace

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const Schema& s) {
    json cols = json::array();
    for (const auto& c : s.columns) {
        cols.push_back({{"name", c.name},
                        {"ordinal", c.ordinal},
                        {"value_type", enum_json(c.value_type)},
                        {"nullable", c.nullable},
                        {"null_fraction", c.null_fraction}});
    }
    return {{"columns", cols}, {"source_kind", enum_json(s.source_kind)}, {"key_columns", s.key_columns}};
}

Schema schema_from_json(const json& j) {
    return guarded([&] {
        Schema s;
        for (const auto& c : j.at("columns")) {
            ColumnDescriptor d;
            d.name = c.at("name").get<std::string>();
            d.ordinal = c.at("ordinal").get<std::size_t>();
            d.value_type = enum_from<ValueType>(c.at("value_type"), 7);
            d.nullable = c.at("nullable").get<bool>();
            d.null_fraction = c.at("null_fraction").get<double>();
            s.columns.push_back(std::move(d));
        }
        s.source_kind = enum_from<SourceKind>(j.at("source_kind"), 3);
        s.key_columns = j.at("key_columns").get<std::vector<std::string>>();
        return s;
    });
}

json to_json(const KeySpec& k) { return {{"mode", enum_json(k.mode)}, {"columns", k.columns}}; }

KeySpec key_spec_from_json(const json& j) {
    return guarded([&] {
        KeySpec k;
        k.mode = enum_from<KeySpec::Mode>(j.at("mode"), 3);
        k.columns = j.at("columns").get<std::vector<std::string>>();
        return k;
    });
}

json to_json(const RowKey& k) { return k.parts; }

RowKey row_key_from_json(const json& j) {
    return guarded([&] { return RowKey{j.get<std::vector<std::string>>()}; });
}

json to_json(const Value& v) {
    json out = {{"raw", v.raw}, {"type", enum_json(v.type)}};
    if (v.is_null()) out["null"] = true;
    if (v.nonconforming) out["nonconforming"] = true;
    return out;
}

Value value_from_json(const json& j) {
    return guarded([&] {
        const auto raw = j.at("raw").get<std::string>();
        auto type = enum_from<ValueType>(j.at("type"), 7);
        if (j.value("nonconforming", false)) {
            // Kept as text after failing to parse under the column type.
            Value v;
            v.type = type;
            v.raw = raw;
            v.payload = raw;
            v.nonconforming = true;
            return v;
        }
        return ingest::parse_value(raw, type);
    });
}

json to_json(const schema::MappingSet& m) {
    json maps = json::array();
    for (const auto& c : m.mappings) {
        maps.push_back({{"source", c.source_column},
                        {"target", c.target_column},
                        {"lexical", c.lexical},
                        {"structural", c.structural},
                        {"type_compat", c.type_compat},
                        {"combined", c.combined},
                        {"origin", enum_json(c.origin)}});
    }
    return {{"mappings", maps}, {"unmapped_source", m.unmapped_source}, {"unmapped_target", m.unmapped_target}};
}

schema::MappingSet mapping_from_json(const json& j) {
    return guarded([&] {
        schema::MappingSet m;
        for (const auto& c : j.at("mappings")) m.mappings.push_back(column_mapping_from(c));
        m.unmapped_source = j.at("unmapped_source").get<std::vector<std::string>>();
        m.unmapped_target = j.at("unmapped_target").get<std::vector<std::string>>();
        return m;
    });
}

json to_json(const schema::MetadataDiff& d) {
    json out = json::array();
    for (const auto& c : d.changes) {
        out.push_back({{"kind", enum_json(c.kind)},
                       {"subject", c.subject},
                       {"before", c.before},
                       {"after", c.after},
                       {"impact_rank", c.impact_rank}});
    }
    return out;
}

schema::MetadataDiff metadata_from_json(const json& j) {
    return guarded([&] {
        schema::MetadataDiff d;
        for (const auto& c : j) {
            schema::MetadataChange m;
            m.kind = enum_from<schema::ChangeKind>(c.at("kind"), 6);
            m.subject = c.at("subject").get<std::vector<std::string>>();
            m.before = c.at("before");
            m.after = c.at("after");
            m.impact_rank = c.at("impact_rank").get<int>();
            d.changes.push_back(std::move(m));
        }
        return d;
    });
}

json to_json(const profile::ColumnProfile& p) {
    json body = std::visit(
        [](const auto& b) -> json {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, profile::NumericHistogram>) {
                return {{"kind", "numeric"},
                        {"edges", b.edges},
                        {"counts", b.counts},
                        {"mean", b.mean},
                        {"variance", b.variance}};
            } else if constexpr (std::is_same_v<T, profile::FrequencyTable>) {
                return {{"kind", "frequency"},
                        {"top", pairs_json(b.top)},
                        {"other_count", b.other_count},
                        {"distinct_count", b.distinct_count}};
            } else {
                return {{"kind", "temporal"},
                        {"granularity", enum_json(b.granularity)},
                        {"buckets", pairs_json(b.buckets)}};
            }
        },
        p.body);
    return {{"column", p.column},
            {"value_type", enum_json(p.value_type)},
            {"body", body},
            {"row_count", p.row_count},
            {"null_count", p.null_count},
            {"invalid_count", p.invalid_count}};
}

profile::ColumnProfile profile_from_json(const json& j) {
    return guarded([&] {
        profile::ColumnProfile p;
        p.column = j.at("column").get<std::string>();
        p.value_type = enum_from<ValueType>(j.at("value_type"), 7);
        p.row_count = j.at("row_count").get<std::uint64_t>();
        p.null_count = j.at("null_count").get<std::uint64_t>();
        p.invalid_count = j.at("invalid_count").get<std::uint64_t>();
        const auto& b = j.at("body");
        const auto kind = b.at("kind").get<std::string>();
        if (kind == "numeric") {
            profile::NumericHistogram h;
            h.edges = b.at("edges").get<std::vector<double>>();
            h.counts = b.at("counts").get<std::vector<std::uint64_t>>();
            h.mean = b.at("mean").get<double>();
            h.variance = b.at("variance").get<double>();
            p.body = std::move(h);
        } else if (kind == "frequency") {
            profile::FrequencyTable f;
            f.top = pairs_from(b.at("top"));
            f.other_count = b.at("other_count").get<std::uint64_t>();
            f.distinct_count = b.at("distinct_count").get<std::uint64_t>();
            p.body = std::move(f);
        } else if (kind == "temporal") {
            profile::TemporalBuckets t;
            t.granularity = enum_from<profile::Granularity>(b.at("granularity"), 2);
            t.buckets = pairs_from(b.at("buckets"));
            p.body = std::move(t);
        } else {
            throw Error(ErrorCode::CorruptCheckpoint, "unknown profile kind '" + kind + "'");
        }
        return p;
    });
}

json to_json(const profile::DistributionDelta& d) {
    json buckets = json::array();
    for (const auto& b : d.bucket_deltas) buckets.push_back(json::array({b.bucket, b.delta}));
    return {{"column", d.column},
            {"bucket_deltas", buckets},
            {"emerging", d.emerging},
            {"disappearing", d.disappearing},
            {"mean_shift", opt(d.mean_shift)},
            {"variance_shift", opt(d.variance_shift)},
            {"skew_flag", d.skew_flag}};
}

profile::DistributionDelta distribution_delta_from_json(const json& j) {
    return guarded([&] {
        profile::DistributionDelta d;
        d.column = j.at("column").get<std::string>();
        for (const auto& b : j.at("bucket_deltas"))
            d.bucket_deltas.push_back({b.at(0).get<std::string>(), b.at(1).get<std::int64_t>()});
        d.emerging = j.at("emerging").get<std::vector<std::string>>();
        d.disappearing = j.at("disappearing").get<std::vector<std::string>>();
        d.mean_shift = opt_from<double>(j.at("mean_shift"));
        d.variance_shift = opt_from<double>(j.at("variance_shift"));
        d.skew_flag = j.at("skew_flag").get<bool>();
        return d;
    });
}

json to_json(const profile::SummaryDiff& s) {
    json out = json::array();
    for (const auto& c : s.columns)
        out.push_back({{"source", to_json(c.source)}, {"target", to_json(c.target)}, {"delta", to_json(c.delta)}});
    return out;
}

profile::SummaryDiff summary_from_json(const json& j) {
    return guarded([&] {
        profile::SummaryDiff s;
        for (const auto& c : j) {
            s.columns.push_back({profile_from_json(c.at("source")), profile_from_json(c.at("target")),
                                 distribution_delta_from_json(c.at("delta"))});
        }
        return s;
    });
}

json to_json(const datadiff::DiffDetail& detail) {
    using namespace datadiff;
    json out = std::visit(
        [](const auto& d) -> json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, StringEdit>) {
                json ops = json::array();
                for (const auto& op : d.ops)
                    ops.push_back({{"op", enum_json(op.kind)}, {"pos", op.position}, {"ch", encode_utf8(op.ch)}});
                return {{"distance", d.distance}, {"ops", ops}, {"pattern", opt_enum(d.pattern)}};
            } else if constexpr (std::is_same_v<T, IntDelta>) {
                return {{"delta", d.delta}, {"digit_pattern", opt_enum(d.digit_pattern)}};
            } else if constexpr (std::is_same_v<T, FloatDelta>) {
                return {{"delta", d.delta},
                        {"rel_delta", d.rel_delta},
                        {"rounding_decimals", opt(d.rounding_decimals)},
                        {"precision_artifact", d.precision_artifact}};
            } else if constexpr (std::is_same_v<T, DateTimeDelta>) {
                json comps = json::object();
                for (std::size_t i = 0; i < kDateComponents.size(); ++i)
                    comps[std::string(kDateComponents[i])] = d.component_deltas[i];
                return {{"component_deltas", comps}, {"offset_minutes", opt(d.offset_minutes)}};
            } else if constexpr (std::is_same_v<T, JsonPatch>) {
                return {{"added_paths", d.added_paths},
                        {"removed_paths", d.removed_paths},
                        {"changed_paths", d.changed_paths},
                        {"total_paths", d.total_paths}};
            } else if constexpr (std::is_same_v<T, NullChange>) {
                return {{"direction", enum_json(d.direction)}};
            } else {
                return {{"source_type", enum_json(d.source_type)}, {"target_type", enum_json(d.target_type)}};
            }
        },
        detail);
    out["kind"] = enum_json(detail_kind(detail));
    return out;
}

datadiff::DiffDetail detail_from_json(const json& j) {
    using namespace datadiff;
    return guarded([&]() -> DiffDetail {
        switch (enum_from<DetailKind>(j.at("kind"), kDetailKindCount)) {
            case DetailKind::StringEdit: {
                StringEdit d;
                d.distance = j.at("distance").get<std::size_t>();
                for (const auto& op : j.at("ops")) {
                    const auto ch = decode_utf8(op.at("ch").get<std::string>());
                    if (ch.size() != 1) throw Error(ErrorCode::CorruptCheckpoint, "edit op character");
                    d.ops.push_back({enum_from<EditKind>(op.at("op"), 3), op.at("pos").get<std::size_t>(), ch[0]});
                }
                d.pattern = opt_enum_from<StringPattern>(j.at("pattern"), 4);
                return d;
            }
            case DetailKind::IntDelta: {
                IntDelta d;
                d.delta = j.at("delta").get<std::int64_t>();
                d.digit_pattern = opt_enum_from<DigitPattern>(j.at("digit_pattern"), 2);
                return d;
            }
            case DetailKind::FloatDelta: {
                FloatDelta d;
                d.delta = j.at("delta").get<double>();
                d.rel_delta = j.at("rel_delta").get<double>();
                d.rounding_decimals = opt_from<int>(j.at("rounding_decimals"));
                d.precision_artifact = j.at("precision_artifact").get<bool>();
                return d;
            }
            case DetailKind::DateTimeDelta: {
                DateTimeDelta d;
                const auto& comps = j.at("component_deltas");
                for (std::size_t i = 0; i < kDateComponents.size(); ++i)
                    d.component_deltas[i] = comps.at(std::string(kDateComponents[i])).get<std::int64_t>();
                d.offset_minutes = opt_from<int>(j.at("offset_minutes"));
                return d;
            }
            case DetailKind::JsonPatch: {
                JsonPatch d;
                d.added_paths = j.at("added_paths").get<std::vector<std::string>>();
                d.removed_paths = j.at("removed_paths").get<std::vector<std::string>>();
                d.changed_paths = j.at("changed_paths").get<std::vector<std::string>>();
                d.total_paths = j.at("total_paths").get<std::size_t>();
                return d;
            }
            case DetailKind::NullChange:
                return NullChange{enum_from<NullDirection>(j.at("direction"), 2)};
            case DetailKind::TypeMismatch:
                return datadiff::TypeMismatch{enum_from<ValueType>(j.at("source_type"), 7),
                                              enum_from<ValueType>(j.at("target_type"), 7)};
        }
        throw Error(ErrorCode::CorruptCheckpoint, "unknown detail kind");
    });
}

json to_json(const datadiff::CellDiff& d) {
    return {{"key", to_json(d.key)},
            {"column", d.column},
            {"detail", to_json(d.detail)},
            {"source", to_json(d.source_value)},
            {"target", to_json(d.target_value)}};
}

datadiff::CellDiff cell_diff_from_json(const json& j) {
    return guarded([&] {
        datadiff::CellDiff d;
        d.key = row_key_from_json(j.at("key"));
        d.column = j.at("column").get<std::string>();
        d.detail = detail_from_json(j.at("detail"));
        d.source_value = value_from_json(j.at("source"));
        d.target_value = value_from_json(j.at("target"));
        return d;
    });
}

json to_json(const cluster::StreamState& s) {
    json clusters = json::array();
    for (const auto& c : s.clusters) {
        clusters.push_back(
            {{"id", c.id}, {"centroid", c.centroid}, {"weight", c.weight}, {"column_set", c.column_set}});
    }
    return {{"clusters", clusters}, {"next_id", s.next_id}};
}

cluster::StreamState stream_state_from_json(const json& j) {
    return guarded([&] {
        cluster::StreamState s;
        for (const auto& c : j.at("clusters")) {
            cluster::MicroCluster m;
            m.id = c.at("id").get<std::uint32_t>();
            m.centroid = c.at("centroid").get<datadiff::FeatureVector>();
            m.weight = c.at("weight").get<std::uint64_t>();
            m.column_set = c.at("column_set").get<std::vector<std::string>>();
            s.clusters.push_back(std::move(m));
        }
        s.next_id = j.at("next_id").get<std::uint32_t>();
        return s;
    });
}

json to_json(const cluster::Assignment& a) {
    json patterns = json::array();
    for (const auto& ps : a.patterns) {
        json row = json::array();
        for (auto p : ps) row.push_back(enum_json(p));
        patterns.push_back(std::move(row));
    }
    json dynamic = json::array();
    for (const auto& d : a.dynamic) dynamic.push_back(opt(d));
    return {{"patterns", patterns}, {"dynamic", dynamic}, {"state", to_json(a.state)}};
}

cluster::Assignment assignment_from_json(const json& j) {
    return guarded([&] {
        cluster::Assignment a;
        for (const auto& row : j.at("patterns")) {
            std::vector<cluster::StaticPattern> ps;
            for (const auto& p : row) ps.push_back(enum_from<cluster::StaticPattern>(p, cluster::kStaticPatternCount));
            a.patterns.push_back(std::move(ps));
        }
        for (const auto& d : j.at("dynamic")) a.dynamic.push_back(opt_from<std::uint32_t>(d));
        a.state = stream_state_from_json(j.at("state"));
        if (a.patterns.size() != a.dynamic.size())
            throw Error(ErrorCode::CorruptCheckpoint, "assignment arrays differ in length");
        return a;
    });
}

json to_json(const cluster::Cluster& c) {
    return {{"id", c.id},
            {"kind", enum_json(c.kind)},
            {"member_count", c.member_count},
            {"columns", c.columns},
            {"members", c.members},
            {"samples", c.samples},
            {"purity", c.purity},
            {"entropy", c.entropy},
            {"candidate_patterns", c.candidate_patterns}};
}

cluster::Cluster cluster_from_json(const json& j) {
    return guarded([&] {
        cluster::Cluster c;
        c.id = j.at("id").get<std::string>();
        c.kind = enum_from<cluster::ClusterKind>(j.at("kind"), 2);
        c.member_count = j.at("member_count").get<std::uint64_t>();
        c.columns = j.at("columns").get<std::vector<std::string>>();
        c.members = j.at("members").get<std::vector<std::size_t>>();
        c.samples = j.at("samples").get<std::vector<std::size_t>>();
        c.purity = j.at("purity").get<double>();
        c.entropy = j.at("entropy").get<double>();
        c.candidate_patterns = j.at("candidate_patterns").get<std::vector<std::string>>();
        return c;
    });
}

json to_json(const label::LabelJudgment& j) {
    json labels = json::array();
    for (const auto& l : j.labels) {
        json e = {{"name", l.name}};
        if (!l.other_explanation.empty()) e["other_explanation"] = l.other_explanation;
        labels.push_back(std::move(e));
    }
    return {{"labels", labels},
            {"rationale", j.rationale},
            {"confidence", j.confidence},
            {"evidence_row_ids", j.evidence_row_ids},
            {"recommended_checks", j.recommended_checks},
            {"origin", enum_json(j.origin)}};
}

label::LabelJudgment judgment_from_json(const json& j) {
    return guarded([&] {
        label::LabelJudgment out;
        for (const auto& l : j.at("labels"))
            out.labels.push_back({l.at("name").get<std::string>(), l.value("other_explanation", std::string())});
        out.rationale = j.at("rationale").get<std::string>();
        out.confidence = j.at("confidence").get<double>();
        out.evidence_row_ids = j.at("evidence_row_ids").get<std::vector<std::string>>();
        out.recommended_checks = j.at("recommended_checks").get<std::vector<std::string>>();
        out.origin = enum_from<label::Origin>(j.at("origin"), 2);
        return out;
    });
}

} // namespace driftdiff::serialize

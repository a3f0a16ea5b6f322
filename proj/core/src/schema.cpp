// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/schema.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "driftdiff/edit_distance.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/hash.hpp"

namespace driftdiff::schema {

namespace {

nlohmann::json describe_column(const ColumnDescriptor& c) {
    return {{"name", c.name},
            {"ordinal", c.ordinal},
            {"value_type", std::string(to_string(c.value_type))},
            {"nullable", c.nullable}};
}

} // namespace

std::string_view to_string(MappingOrigin origin) {
    switch (origin) {
        case MappingOrigin::Auto: return "Auto";
        case MappingOrigin::Memory: return "Memory";
        case MappingOrigin::Override: return "Override";
    }
    return "Auto";
}

const ColumnMapping* MappingSet::by_source(std::string_view name) const noexcept {
    for (const auto& m : mappings) {
        if (m.source_column == name) return &m;
    }
    return nullptr;
}

const ColumnMapping* MappingSet::by_target(std::string_view name) const noexcept {
    for (const auto& m : mappings) {
        if (m.target_column == name) return &m;
    }
    return nullptr;
}

std::string fold_for_matching(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '_' || c == '-' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

double lexical_similarity(std::string_view a, std::string_view b) {
    const auto fa = datadiff::decode_utf8(fold_for_matching(a));
    const auto fb = datadiff::decode_utf8(fold_for_matching(b));
    const std::size_t longest =
        std::max(datadiff::decode_utf8(a).size(), datadiff::decode_utf8(b).size());
    if (longest == 0) return 1.0;
    const double dist = static_cast<double>(datadiff::edit_distance(fa, fb));
    return 1.0 - dist / static_cast<double>(longest);
}

double type_compatibility(ValueType src, ValueType tgt) noexcept {
    if (src == tgt) return 1.0;
    const bool numeric_pair = (src == ValueType::Integer && tgt == ValueType::Float) ||
                              (src == ValueType::Float && tgt == ValueType::Integer);
    if (numeric_pair) return 0.8;
    if (src == ValueType::Text || tgt == ValueType::Text) return 0.5;
    return 0.0;
}

std::string context_fingerprint(const Schema& source) {
    auto names = source.column_names();
    std::sort(names.begin(), names.end());
    ContentHasher h;
    for (const auto& n : names) h.update_field(n);
    return h.hex_digest();
}

// ── memory ────────────────────────────────────────────────────────

MappingMemory MappingMemory::load(const std::filesystem::path& path) {
    MappingMemory mem;
    mem.path_ = path;
    std::ifstream in(path);
    if (!in) return mem;
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw Error(ErrorCode::InvalidConfig, "mapping memory is not a JSON array: " + path.string());
    for (const auto& e : doc) {
        MemoryEntry entry{e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                          e.at("fingerprint").get<std::string>(), e.at("count").get<std::uint64_t>()};
        if (entry.count == 0) continue;
        auto it = std::find_if(mem.entries_.begin(), mem.entries_.end(), [&](const MemoryEntry& x) {
            return x.source == entry.source && x.target == entry.target &&
                   x.fingerprint == entry.fingerprint;
        });
        if (it != mem.entries_.end()) {
            it->count += entry.count;
        } else {
            mem.entries_.push_back(std::move(entry));
        }
    }
    return mem;
}

bool MappingMemory::contains(std::string_view source, std::string_view target,
                             std::string_view fingerprint) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [&](const MemoryEntry& e) {
        return e.source == source && e.target == target && e.fingerprint == fingerprint;
    });
}

void MappingMemory::add(const std::string& source, const std::string& target,
                        const std::string& fingerprint) {
    for (auto& e : entries_) {
        if (e.source == source && e.target == target && e.fingerprint == fingerprint) {
            ++e.count;
            return;
        }
    }
    entries_.push_back({source, target, fingerprint, 1});
}

nlohmann::json MappingMemory::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries_) {
        arr.push_back({{"source", e.source},
                       {"target", e.target},
                       {"fingerprint", e.fingerprint},
                       {"count", e.count}});
    }
    return arr;
}

void MappingMemory::save() const {
    if (!path_) return;
    std::filesystem::create_directories(path_->parent_path().empty() ? "." : path_->parent_path());
    auto tmp = *path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + tmp.string());
        out << to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, *path_);
}

// ── scoring ───────────────────────────────────────────────────────

ScoreMatrix::ScoreMatrix(std::vector<std::string> sources, std::vector<std::string> targets)
    : sources_(std::move(sources)), targets_(std::move(targets)),
      cells_(sources_.size() * targets_.size()) {}

double ScoreMatrix::ordinal_distance(std::size_t i, std::size_t j) const noexcept {
    const double a = rows() ? static_cast<double>(i) / static_cast<double>(rows()) : 0.0;
    const double b = cols() ? static_cast<double>(j) / static_cast<double>(cols()) : 0.0;
    return std::abs(a - b);
}

ScoreMatrix score_candidates(const Schema& src, const Schema& tgt, const MappingMemory& memory,
                             const ScoreWeights& weights) {
    ScoreMatrix matrix(src.column_names(), tgt.column_names());
    const std::string fingerprint = context_fingerprint(src);
    for (std::size_t i = 0; i < src.columns.size(); ++i) {
        for (std::size_t j = 0; j < tgt.columns.size(); ++j) {
            auto& cell = matrix.at(i, j);
            cell.lexical = lexical_similarity(src.columns[i].name, tgt.columns[j].name);
            cell.structural = 1.0 - matrix.ordinal_distance(i, j);
            cell.type_compat = type_compatibility(src.columns[i].value_type, tgt.columns[j].value_type);
            cell.combined = weights.lexical * cell.lexical + weights.structural * cell.structural +
                            weights.type_compat * cell.type_compat;
            if (memory.contains(src.columns[i].name, tgt.columns[j].name, fingerprint)) {
                cell.remembered = true;
                cell.combined = std::max(cell.combined, kMemoryFloor);
            }
        }
    }
    return matrix;
}

std::optional<Override> parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size()) return std::nullopt;
    return Override{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

MappingSet resolve_mapping(const ScoreMatrix& matrix, double threshold,
                           std::span<const Override> overrides) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "mapping threshold must be in (0, 1]");

    const auto index_of = [](const std::vector<std::string>& names, const std::string& n) {
        auto it = std::find(names.begin(), names.end(), n);
        return it == names.end() ? std::optional<std::size_t>{}
                                 : std::optional<std::size_t>{static_cast<std::size_t>(it - names.begin())};
    };

    std::vector<bool> row_used(matrix.rows(), false);
    std::vector<bool> col_used(matrix.cols(), false);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    std::vector<MappingOrigin> origins;

    for (const auto& o : overrides) {
        auto i = index_of(matrix.sources(), o.source);
        auto j = index_of(matrix.targets(), o.target);
        if (!i) throw Error(ErrorCode::UnknownColumn, "override names unknown source column '" + o.source + "'");
        if (!j) throw Error(ErrorCode::UnknownColumn, "override names unknown target column '" + o.target + "'");
        if (row_used[*i] || col_used[*j])
            throw Error(ErrorCode::ConflictingOverrides,
                        "overrides claim a column twice: " + o.source + "=" + o.target);
        row_used[*i] = true;
        col_used[*j] = true;
        chosen.emplace_back(*i, *j);
        origins.push_back(MappingOrigin::Override);
    }

    struct Candidate {
        double combined;
        double distance;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (row_used[i]) continue;
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            if (col_used[j]) continue;
            const double c = matrix.at(i, j).combined;
            if (c >= threshold) candidates.push_back({c, matrix.ordinal_distance(i, j), i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        if (a.distance != b.distance) return a.distance < b.distance;
        const auto& sa = matrix.sources()[a.i];
        const auto& sb = matrix.sources()[b.i];
        if (sa != sb) return sa < sb;
        return matrix.targets()[a.j] < matrix.targets()[b.j];
    });
    for (const auto& c : candidates) {
        if (row_used[c.i] || col_used[c.j]) continue;
        row_used[c.i] = true;
        col_used[c.j] = true;
        chosen.emplace_back(c.i, c.j);
        origins.push_back(matrix.at(c.i, c.j).remembered ? MappingOrigin::Memory : MappingOrigin::Auto);
    }

    MappingSet set;
    std::vector<std::size_t> order(chosen.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return chosen[a] < chosen[b]; });
    for (std::size_t k : order) {
        const auto [i, j] = chosen[k];
        const auto& cell = matrix.at(i, j);
        set.mappings.push_back({matrix.sources()[i], matrix.targets()[j], cell.lexical, cell.structural,
                                cell.type_compat, cell.combined, origins[k]});
    }
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (!row_used[i]) set.unmapped_source.push_back(matrix.sources()[i]);
    }
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        if (!col_used[j]) set.unmapped_target.push_back(matrix.targets()[j]);
    }
    return set;
}

MappingMemory record_correction(MappingMemory memory, const Override& correction, const Schema& src,
                                const Schema& tgt) {
    if (!src.find(correction.source))
        throw Error(ErrorCode::UnknownColumn, "unknown source column '" + correction.source + "'");
    if (!tgt.find(correction.target))
        throw Error(ErrorCode::UnknownColumn, "unknown target column '" + correction.target + "'");
    memory.add(correction.source, correction.target, context_fingerprint(src));
    memory.save();
    return memory;
}

// ── metadata diff ─────────────────────────────────────────────────

std::string_view to_string(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::TypeChanged: return "TypeChanged";
        case ChangeKind::KeyChanged: return "KeyChanged";
        case ChangeKind::ColumnRemoved: return "ColumnRemoved";
        case ChangeKind::ColumnAdded: return "ColumnAdded";
        case ChangeKind::ColumnRenamed: return "ColumnRenamed";
        case ChangeKind::NullabilityChanged: return "NullabilityChanged";
    }
    return "ColumnAdded";
}

std::optional<ChangeKind> change_kind_from_string(std::string_view name) {
    for (auto k : {ChangeKind::TypeChanged, ChangeKind::KeyChanged, ChangeKind::ColumnRemoved,
                   ChangeKind::ColumnAdded, ChangeKind::ColumnRenamed, ChangeKind::NullabilityChanged}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

int impact_rank(ChangeKind kind) noexcept { return static_cast<int>(kind) + 1; }

MetadataDiff metadata_diff(const Schema& src, const Schema& tgt, const MappingSet& mapping) {
    MetadataDiff diff;
    auto push = [&](ChangeKind kind, std::vector<std::string> subject, nlohmann::json before,
                    nlohmann::json after) {
        diff.changes.push_back({kind, std::move(subject), std::move(before), std::move(after), impact_rank(kind)});
    };

    for (const auto& name : mapping.unmapped_target) {
        const auto* c = tgt.find(name);
        push(ChangeKind::ColumnAdded, {name}, nullptr, c ? describe_column(*c) : nlohmann::json(nullptr));
    }
    for (const auto& name : mapping.unmapped_source) {
        const auto* c = src.find(name);
        push(ChangeKind::ColumnRemoved, {name}, c ? describe_column(*c) : nlohmann::json(nullptr), nullptr);
    }
    for (const auto& m : mapping.mappings) {
        const auto* s = src.find(m.source_column);
        const auto* t = tgt.find(m.target_column);
        if (!s || !t) continue;
        if (fold_for_matching(s->name) != fold_for_matching(t->name))
            push(ChangeKind::ColumnRenamed, {s->name, t->name}, s->name, t->name);
        if (s->value_type != t->value_type)
            push(ChangeKind::TypeChanged, {s->name, t->name}, std::string(to_string(s->value_type)),
                 std::string(to_string(t->value_type)));
        if (s->nullable != t->nullable)
            push(ChangeKind::NullabilityChanged, {s->name, t->name}, s->nullable, t->nullable);
    }

    std::vector<std::string> src_key_in_target;
    bool key_unmapped = false;
    for (const auto& k : src.key_columns) {
        if (const auto* m = mapping.by_source(k)) {
            src_key_in_target.push_back(m->target_column);
        } else {
            key_unmapped = true;
            src_key_in_target.push_back(k);
        }
    }
    if (key_unmapped || src_key_in_target != tgt.key_columns) {
        if (!(src.key_columns.empty() && tgt.key_columns.empty())) {
            std::vector<std::string> subject = src.key_columns.empty() ? tgt.key_columns : src.key_columns;
            push(ChangeKind::KeyChanged, subject, src.key_columns, tgt.key_columns);
        }
    }

    std::sort(diff.changes.begin(), diff.changes.end(), [](const MetadataChange& a, const MetadataChange& b) {
        return std::tie(a.impact_rank, a.subject) < std::tie(b.impact_rank, b.subject);
    });
    return diff;
}

} // namespace driftdiff::schema

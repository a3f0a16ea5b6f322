// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/datadiff.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>

#include "driftdiff/error.hpp"
#include "driftdiff/hash.hpp"

namespace driftdiff::datadiff {

namespace {

std::string shortest_fixed(double x) {
    char buf[512];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::string shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

bool is_pad_char(char c) { return c == ' ' || c == '0'; }

bool all_pad(std::string_view s) { return std::all_of(s.begin(), s.end(), is_pad_char); }

// longer == pads + shorter + pads, with pads drawn from spaces and zeros.
bool is_padding_of(std::string_view longer, std::string_view shorter) {
    if (longer.size() <= shorter.size()) return false;
    for (std::size_t p = 0; p + shorter.size() <= longer.size(); ++p) {
        if (longer.substr(p, shorter.size()) == shorter && all_pad(longer.substr(p + shorter.size())))
            return true;
        if (!is_pad_char(longer[p])) break; // the prefix must stay all padding
    }
    return false;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::optional<StringPattern> classify_string(std::string_view a, std::string_view b) {
    if ((b.size() < a.size() && a.substr(0, b.size()) == b) ||
        (a.size() < b.size() && b.substr(0, a.size()) == a))
        return StringPattern::Truncation;
    if (is_padding_of(a, b) || is_padding_of(b, a)) return StringPattern::Padding;
    if (ascii_lower(a) == ascii_lower(b)) return StringPattern::CaseChange;
    if (collapse_whitespace(a) == collapse_whitespace(b)) return StringPattern::WhitespaceChange;
    return std::nullopt;
}

StringEdit string_edit(std::string_view a, std::string_view b) {
    auto script = levenshtein(a, b);
    StringEdit e;
    e.distance = script.distance;
    e.ops = std::move(script.ops);
    e.pattern = classify_string(a, b);
    return e;
}

struct SignedDigits {
    bool negative = false;
    std::string_view digits;
};

SignedDigits split_sign(std::string_view raw) {
    SignedDigits out;
    if (!raw.empty() && (raw.front() == '+' || raw.front() == '-')) {
        out.negative = raw.front() == '-';
        raw.remove_prefix(1);
    }
    out.digits = raw;
    return out;
}

std::string_view strip_leading_zeros(std::string_view d) {
    while (d.size() > 1 && d.front() == '0') d.remove_prefix(1);
    return d;
}

bool is_adjacent_swap(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    std::size_t first = a.size();
    int mismatches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            if (++mismatches > 2) return false;
            if (first == a.size()) first = i;
        }
    }
    return mismatches == 2 && first + 1 < a.size() && a[first] == b[first + 1] &&
           a[first + 1] == b[first] && a[first] != a[first + 1];
}

std::size_t json_node_count(const nlohmann::json& j) {
    std::size_t n = 0;
    if (j.is_object() || j.is_array()) {
        for (const auto& child : j) n += 1 + json_node_count(child);
    }
    return n;
}

std::string escape_pointer(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

void json_compare(const nlohmann::json& a, const nlohmann::json& b, const std::string& path, JsonPatch& out) {
    if (a.is_object() && b.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            const std::string child = path + "/" + escape_pointer(it.key());
            auto jt = b.find(it.key());
            if (jt == b.end()) {
                out.removed_paths.push_back(child);
            } else {
                json_compare(*it, *jt, child, out);
            }
        }
        for (auto jt = b.begin(); jt != b.end(); ++jt) {
            if (!a.contains(jt.key())) out.added_paths.push_back(path + "/" + escape_pointer(jt.key()));
        }
        return;
    }
    if (a.is_array() && b.is_array()) {
        const std::size_t common = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < common; ++i) json_compare(a[i], b[i], path + "/" + std::to_string(i), out);
        for (std::size_t i = common; i < a.size(); ++i) out.removed_paths.push_back(path + "/" + std::to_string(i));
        for (std::size_t i = common; i < b.size(); ++i) out.added_paths.push_back(path + "/" + std::to_string(i));
        return;
    }
    if (a != b) out.changed_paths.push_back(path);
}

double numeric_magnitude(double rel) {
    if (!(rel > 0)) return 0.0;
    return std::min(1.0, std::log10(1.0 + rel * 1e9) / 9.0);
}

} // namespace

std::string_view to_string(StringPattern p) {
    switch (p) {
        case StringPattern::Truncation: return "Truncation";
        case StringPattern::Padding: return "Padding";
        case StringPattern::CaseChange: return "CaseChange";
        case StringPattern::WhitespaceChange: return "WhitespaceChange";
    }
    return "Truncation";
}

std::string_view to_string(DigitPattern p) {
    return p == DigitPattern::Transposition ? "Transposition" : "ZeroPadding";
}

std::string_view to_string(NullDirection d) {
    return d == NullDirection::BecameNull ? "BecameNull" : "BecameNonNull";
}

std::string_view to_string(DetailKind kind) {
    switch (kind) {
        case DetailKind::StringEdit: return "StringEdit";
        case DetailKind::IntDelta: return "IntDelta";
        case DetailKind::FloatDelta: return "FloatDelta";
        case DetailKind::DateTimeDelta: return "DateTimeDelta";
        case DetailKind::JsonPatch: return "JsonPatch";
        case DetailKind::NullChange: return "NullChange";
        case DetailKind::TypeMismatch: return "TypeMismatch";
    }
    return "StringEdit";
}

std::optional<DetailKind> detail_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kDetailKindCount; ++i) {
        if (to_string(static_cast<DetailKind>(i)) == name) return static_cast<DetailKind>(i);
    }
    return std::nullopt;
}

std::string_view to_string(RowStatus s) {
    switch (s) {
        case RowStatus::Added: return "Added";
        case RowStatus::Removed: return "Removed";
        case RowStatus::Modified: return "Modified";
    }
    return "Modified";
}

double round_decimal(double x, int decimals) {
    if (!std::isfinite(x) || decimals < 0) return x;
    std::string text = shortest_fixed(x);
    bool negative = false;
    if (!text.empty() && text.front() == '-') {
        negative = true;
        text.erase(0, 1);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return x;
    const std::size_t frac_len = text.size() - dot - 1;
    if (frac_len <= static_cast<std::size_t>(decimals)) return x;

    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t int_len = dot;
    const std::size_t keep = int_len + static_cast<std::size_t>(decimals);
    const bool round_up = digits[keep] >= '5';
    digits.resize(keep);
    if (round_up) {
        std::size_t i = keep;
        bool carry = true;
        while (carry && i > 0) {
            --i;
            if (digits[i] == '9') {
                digits[i] = '0';
            } else {
                ++digits[i];
                carry = false;
            }
        }
        if (carry) {
            digits.insert(digits.begin(), '1');
            ++int_len;
        }
    }
    std::string out = int_len == 0 ? "0" : digits.substr(0, int_len);
    if (decimals > 0) out += "." + digits.substr(int_len);
    double v = 0;
    std::from_chars(out.data(), out.data() + out.size(), v);
    return negative ? -v : v;
}

std::optional<int> rounding_signature(double a, double b) {
    if (a == b) return std::nullopt;
    for (int d = 0; d <= 12; ++d) {
        if (round_decimal(a, d) == b) return d;
    }
    return std::nullopt;
}

std::optional<DiffDetail> diff_string(const Value& a, const Value& b) {
    if (a.raw == b.raw) return std::nullopt;
    return string_edit(a.raw, b.raw);
}

std::optional<DiffDetail> diff_integer(const Value& a, const Value& b) {
    const auto x = std::get<std::int64_t>(a.payload);
    const auto y = std::get<std::int64_t>(b.payload);
    const auto sa = split_sign(a.raw);
    const auto sb = split_sign(b.raw);
    const std::size_t za = sa.digits.size() - strip_leading_zeros(sa.digits).size();
    const std::size_t zb = sb.digits.size() - strip_leading_zeros(sb.digits).size();
    if (x == y && za == zb) return std::nullopt;

    IntDelta d;
    const __int128 wide = static_cast<__int128>(y) - static_cast<__int128>(x);
    d.delta = wide > INT64_MAX ? INT64_MAX : wide < INT64_MIN ? INT64_MIN : static_cast<std::int64_t>(wide);
    if (x == y) {
        d.digit_pattern = DigitPattern::ZeroPadding;
    } else if (sa.negative == sb.negative && is_adjacent_swap(sa.digits, sb.digits)) {
        d.digit_pattern = DigitPattern::Transposition;
    }
    return d;
}

std::optional<DiffDetail> diff_float(const Value& a, const Value& b) {
    const double x = std::get<double>(a.payload);
    const double y = std::get<double>(b.payload);
    if (x == y) return std::nullopt;
    FloatDelta d;
    d.delta = y - x;
    d.rel_delta = std::abs(y - x) / std::max(std::abs(x), 1.0);
    d.rounding_decimals = rounding_signature(x, y);
    d.precision_artifact = d.rel_delta < 1e-9 || d.rounding_decimals.has_value();
    return d;
}

std::optional<DiffDetail> diff_datetime(const Value& a, const Value& b) {
    const auto& x = std::get<Timestamp>(a.payload);
    const auto& y = std::get<Timestamp>(b.payload);
    const std::int64_t dt = y.instant() - x.instant();
    if (dt == 0) return std::nullopt;
    DateTimeDelta d;
    d.component_deltas = {y.year - x.year, y.month - x.month, y.day - x.day,
                          y.hour - x.hour, y.minute - x.minute, y.second - x.second};
    if (dt % 900 == 0 && std::llabs(dt) <= 14 * 3600) d.offset_minutes = static_cast<int>(dt / 60);
    return d;
}

std::optional<DiffDetail> diff_json(const Value& a, const Value& b) {
    const auto& x = std::get<nlohmann::json>(a.payload);
    const auto& y = std::get<nlohmann::json>(b.payload);
    if (x == y) return std::nullopt;
    JsonPatch p;
    json_compare(x, y, "", p);
    p.total_paths = std::max<std::size_t>(1, std::max(json_node_count(x), json_node_count(y)));
    return p;
}

std::optional<DiffDetail> diff_values(const Value& a, const Value& b) {
    if (a.is_null() && b.is_null()) return std::nullopt;
    if (a.is_null() != b.is_null())
        return NullChange{a.is_null() ? NullDirection::BecameNonNull : NullDirection::BecameNull};
    const ValueType ta = a.effective_type();
    const ValueType tb = b.effective_type();
    if (ta != tb) return TypeMismatch{ta, tb};
    switch (ta) {
        case ValueType::Integer: return diff_integer(a, b);
        case ValueType::Float: return diff_float(a, b);
        case ValueType::DateTime: return diff_datetime(a, b);
        case ValueType::Json: return diff_json(a, b);
        case ValueType::Boolean:
            if (std::get<bool>(a.payload) == std::get<bool>(b.payload)) return std::nullopt;
            return string_edit(a.raw, b.raw);
        case ValueType::Text:
        case ValueType::NullOnly: return diff_string(a, b);
    }
    return std::nullopt;
}

std::optional<CellDiff> diff_cell(const Value& a, const Value& b, const ColumnDescriptor& column) {
    auto detail = diff_values(a, b);
    if (!detail) return std::nullopt;
    return CellDiff{RowKey{}, column.name, std::move(*detail), a, b};
}

ValueType comparison_type(ValueType src, ValueType tgt) noexcept {
    if (src == ValueType::NullOnly) return tgt == ValueType::NullOnly ? ValueType::Text : tgt;
    if ((src == ValueType::Integer && tgt == ValueType::Float) ||
        (src == ValueType::Float && tgt == ValueType::Integer))
        return ValueType::Float;
    return src;
}

std::optional<CellDiff> diff_raw(std::string_view a, std::string_view b, const std::string& column,
                                 ValueType cmp) {
    if (a == b) return std::nullopt;
    Value va = ingest::parse_value(a, cmp);
    Value vb = ingest::parse_value(b, cmp);
    auto detail = diff_values(va, vb);
    if (!detail) return std::nullopt;
    return CellDiff{RowKey{}, column, std::move(*detail), std::move(va), std::move(vb)};
}

FeatureVector featurize(const CellDiff& diff) {
    FeatureVector v{};
    v[static_cast<std::size_t>(diff.detail.index())] = 1.0;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, StringEdit>) {
                const std::size_t la = decode_utf8(diff.source_value.raw).size();
                const std::size_t lb = decode_utf8(diff.target_value.raw).size();
                const std::size_t longest = std::max(la, lb);
                v[7] = longest ? std::min(1.0, static_cast<double>(d.distance) / static_cast<double>(longest)) : 0.0;
                v[11] = d.pattern ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, IntDelta>) {
                double base = 1.0;
                if (const auto* x = std::get_if<std::int64_t>(&diff.source_value.payload))
                    base = std::max(std::abs(static_cast<double>(*x)), 1.0);
                v[8] = numeric_magnitude(std::abs(static_cast<double>(d.delta)) / base);
                v[11] = d.digit_pattern ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, FloatDelta>) {
                v[8] = numeric_magnitude(d.rel_delta);
                v[11] = d.rounding_decimals ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, DateTimeDelta>) {
                const auto nonzero = std::count_if(d.component_deltas.begin(), d.component_deltas.end(),
                                                   [](std::int64_t x) { return x != 0; });
                v[9] = static_cast<double>(nonzero) / 6.0;
                v[11] = d.offset_minutes ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, JsonPatch>) {
                const double changes = static_cast<double>(d.added_paths.size() + d.removed_paths.size() +
                                                           d.changed_paths.size());
                v[10] = std::min(1.0, changes / static_cast<double>(std::max<std::size_t>(1, d.total_paths)));
            }
        },
        diff.detail);
    return v;
}

// ── keys and alignment ────────────────────────────────────────────

std::vector<ColumnPair> column_pairs(const Schema& src, const Schema& tgt, const schema::MappingSet& mapping,
                                     const KeySpec& key) {
    std::vector<ColumnPair> pairs;
    for (const auto& m : mapping.mappings) {
        const auto* s = src.find(m.source_column);
        const auto* t = tgt.find(m.target_column);
        if (!s || !t) continue;
        ColumnPair p;
        p.source_index = s->ordinal;
        p.target_index = t->ordinal;
        p.name = s->name;
        p.cmp = comparison_type(s->value_type, t->value_type);
        p.is_key = key.mode != KeySpec::Mode::Surrogate &&
                   std::find(key.columns.begin(), key.columns.end(), s->name) != key.columns.end();
        pairs.push_back(std::move(p));
    }
    std::sort(pairs.begin(), pairs.end(), [](const ColumnPair& a, const ColumnPair& b) { return a.name < b.name; });
    return pairs;
}

KeyPlan plan_keys(const Schema& src, const Schema& tgt, const KeySpec& key, const schema::MappingSet& mapping) {
    KeyPlan plan;
    plan.mode = key.mode;
    if (key.mode == KeySpec::Mode::Surrogate) {
        for (const auto& m : mapping.mappings) {
            const auto* s = src.find(m.source_column);
            const auto* t = tgt.find(m.target_column);
            if (!s || !t) continue;
            plan.source_columns.push_back(s->ordinal);
            plan.target_columns.push_back(t->ordinal);
            plan.types.push_back(comparison_type(s->value_type, t->value_type));
        }
        return plan;
    }
    if (key.columns.empty()) throw Error(ErrorCode::InvalidConfig, "key spec names no columns");
    for (const auto& name : key.columns) {
        const auto* s = src.find(name);
        if (!s) throw Error(ErrorCode::UnknownColumn, "key column '" + name + "' not in source schema");
        const auto* m = mapping.by_source(name);
        const auto* t = m ? tgt.find(m->target_column) : nullptr;
        if (!t) throw Error(ErrorCode::KeyNotMapped, "key column '" + name + "' has no target counterpart");
        plan.source_columns.push_back(s->ordinal);
        plan.target_columns.push_back(t->ordinal);
        plan.types.push_back(comparison_type(s->value_type, t->value_type));
    }
    return plan;
}

std::string canonical_key_part(std::string_view raw, ValueType type) {
    if (type == ValueType::Integer) {
        if (auto i = ingest::parse_integer(raw)) return std::to_string(*i);
    } else if (type == ValueType::Float) {
        if (auto f = ingest::parse_float(raw)) return shortest(*f);
    }
    return std::string(raw);
}

std::vector<KeyedRow> index_keys(const ingest::TableSnapshot& snap, const KeyPlan& plan, bool target_side) {
    const auto& cols = target_side ? plan.target_columns : plan.source_columns;
    const std::size_t n = snap.row_count();
    std::vector<KeyedRow> out(n);
    auto by_key_then_row = [](const KeyedRow& a, const KeyedRow& b) {
        if (a.key.parts != b.key.parts) return a.key.parts < b.key.parts;
        return a.row < b.row;
    };

    if (plan.mode == KeySpec::Mode::Surrogate) {
        for (std::size_t r = 0; r < n; ++r) {
            ContentHasher h;
            for (std::size_t c : cols) h.update_field(snap.raw(r, c));
            out[r].key.parts = {h.hex_digest()};
            out[r].row = static_cast<std::uint32_t>(r);
        }
        std::sort(out.begin(), out.end(), by_key_then_row);
        std::size_t occurrence = 0;
        for (std::size_t i = 0; i < n; ++i) {
            occurrence = (i > 0 && out[i].key.parts[0] == out[i - 1].key.parts[0]) ? occurrence + 1 : 0;
            out[i].key.parts.push_back(std::to_string(occurrence));
        }
        return out;
    }

    for (std::size_t r = 0; r < n; ++r) {
        auto& parts = out[r].key.parts;
        parts.reserve(cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) parts.push_back(canonical_key_part(snap.raw(r, cols[k]), plan.types[k]));
        out[r].row = static_cast<std::uint32_t>(r);
    }
    std::sort(out.begin(), out.end(), by_key_then_row);
    for (std::size_t i = 1; i < n; ++i) {
        if (out[i].key == out[i - 1].key) {
            std::size_t j = i;
            while (j < n && out[j].key == out[i].key) ++j;
            throw Error(ErrorCode::DuplicateKey, "duplicate key '" + out[i].key.to_string() + "' appears " +
                                                     std::to_string(j - i + 1) + " times in " +
                                                     (target_side ? "target" : "source"));
        }
    }
    return out;
}

std::vector<AlignedRow> merge_keys(std::vector<KeyedRow> src, std::vector<KeyedRow> tgt) {
    std::vector<AlignedRow> out;
    out.reserve(std::max(src.size(), tgt.size()));
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < src.size() || j < tgt.size()) {
        if (j == tgt.size() || (i < src.size() && src[i].key < tgt[j].key)) {
            out.push_back({std::move(src[i].key), src[i].row, kNoRow});
            ++i;
        } else if (i == src.size() || tgt[j].key < src[i].key) {
            out.push_back({std::move(tgt[j].key), kNoRow, tgt[j].row});
            ++j;
        } else {
            out.push_back({std::move(src[i].key), src[i].row, tgt[j].row});
            ++i;
            ++j;
        }
    }
    return out;
}

std::vector<AlignedRow> align_union(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                    const KeySpec& key, const schema::MappingSet& mapping) {
    const auto plan = plan_keys(src.schema(), tgt.schema(), key, mapping);
    return merge_keys(index_keys(src, plan, false), index_keys(tgt, plan, true));
}

Alignment align_rows(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt, const KeySpec& key,
                     const schema::MappingSet& mapping) {
    auto merged = align_union(src, tgt, key, mapping);
    Alignment a;
    for (auto& row : merged) {
        if (row.source_row == kNoRow) {
            a.added.push_back(std::move(row.key));
        } else if (row.target_row == kNoRow) {
            a.removed.push_back(std::move(row.key));
        } else {
            a.pairs.push_back(std::move(row));
        }
    }
    return a;
}

std::optional<RowDiff> diff_row(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                const AlignedRow& row, const std::vector<ColumnPair>& pairs) {
    if (row.source_row == kNoRow) return RowDiff{row.key, RowStatus::Added, {}};
    if (row.target_row == kNoRow) return RowDiff{row.key, RowStatus::Removed, {}};
    RowDiff out{row.key, RowStatus::Modified, {}};
    for (const auto& p : pairs) {
        if (p.is_key) continue;
        auto cell = diff_raw(src.raw(row.source_row, p.source_index), tgt.raw(row.target_row, p.target_index),
                             p.name, p.cmp);
        if (!cell) continue;
        cell->key = row.key;
        out.cells.push_back(std::move(*cell));
    }
    if (out.cells.empty()) return std::nullopt;
    return out;
}

} // namespace driftdiff::datadiff

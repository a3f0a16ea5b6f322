// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <sqlite3.h>

#include "driftdiff/error.hpp"

namespace driftdiff::ingest {

namespace {

bool all_digits(std::string_view s) noexcept {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) noexcept {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

bool leap(int y) noexcept { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) noexcept {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

bool valid_date(int y, int m, int d) noexcept {
    return y >= 1 && m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

// "YYYY-MM-DD" at the front of s.
bool read_iso_date(std::string_view s, Timestamp& ts) noexcept {
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
        return false;
    ts.year = to_int(s.substr(0, 4));
    ts.month = to_int(s.substr(5, 2));
    ts.day = to_int(s.substr(8, 2));
    return valid_date(ts.year, ts.month, ts.day);
}

// "HH:MM:SS"
bool read_clock(std::string_view s, Timestamp& ts) noexcept {
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') return false;
    if (!all_digits(s.substr(0, 2)) || !all_digits(s.substr(3, 2)) || !all_digits(s.substr(6, 2)))
        return false;
    ts.hour = to_int(s.substr(0, 2));
    ts.minute = to_int(s.substr(3, 2));
    ts.second = to_int(s.substr(6, 2));
    ts.has_time = true;
    return ts.hour < 24 && ts.minute < 60 && ts.second < 60;
}

bool read_offset(std::string_view s, Timestamp& ts) noexcept {
    if (s == "Z") {
        ts.offset_minutes = 0;
        return true;
    }
    if (s.size() != 6 && s.size() != 5) return false;
    if (s[0] != '+' && s[0] != '-') return false;
    std::string_view hh = s.substr(1, 2);
    std::string_view mm = s.size() == 6 ? s.substr(4, 2) : s.substr(3, 2);
    if (s.size() == 6 && s[3] != ':') return false;
    if (!all_digits(hh) || !all_digits(mm)) return false;
    const int h = to_int(hh);
    const int m = to_int(mm);
    if (h > 14 || m >= 60) return false;
    ts.offset_minutes = (s[0] == '-' ? -1 : 1) * (h * 60 + m);
    return true;
}

std::string_view trim_view(std::string_view s) noexcept {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_boolean_word(std::string_view s) noexcept {
    return s == "true" || s == "false" || s == "TRUE" || s == "FALSE";
}

bool is_json_document(std::string_view raw) {
    const auto t = trim_view(raw);
    if (t.empty() || (t.front() != '{' && t.front() != '[')) return false;
    return nlohmann::json::accept(t);
}

template <typename Pred>
bool all_nonnull(std::span<const std::string_view> samples, Pred pred) {
    for (auto s : samples) {
        if (!is_null_token(s) && !pred(s)) return false;
    }
    return true;
}

// ── delimited reading ─────────────────────────────────────────────

// Splits one logical record (quotes balanced) into fields.
void split_record(std::string_view record, char delim, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    std::size_t i = 0;
    const std::size_t n = record.size();
    while (true) {
        field.clear();
        if (i < n && record[i] == '"') {
            ++i;
            while (i < n) {
                if (record[i] == '"') {
                    if (i + 1 < n && record[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        ++i;
                        break;
                    }
                } else {
                    field += record[i++];
                }
            }
            // Lenient: text after the closing quote is kept verbatim.
            while (i < n && record[i] != delim) field += record[i++];
        } else {
            const std::size_t start = i;
            while (i < n && record[i] != delim) ++i;
            field.assign(record.substr(start, i - start));
        }
        out.push_back(field);
        if (i >= n) break;
        ++i; // delimiter
        if (i == n) {
            out.emplace_back();
            break;
        }
    }
}

std::size_t count_quotes(std::string_view s) noexcept {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '"'));
}

class RecordReader {
public:
    explicit RecordReader(std::istream& in) : in_(in) {}

    // Reads one logical record; returns false at EOF. start_line is 1-based.
    bool next(std::string& record, std::size_t& start_line) {
        std::string line;
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        start_line = line_no_;
        strip_cr(line);
        record = std::move(line);
        std::size_t quotes = count_quotes(record);
        while (quotes % 2 == 1) {
            std::string more;
            if (!std::getline(in_, more)) break;
            ++line_no_;
            strip_cr(more);
            record += '\n';
            record += more;
            quotes += count_quotes(more);
        }
        return true;
    }

private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }

    std::istream& in_;
    std::size_t line_no_ = 0;
};

std::string quote_field(std::string_view raw, char delim, bool force) {
    const bool needs = force || raw.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(raw);
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// ── sqlite helpers ────────────────────────────────────────────────

class DbHandle {
public:
    explicit DbHandle(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path))
            throw Error(ErrorCode::UnreadableSource, "database not found: " + path.string());
        const int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr);
        if (rc != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open database";
            sqlite3_close(db_);
            db_ = nullptr;
            throw Error(ErrorCode::UnreadableSource, msg + ": " + path.string());
        }
    }
    ~DbHandle() { sqlite3_close(db_); }
    DbHandle(const DbHandle&) = delete;
    DbHandle& operator=(const DbHandle&) = delete;

    sqlite3* get() const noexcept { return db_; }

private:
    sqlite3* db_ = nullptr;
};

class StmtHandle {
public:
    StmtHandle() = default;
    ~StmtHandle() { sqlite3_finalize(stmt_); }
    StmtHandle(const StmtHandle&) = delete;
    StmtHandle& operator=(const StmtHandle&) = delete;

    sqlite3_stmt** out() noexcept { return &stmt_; }
    sqlite3_stmt* get() const noexcept { return stmt_; }

private:
    sqlite3_stmt* stmt_ = nullptr;
};

std::optional<ValueType> type_from_decltype(const char* decl) {
    if (!decl) return std::nullopt;
    std::string d(decl);
    std::transform(d.begin(), d.end(), d.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (d.empty()) return std::nullopt;
    if (d.find("BOOL") != std::string::npos) return ValueType::Boolean;
    if (d.find("INT") != std::string::npos) return ValueType::Integer;
    if (d.find("JSON") != std::string::npos) return ValueType::Json;
    if (d.find("DATE") != std::string::npos || d.find("TIME") != std::string::npos)
        return ValueType::DateTime;
    if (d.find("CHAR") != std::string::npos || d.find("CLOB") != std::string::npos ||
        d.find("TEXT") != std::string::npos)
        return ValueType::Text;
    if (d.find("REAL") != std::string::npos || d.find("FLOA") != std::string::npos ||
        d.find("DOUB") != std::string::npos || d.find("NUMERIC") != std::string::npos ||
        d.find("DECIMAL") != std::string::npos)
        return ValueType::Float;
    return std::nullopt;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool only_trailing_noise(const char* tail) {
    if (!tail) return true;
    for (const char* p = tail; *p; ++p) {
        if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') return false;
    }
    return true;
}

std::string quote_identifier(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

TableSnapshot run_statement(const std::filesystem::path& database, std::string_view sql,
                            SourceKind kind, std::string provenance,
                            std::vector<std::string> key_columns) {
    DbHandle db(database);
    StmtHandle stmt;
    const char* tail = nullptr;
    const int rc = sqlite3_prepare_v2(db.get(), sql.data(), static_cast<int>(sql.size()), stmt.out(),
                                      &tail);
    if (rc != SQLITE_OK) throw Error(ErrorCode::QueryFailed, sqlite3_errmsg(db.get()));
    if (!stmt.get()) throw Error(ErrorCode::QueryFailed, "empty statement");
    if (tail && tail < sql.data() + sql.size() &&
        !only_trailing_noise(std::string(tail, sql.data() + sql.size()).c_str()))
        throw Error(ErrorCode::NonReadOnlyQuery, "only a single statement is accepted");
    if (!sqlite3_stmt_readonly(stmt.get()))
        throw Error(ErrorCode::NonReadOnlyQuery, "statement would modify the database: " +
                                                     std::string(sql));

    const int ncol = sqlite3_column_count(stmt.get());
    if (ncol == 0) throw Error(ErrorCode::QueryFailed, "statement returns no columns");
    std::vector<std::string> names;
    std::vector<std::optional<ValueType>> declared;
    for (int c = 0; c < ncol; ++c) {
        const char* nm = sqlite3_column_name(stmt.get(), c);
        names.emplace_back(nm ? nm : "column" + std::to_string(c));
        declared.push_back(type_from_decltype(sqlite3_column_decltype(stmt.get(), c)));
    }

    SnapshotBuilder builder(names);
    // Storage classes seen per column: bit 0 INTEGER, 1 FLOAT, 2 TEXT, 3 BLOB.
    std::vector<unsigned> classes(static_cast<std::size_t>(ncol), 0);
    std::vector<std::string> row(static_cast<std::size_t>(ncol));
    while (true) {
        const int step = sqlite3_step(stmt.get());
        if (step == SQLITE_DONE) break;
        if (step != SQLITE_ROW) throw Error(ErrorCode::QueryFailed, sqlite3_errmsg(db.get()));
        for (int c = 0; c < ncol; ++c) {
            auto& cell = row[static_cast<std::size_t>(c)];
            switch (sqlite3_column_type(stmt.get(), c)) {
                case SQLITE_NULL: cell = "NULL"; break;
                case SQLITE_INTEGER:
                    cell = std::to_string(sqlite3_column_int64(stmt.get(), c));
                    classes[static_cast<std::size_t>(c)] |= 1u;
                    break;
                case SQLITE_FLOAT:
                    cell = format_double(sqlite3_column_double(stmt.get(), c));
                    classes[static_cast<std::size_t>(c)] |= 2u;
                    break;
                case SQLITE_BLOB:
                    cell = std::string(reinterpret_cast<const char*>(sqlite3_column_blob(stmt.get(), c)),
                                       static_cast<std::size_t>(sqlite3_column_bytes(stmt.get(), c)));
                    classes[static_cast<std::size_t>(c)] |= 8u;
                    break;
                default: {
                    const auto* txt = sqlite3_column_text(stmt.get(), c);
                    cell = txt ? reinterpret_cast<const char*>(txt) : "";
                    classes[static_cast<std::size_t>(c)] |= 4u;
                }
            }
        }
        builder.add_row(std::span<const std::string>(row));
    }
    for (int c = 0; c < ncol; ++c) {
        const auto idx = static_cast<std::size_t>(c);
        if (declared[idx]) {
            builder.declare_type(idx, *declared[idx]);
        } else if (classes[idx] == 1u) {
            builder.declare_type(idx, ValueType::Integer);
        } else if (classes[idx] == 2u || classes[idx] == 3u) {
            builder.declare_type(idx, ValueType::Float);
        }
        // Text/blob/mixed storage falls through to inference over the rendered text.
    }
    return builder.finish(kind, std::move(provenance), std::move(key_columns));
}

} // namespace

// ── scalar parsing ────────────────────────────────────────────────

std::optional<std::int64_t> parse_integer(std::string_view raw) noexcept {
    if (raw.empty()) return std::nullopt;
    bool neg = false;
    std::string_view digits = raw;
    if (digits.front() == '+' || digits.front() == '-') {
        neg = digits.front() == '-';
        digits.remove_prefix(1);
    }
    if (!all_digits(digits)) return std::nullopt;
    std::uint64_t mag = 0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), mag);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) return std::nullopt;
    constexpr std::uint64_t kMaxPos = static_cast<std::uint64_t>(INT64_MAX);
    if (!neg && mag > kMaxPos) return std::nullopt;
    if (neg && mag > kMaxPos + 1) return std::nullopt;
    if (neg) return mag == kMaxPos + 1 ? INT64_MIN : -static_cast<std::int64_t>(mag);
    return static_cast<std::int64_t>(mag);
}

std::optional<double> parse_float(std::string_view raw) noexcept {
    if (raw.empty()) return std::nullopt;
    std::string_view body = raw;
    if (body.front() == '+') body.remove_prefix(1);
    if (body.empty()) return std::nullopt;
    bool has_digit = false;
    for (char c : body) {
        if (c >= '0' && c <= '9') {
            has_digit = true;
        } else if (c != '.' && c != 'e' && c != 'E' && c != '-' && c != '+') {
            return std::nullopt;
        }
    }
    if (!has_digit) return std::nullopt;
    double v = 0;
    auto res = std::from_chars(body.data(), body.data() + body.size(), v);
    if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) return std::nullopt;
    return v;
}

std::optional<bool> parse_boolean(std::string_view raw) noexcept {
    if (raw == "true" || raw == "TRUE" || raw == "1") return true;
    if (raw == "false" || raw == "FALSE" || raw == "0") return false;
    return std::nullopt;
}

std::optional<Timestamp> parse_timestamp(std::string_view raw) noexcept {
    Timestamp ts;
    if (raw.size() == 10 && raw[2] == '/' && raw[5] == '/') {
        if (!all_digits(raw.substr(0, 2)) || !all_digits(raw.substr(3, 2)) ||
            !all_digits(raw.substr(6, 4)))
            return std::nullopt;
        ts.month = to_int(raw.substr(0, 2));
        ts.day = to_int(raw.substr(3, 2));
        ts.year = to_int(raw.substr(6, 4));
        if (!valid_date(ts.year, ts.month, ts.day)) return std::nullopt;
        return ts;
    }
    if (!read_iso_date(raw, ts)) return std::nullopt;
    if (raw.size() == 10) return ts;
    if (raw.size() < 19) return std::nullopt;
    const char sep = raw[10];
    if (sep != 'T' && sep != ' ') return std::nullopt;
    if (!read_clock(raw.substr(11, 8), ts)) return std::nullopt;
    std::string_view rest = raw.substr(19);
    if (rest.empty()) return ts;
    if (sep != 'T') return std::nullopt;
    if (!read_offset(rest, ts)) return std::nullopt;
    return ts;
}

std::optional<nlohmann::json> parse_json_document(std::string_view raw) {
    const auto t = trim_view(raw);
    if (t.empty() || (t.front() != '{' && t.front() != '[')) return std::nullopt;
    auto doc = nlohmann::json::parse(t, nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    return doc;
}

Value parse_value(std::string_view raw, ValueType target) {
    Value v;
    v.type = target;
    v.raw = std::string(raw);
    if (is_null_token(raw)) return v;
    switch (target) {
        case ValueType::Text: v.payload = std::string(raw); return v;
        case ValueType::Integer:
            if (auto i = parse_integer(raw)) {
                v.payload = *i;
                return v;
            }
            break;
        case ValueType::Float:
            if (auto f = parse_float(raw)) {
                v.payload = *f;
                return v;
            }
            break;
        case ValueType::Boolean:
            if (auto b = parse_boolean(raw)) {
                v.payload = *b;
                return v;
            }
            break;
        case ValueType::DateTime:
            if (auto ts = parse_timestamp(raw)) {
                v.payload = *ts;
                return v;
            }
            break;
        case ValueType::Json:
            if (auto doc = parse_json_document(raw)) {
                v.payload = std::move(*doc);
                return v;
            }
            break;
        case ValueType::NullOnly: break;
    }
    v.type = ValueType::Text;
    v.payload = std::string(raw);
    v.nonconforming = true;
    return v;
}

CellState classify(std::string_view raw, ValueType type) {
    if (is_null_token(raw)) return CellState::Null;
    bool ok = true;
    switch (type) {
        case ValueType::Text: break;
        case ValueType::Integer: ok = parse_integer(raw).has_value(); break;
        case ValueType::Float: ok = parse_float(raw).has_value(); break;
        case ValueType::Boolean: ok = parse_boolean(raw).has_value(); break;
        case ValueType::DateTime: ok = parse_timestamp(raw).has_value(); break;
        case ValueType::Json: ok = is_json_document(raw); break;
        case ValueType::NullOnly: ok = false; break;
    }
    return ok ? CellState::Ok : CellState::Nonconforming;
}

ValueType infer_type(std::span<const std::string_view> samples, std::size_t sample_cap) {
    if (samples.size() > sample_cap) samples = samples.first(sample_cap);
    bool any = false;
    for (auto s : samples) {
        if (!is_null_token(s)) {
            any = true;
            break;
        }
    }
    if (!any) return ValueType::NullOnly;
    if (all_nonnull(samples, [](std::string_view s) { return parse_integer(s).has_value(); }))
        return ValueType::Integer;
    if (all_nonnull(samples, [](std::string_view s) { return parse_float(s).has_value(); }))
        return ValueType::Float;
    // 0/1 only count as booleans next to true/false words; a pure 0/1 column
    // already resolved to Integer above.
    if (all_nonnull(samples, [](std::string_view s) { return parse_boolean(s).has_value(); })) {
        const bool has_word = std::any_of(samples.begin(), samples.end(), is_boolean_word);
        if (has_word) return ValueType::Boolean;
    }
    if (all_nonnull(samples, [](std::string_view s) { return parse_timestamp(s).has_value(); }))
        return ValueType::DateTime;
    if (all_nonnull(samples, is_json_document))
        return ValueType::Json;
    return ValueType::Text;
}

ValueType infer_type(std::span<const std::string> samples, std::size_t sample_cap) {
    std::vector<std::string_view> views(samples.begin(), samples.end());
    return infer_type(std::span<const std::string_view>(views), sample_cap);
}

// ── snapshot ──────────────────────────────────────────────────────

std::vector<Value> TableSnapshot::row(std::size_t r) const {
    std::vector<Value> out;
    out.reserve(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) out.push_back(value(r, c));
    return out;
}

std::size_t TableSnapshot::memory_bytes() const noexcept {
    std::size_t total = 0;
    for (const auto& c : columns_) total += c.memory_bytes();
    return total;
}

SnapshotBuilder::SnapshotBuilder(std::vector<std::string> column_names)
    : names_(std::move(column_names)), columns_(names_.size()), declared_(names_.size()) {}

void SnapshotBuilder::add_row(std::span<const std::string_view> raws) {
    for (std::size_t c = 0; c < columns_.size(); ++c) columns_[c].push(raws[c]);
    ++rows_;
}

void SnapshotBuilder::add_row(std::span<const std::string> raws) {
    for (std::size_t c = 0; c < columns_.size(); ++c) columns_[c].push(raws[c]);
    ++rows_;
}

void SnapshotBuilder::reserve(std::size_t rows) {
    for (auto& c : columns_) c.reserve(rows);
}

void SnapshotBuilder::declare_type(std::size_t col, ValueType type) { declared_.at(col) = type; }

TableSnapshot SnapshotBuilder::finish(SourceKind kind, std::string provenance,
                                      std::vector<std::string> key_columns) {
    if (rows_ == 0) throw Error(ErrorCode::EmptyInput, "no data rows in " + provenance);
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(fold_column_name(n)).second)
            throw Error(ErrorCode::DuplicateColumn, "duplicate column name '" + n + "' in " + provenance);
    }

    TableSnapshot snap;
    snap.schema_.source_kind = kind;
    snap.schema_.key_columns = std::move(key_columns);
    snap.row_count_ = rows_;
    snap.provenance_ = std::move(provenance);

    const std::size_t sample_n = std::min(rows_, kInferenceSampleCap);
    std::vector<std::string_view> samples;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto& col = columns_[c];
        ValueType type;
        if (declared_[c]) {
            type = *declared_[c];
        } else {
            samples.clear();
            for (std::size_t r = 0; r < sample_n; ++r) samples.push_back(col.raw(r));
            type = infer_type(std::span<const std::string_view>(samples), kInferenceSampleCap);
        }
        col.states_.resize(rows_);
        std::size_t nulls = 0;
        for (std::size_t r = 0; r < rows_; ++r) {
            col.states_[r] = classify(col.raw(r), type);
            nulls += col.states_[r] == CellState::Null;
        }
        ColumnDescriptor d;
        d.name = names_[c];
        d.ordinal = c;
        d.value_type = type;
        d.null_fraction = static_cast<double>(nulls) / static_cast<double>(rows_);
        d.nullable = nulls > 0;
        snap.schema_.columns.push_back(std::move(d));
    }
    snap.columns_ = std::move(columns_);
    columns_.clear();
    rows_ = 0;
    return snap;
}

// ── sources ───────────────────────────────────────────────────────

SourceDescriptor SourceDescriptor::file(std::filesystem::path p) {
    SourceDescriptor d;
    const auto ext = p.extension().string();
    d.kind = (ext == ".jsonl" || ext == ".ndjson") ? Kind::JsonLinesFile : Kind::DelimitedFile;
    d.path = std::move(p);
    return d;
}

SourceDescriptor SourceDescriptor::database_table(std::filesystem::path db, std::string table) {
    SourceDescriptor d;
    d.kind = Kind::DatabaseTable;
    d.path = std::move(db);
    d.table = std::move(table);
    return d;
}

SourceDescriptor SourceDescriptor::query(std::filesystem::path db, std::string sql) {
    SourceDescriptor d;
    d.kind = Kind::Query;
    d.path = std::move(db);
    d.sql = std::move(sql);
    return d;
}

std::string SourceDescriptor::describe() const {
    switch (kind) {
        case Kind::DelimitedFile:
        case Kind::JsonLinesFile: return path.string();
        case Kind::DatabaseTable: return path.string() + "::" + table;
        case Kind::Query: return path.string() + "?sql=" + sql;
    }
    return path.string();
}

TableSnapshot read_snapshot(const SourceDescriptor& source) {
    switch (source.kind) {
        case SourceDescriptor::Kind::DelimitedFile: return read_delimited(source.path);
        case SourceDescriptor::Kind::JsonLinesFile: return read_json_lines(source.path);
        case SourceDescriptor::Kind::DatabaseTable: return read_table(source.path, source.table);
        case SourceDescriptor::Kind::Query: return execute_query(source.path, source.sql);
    }
    throw Error(ErrorCode::UnreadableSource, "unknown source kind");
}

char detect_delimiter(std::string_view header_line) noexcept {
    const auto commas = std::count(header_line.begin(), header_line.end(), ',');
    const auto tabs = std::count(header_line.begin(), header_line.end(), '\t');
    return tabs > commas ? '\t' : ',';
}

TableSnapshot read_delimited(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open " + path.string());
    RecordReader reader(in);
    std::string record;
    std::size_t line = 0;
    if (!reader.next(record, line)) throw Error(ErrorCode::EmptyInput, "missing header in " + path.string());
    if (record.rfind("\xEF\xBB\xBF", 0) == 0) record.erase(0, 3);
    const char delim = detect_delimiter(record);
    std::vector<std::string> fields;
    split_record(record, delim, fields);
    SnapshotBuilder builder(fields);
    const std::size_t width = fields.size();

    std::size_t blank_line = 0;
    std::size_t blank_count = 0;
    while (reader.next(record, line)) {
        if (record.empty() && width > 1) {
            // Blank lines are tolerated only as trailing padding.
            if (blank_count++ == 0) blank_line = line;
            continue;
        }
        if (blank_count > 0)
            throw Error(ErrorCode::RaggedRow, path.string() + ": line " + std::to_string(blank_line) +
                                                  " has 1 field, expected " + std::to_string(width));
        split_record(record, delim, fields);
        if (fields.size() != width)
            throw Error(ErrorCode::RaggedRow, path.string() + ": line " + std::to_string(line) + " has " +
                                                  std::to_string(fields.size()) + " fields, expected " +
                                                  std::to_string(width));
        builder.add_row(std::span<const std::string>(fields));
    }
    return builder.finish(SourceKind::File, path.string());
}

TableSnapshot read_json_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open " + path.string());
    std::vector<std::string> names;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::pair<std::size_t, std::string>>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_view(line).empty()) continue;
        auto doc = nlohmann::ordered_json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw Error(ErrorCode::UnreadableSource,
                        path.string() + ": line " + std::to_string(line_no) + " is not a JSON object");
        std::vector<std::pair<std::size_t, std::string>> cells;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            auto [pos, inserted] = index.try_emplace(it.key(), names.size());
            if (inserted) names.push_back(it.key());
            std::string raw;
            if (it->is_string()) {
                raw = it->get<std::string>();
            } else if (it->is_null()) {
                raw = "null";
            } else {
                raw = it->dump();
            }
            cells.emplace_back(pos->second, std::move(raw));
        }
        rows.push_back(std::move(cells));
    }
    if (names.empty()) throw Error(ErrorCode::EmptyInput, "no data rows in " + path.string());
    SnapshotBuilder builder(names);
    builder.reserve(rows.size());
    std::vector<std::string> row(names.size());
    for (auto& cells : rows) {
        std::fill(row.begin(), row.end(), std::string());
        for (auto& [c, raw] : cells) row[c] = std::move(raw);
        builder.add_row(std::span<const std::string>(row));
    }
    return builder.finish(SourceKind::File, path.string());
}

TableSnapshot read_table(const std::filesystem::path& database, const std::string& table) {
    std::vector<std::string> keys;
    {
        DbHandle db(database);
        StmtHandle stmt;
        const std::string pragma = "PRAGMA table_info(" + quote_identifier(table) + ")";
        if (sqlite3_prepare_v2(db.get(), pragma.c_str(), -1, stmt.out(), nullptr) != SQLITE_OK)
            throw Error(ErrorCode::QueryFailed, sqlite3_errmsg(db.get()));
        std::vector<std::pair<int, std::string>> pk;
        bool any = false;
        while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
            any = true;
            const int order = sqlite3_column_int(stmt.get(), 5);
            if (order > 0)
                pk.emplace_back(order, reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), 1)));
        }
        if (!any) throw Error(ErrorCode::UnreadableSource, "no such table: " + table);
        std::sort(pk.begin(), pk.end());
        for (auto& [o, name] : pk) keys.push_back(name);
    }
    return run_statement(database, "SELECT * FROM " + quote_identifier(table), SourceKind::Database,
                         database.string() + "::" + table, std::move(keys));
}

TableSnapshot execute_query(const std::filesystem::path& database, std::string_view sql) {
    return run_statement(database, sql, SourceKind::Query, database.string() + "?sql=" + std::string(sql),
                         {});
}

void write_delimited(const TableSnapshot& snapshot, const std::filesystem::path& path, char delimiter) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write " + path.string());
    const auto& cols = snapshot.schema().columns;
    const bool single = cols.size() == 1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << delimiter;
        out << quote_field(cols[c].name, delimiter, false);
    }
    out << '\n';
    for (std::size_t r = 0; r < snapshot.row_count(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << delimiter;
            const auto raw = snapshot.raw(r, c);
            out << quote_field(raw, delimiter, single && raw.empty());
        }
        out << '\n';
    }
}

void write_json_lines(const TableSnapshot& snapshot, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write " + path.string());
    const auto& cols = snapshot.schema().columns;
    for (std::size_t r = 0; r < snapshot.row_count(); ++r) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < cols.size(); ++c) obj[cols[c].name] = std::string(snapshot.raw(r, c));
        out << obj.dump() << '\n';
    }
}

} // namespace driftdiff::ingest

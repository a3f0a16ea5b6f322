// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "driftdiff/error.hpp"

namespace driftdiff::synthetic {

namespace {

constexpr std::array<std::string_view, kFamilyCount> kFamilyNames = {
    "Rounding",      "Truncation",   "ZeroPadding", "CaseChange", "WhitespaceChange",
    "NullInflation", "NullDeflation", "Transposition", "TimeZoneShift", "TypeMismatch",
    "JsonKeyAdd",    "CategoricalRemap", "ValueReplace"};

constexpr std::size_t kColumns = 20;
using Row = std::array<std::string, kColumns>;

enum Col : std::size_t {
    kId, kName, kCity, kCategory, kStatus, kComment, kQty, kAmountCents, kAccountNo, kScore,
    kPrice, kWeight, kRate, kDiscount, kCreatedAt, kUpdatedAt, kShippedAt, kAttrs, kMeta, kActive,
};

constexpr std::array<std::string_view, 16> kFirst = {"Alice", "Bruno", "Chen",  "Dara",  "Elena", "Farid",
                                                     "Grace", "Hugo",  "Ines",  "Jonas", "Kira",  "Luca",
                                                     "Maya",  "Nils",  "Olga",  "Pavel"};
constexpr std::array<std::string_view, 12> kLast = {"Smith", "Okafor", "Tanaka", "Silva",  "Novak", "Berg",
                                                    "Moreau", "Haddad", "Kowalski", "Ruiz", "Lind",  "Park"};
constexpr std::array<std::string_view, 10> kCities = {"Springfield", "Riverton", "Lakeside", "Fairview",
                                                      "Georgetown",  "Ashland",  "Milford",  "Clinton",
                                                      "Salem",       "Kingston"};
constexpr std::array<std::string_view, 4> kCategories = {"alpha", "bravo", "charlie", "delta"};
constexpr std::array<std::string_view, 4> kRemapped = {"A1", "B2", "C3", "D4"};
constexpr std::array<std::string_view, 4> kStatuses = {"open", "closed", "pending", "shipped"};
constexpr std::array<std::string_view, 8> kComments = {
    "left at front door", "call before delivery", "gift wrap requested", "fragile handle with care",
    "deliver after five", "back entrance only",   "signature required",  "no plastic packaging"};
constexpr std::array<std::string_view, 5> kColors = {"red", "green", "blue", "black", "white"};
constexpr std::array<std::string_view, 4> kChannels = {"web", "store", "phone", "partner"};

// 2020-01-01T00:00:00Z and five years of seconds.
constexpr std::int64_t kEpochStart = 1577836800;
constexpr std::int64_t kSpanSeconds = 5LL * 365 * 86400;

// Modulo reduction keeps the stream identical across standard libraries.
std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 row_rng(std::uint64_t seed, std::uint64_t row) { return std::mt19937_64(mix(seed ^ mix(row + 1))); }

// Howard Hinnant's civil_from_days.
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yoe + era * 400 + (m <= 2));
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string format_instant(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t secs = t % 86400;
    if (secs < 0) {
        secs += 86400;
        --days;
    }
    int y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", y, m, d, static_cast<int>(secs / 3600),
                  static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
    return buf;
}

std::int64_t parse_instant(const std::string& s) {
    int y = 0, hh = 0, mm = 0, ss = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u %d:%d:%d", &y, &m, &d, &hh, &mm, &ss) != 6)
        throw Error(ErrorCode::InvalidConfig, "bad synthetic timestamp " + s);
    return days_from_civil(y, m, d) * 86400 + hh * 3600 + mm * 60 + ss;
}

// Four decimals; the second is 1..8 and the last nonzero, so rounding to two
// decimals never lands on a value that one decimal or zero already reproduce.
std::string four_decimal(std::mt19937_64& rng) {
    const auto whole = pick(rng, 1000);
    const auto d1 = pick(rng, 10);
    const auto d2 = 1 + pick(rng, 8);
    const auto d3 = pick(rng, 10);
    const auto d4 = 1 + pick(rng, 9);
    return std::to_string(whole) + "." + std::to_string(d1) + std::to_string(d2) + std::to_string(d3) +
           std::to_string(d4);
}

Row base_row(std::uint64_t seed, std::uint64_t index) {
    auto rng = row_rng(seed, index);
    Row r;
    r[kId] = std::to_string(index + 1);
    r[kName] = std::string(kFirst[pick(rng, kFirst.size())]) + " " + std::string(kLast[pick(rng, kLast.size())]);
    r[kCity] = kCities[pick(rng, kCities.size())];
    r[kCategory] = kCategories[pick(rng, kCategories.size())];
    r[kStatus] = kStatuses[pick(rng, kStatuses.size())];
    r[kComment] = kComments[pick(rng, kComments.size())];
    r[kQty] = std::to_string(1 + pick(rng, 500));
    {
        // First two digits nonzero and distinct: swapping them is always a clean transposition.
        const auto d0 = 1 + pick(rng, 9);
        auto d1 = 1 + pick(rng, 8);
        if (d1 >= d0) ++d1;
        std::string cents = std::to_string(d0) + std::to_string(d1);
        const auto tail = 2 + pick(rng, 3);
        for (std::uint64_t i = 0; i < tail; ++i) cents += static_cast<char>('0' + pick(rng, 10));
        r[kAmountCents] = cents;
    }
    r[kAccountNo] = std::to_string(100000 + pick(rng, 900000));
    r[kScore] = std::to_string(pick(rng, 101));
    for (auto c : {kPrice, kWeight, kRate, kDiscount}) r[c] = four_decimal(rng);
    const std::int64_t created = kEpochStart + static_cast<std::int64_t>(pick(rng, kSpanSeconds));
    r[kCreatedAt] = format_instant(created);
    r[kUpdatedAt] = format_instant(created + static_cast<std::int64_t>(pick(rng, 30 * 86400)));
    const bool shipped = pick(rng, 20) != 0;
    const auto ship_delay = static_cast<std::int64_t>(pick(rng, 10 * 86400));
    r[kShippedAt] = shipped ? format_instant(created + ship_delay) : std::string();
    r[kAttrs] = nlohmann::json{{"color", kColors[pick(rng, kColors.size())]}, {"size", 1 + pick(rng, 5)}}.dump();
    r[kMeta] = nlohmann::json{{"channel", kChannels[pick(rng, kChannels.size())]}, {"tier", pick(rng, 4)}}.dump();
    r[kActive] = pick(rng, 2) ? "true" : "false";
    return r;
}

std::vector<Col> eligible(Family f) {
    switch (f) {
        case Family::Rounding: return {kPrice, kWeight, kRate, kDiscount};
        case Family::Truncation: return {kName, kCity, kComment};
        case Family::ZeroPadding: return {kAccountNo};
        case Family::CaseChange: return {kName, kCity};
        case Family::WhitespaceChange: return {kName, kComment};
        case Family::NullInflation: return {kCity, kQty, kScore, kComment};
        case Family::NullDeflation: return {kStatus, kQty, kComment};
        case Family::Transposition: return {kAmountCents};
        case Family::TimeZoneShift: return {kCreatedAt, kUpdatedAt};
        case Family::TypeMismatch: return {kQty, kScore};
        case Family::JsonKeyAdd: return {kAttrs, kMeta};
        case Family::CategoricalRemap: return {kCategory};
        case Family::ValueReplace: return {kQty, kScore};
    }
    return {};
}

std::string round_two(const std::string& raw) {
    const auto dot = raw.find('.');
    const std::int64_t scaled = std::stoll(raw.substr(0, dot)) * 10000 + std::stoll(raw.substr(dot + 1));
    const std::int64_t cents = (scaled + 50) / 100; // non-negative: half away from zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(cents / 100),
                  static_cast<long long>(cents % 100));
    return buf;
}

std::string truncate(const std::string& s, std::mt19937_64& rng) {
    std::size_t keep = 3 + pick(rng, s.size() - 3);
    while (keep > 1 && s[keep - 1] == ' ') --keep;
    return s.substr(0, keep);
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

// Apply one family to a cell; the first element is the new source raw, the
// second the new target raw.
std::pair<std::optional<std::string>, std::optional<std::string>> mutate(Family f, Col col, const std::string& raw,
                                                                          std::mt19937_64& rng) {
    switch (f) {
        case Family::Rounding: return {raw, round_two(raw)};
        case Family::Truncation: return {raw, truncate(raw, rng)};
        case Family::ZeroPadding: return {raw, "00" + raw};
        case Family::CaseChange: return {raw, upper(raw)};
        case Family::WhitespaceChange: {
            const auto sp = raw.find(' ');
            return {raw, raw.substr(0, sp) + " " + raw.substr(sp)};
        }
        case Family::NullInflation: return {raw, std::nullopt};
        case Family::NullDeflation: return {std::nullopt, raw};
        case Family::Transposition: {
            std::string t = raw;
            std::swap(t[0], t[1]);
            return {raw, t};
        }
        case Family::TimeZoneShift: return {raw, format_instant(parse_instant(raw) + 7200)};
        case Family::TypeMismatch: return {raw, "x42"};
        case Family::JsonKeyAdd: {
            auto j = nlohmann::json::parse(raw);
            j["extra"] = 1;
            return {raw, j.dump()};
        }
        case Family::CategoricalRemap: {
            for (std::size_t i = 0; i < kCategories.size(); ++i) {
                if (raw == kCategories[i]) return {raw, std::string(kRemapped[i])};
            }
            return {raw, raw};
        }
        case Family::ValueReplace: return {raw, std::to_string(std::stoll(raw) * 10 + 7)};
    }
    (void)col;
    return {raw, raw};
}

void write_field(std::ostream& out, std::string_view raw) {
    if (raw.find_first_of(",\"\n\r") == std::string_view::npos) {
        out << raw;
        return;
    }
    out << '"';
    for (char c : raw) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_row(std::ostream& out, const Row& r) {
    for (std::size_t i = 0; i < kColumns; ++i) {
        if (i) out << ',';
        write_field(out, r[i]);
    }
    out << '\n';
}

struct PlannedMutation {
    std::uint64_t row = 0;
    Col col = kId;
    Family family = Family::Rounding;
};

std::vector<PlannedMutation> plan(const SyntheticSpec& spec) {
    if (spec.families.empty()) throw Error(ErrorCode::InvalidConfig, "synthetic spec needs at least one family");
    if (!(spec.diff_rate >= 0.0 && spec.diff_rate <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "diff_rate must lie in [0, 1]");
    const auto n = static_cast<std::uint64_t>(std::llround(static_cast<double>(spec.rows) * spec.diff_rate));
    std::mt19937_64 rng(mix(spec.seed));
    // Floyd's sampling: n distinct rows, uniform.
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = spec.rows - n; j < spec.rows; ++j) {
        const auto t = pick(rng, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> rows(chosen.begin(), chosen.end());
    // Shuffle row order before dealing so families are spread uniformly over keys.
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[pick(rng, i)]);
    std::vector<PlannedMutation> out;
    out.reserve(rows.size());
    std::vector<Family> deck;
    for (auto row : rows) {
        if (deck.empty()) {
            deck = spec.families;
            for (std::size_t i = deck.size(); i > 1; --i) std::swap(deck[i - 1], deck[pick(rng, i)]);
        }
        const Family f = deck.back();
        deck.pop_back();
        const auto cols = eligible(f);
        out.push_back({row, cols[pick(rng, cols.size())], f});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
    return out;
}

nlohmann::json opt_json(const std::optional<std::string>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

} // namespace

std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

std::optional<Family> family_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
        if (kFamilyNames[i] == name) return static_cast<Family>(i);
    }
    return std::nullopt;
}

std::vector<Family> all_families() {
    std::vector<Family> out;
    for (std::size_t i = 0; i < kFamilyCount; ++i) out.push_back(static_cast<Family>(i));
    return out;
}

std::vector<Family> static_families() {
    return {Family::Rounding, Family::Truncation, Family::NullInflation, Family::TimeZoneShift,
            Family::TypeMismatch};
}

std::string gold_label(Family f) {
    switch (f) {
        case Family::Rounding: return "Rounding";
        case Family::Truncation: return "Truncation";
        case Family::ZeroPadding: return "TypeCast";
        case Family::NullInflation: return "NullInflation";
        case Family::TimeZoneShift: return "TimeZoneShift";
        case Family::TypeMismatch: return "TypeCast";
        case Family::CategoricalRemap: return "CategoricalRemap";
        case Family::ValueReplace: return "BusinessRuleChange";
        default: return "Other";
    }
}

const std::vector<LayoutColumn>& layout() {
    static const std::vector<LayoutColumn> cols = {
        {"id", ValueType::Integer},          {"name", ValueType::Text},
        {"city", ValueType::Text},           {"category", ValueType::Text},
        {"status", ValueType::Text},         {"comment", ValueType::Text},
        {"qty", ValueType::Integer},         {"amount_cents", ValueType::Integer},
        {"account_no", ValueType::Integer},  {"score", ValueType::Integer},
        {"price", ValueType::Float},         {"weight", ValueType::Float},
        {"rate", ValueType::Float},          {"discount", ValueType::Float},
        {"created_at", ValueType::DateTime}, {"updated_at", ValueType::DateTime},
        {"shipped_at", ValueType::DateTime}, {"attrs", ValueType::Json},
        {"meta", ValueType::Json},           {"active", ValueType::Boolean},
    };
    return cols;
}

nlohmann::json GroundTruthLedger::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        list.push_back({{"key", e.key.parts},
                        {"column", e.column},
                        {"family", std::string(synthetic::to_string(e.family))},
                        {"before", opt_json(e.before)},
                        {"after", opt_json(e.after)}});
    }
    return {{"seed", seed}, {"rows", rows}, {"diff_rate", diff_rate}, {"entries", list}};
}

GroundTruthLedger GroundTruthLedger::from_json(const nlohmann::json& j) {
    try {
        GroundTruthLedger l;
        l.seed = j.at("seed").get<std::uint64_t>();
        l.rows = j.at("rows").get<std::uint64_t>();
        l.diff_rate = j.at("diff_rate").get<double>();
        for (const auto& e : j.at("entries")) {
            LedgerEntry entry;
            entry.key.parts = e.at("key").get<std::vector<std::string>>();
            entry.column = e.at("column").get<std::string>();
            auto fam = family_from_string(e.at("family").get<std::string>());
            if (!fam) throw Error(ErrorCode::InvalidConfig, "unknown family in ledger");
            entry.family = *fam;
            if (!e.at("before").is_null()) entry.before = e.at("before").get<std::string>();
            if (!e.at("after").is_null()) entry.after = e.at("after").get<std::string>();
            l.entries.push_back(std::move(entry));
        }
        return l;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed ledger: ") + e.what());
    }
}

GroundTruthLedger GroundTruthLedger::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open ledger " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, "ledger is not JSON: " + path.string());
    return from_json(j);
}

void GroundTruthLedger::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::UnreadableSource, "cannot write ledger " + path.string());
    out << to_json().dump(2) << '\n';
}

GroundTruthLedger plan_mutations(const SyntheticSpec& spec) {
    GroundTruthLedger ledger;
    ledger.seed = spec.seed;
    ledger.rows = spec.rows;
    ledger.diff_rate = spec.diff_rate;
    for (const auto& m : plan(spec)) {
        const auto row = base_row(spec.seed, m.row);
        auto rng = row_rng(spec.seed ^ 0x5eedULL, m.row);
        auto [before, after] = mutate(m.family, m.col, row[m.col], rng);
        ledger.entries.push_back({RowKey{{row[kId]}}, layout()[m.col].name, m.family, before, after});
    }
    std::sort(ledger.entries.begin(), ledger.entries.end(),
              [](const LedgerEntry& a, const LedgerEntry& b) { return a.key < b.key; });
    return ledger;
}

SyntheticFiles generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    SyntheticFiles files{dir / "source.csv", dir / "target.csv", dir / "ledger.json"};
    const auto mutations = plan(spec);
    std::ofstream src(files.source, std::ios::binary | std::ios::trunc);
    std::ofstream tgt(files.target, std::ios::binary | std::ios::trunc);
    if (!src || !tgt) throw Error(ErrorCode::UnreadableSource, "cannot write synthetic files in " + dir.string());
    Row header;
    for (std::size_t i = 0; i < kColumns; ++i) header[i] = layout()[i].name;
    write_row(src, header);
    write_row(tgt, header);
    std::size_t next = 0;
    for (std::uint64_t i = 0; i < spec.rows; ++i) {
        Row row = base_row(spec.seed, i);
        if (next < mutations.size() && mutations[next].row == i) {
            const auto& m = mutations[next++];
            auto rng = row_rng(spec.seed ^ 0x5eedULL, i);
            auto [before, after] = mutate(m.family, m.col, row[m.col], rng);
            Row target = row;
            row[m.col] = before.value_or("");
            target[m.col] = after.value_or("");
            write_row(src, row);
            write_row(tgt, target);
            continue;
        }
        write_row(src, row);
        write_row(tgt, row);
    }
    src.close();
    tgt.close();
    if (!src || !tgt) throw Error(ErrorCode::UnreadableSource, "short write in " + dir.string());
    plan_mutations(spec).save(files.ledger);
    return files;
}

} // namespace driftdiff::synthetic

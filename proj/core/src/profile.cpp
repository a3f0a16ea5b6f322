// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "driftdiff/datadiff.hpp"
#include "driftdiff/error.hpp"

namespace driftdiff::profile {

namespace {

bool is_numeric(ValueType t) { return t == ValueType::Integer || t == ValueType::Float; }

struct NumericColumn {
    std::vector<double> values;
    std::uint64_t nulls = 0;
    std::uint64_t invalid = 0;
};

NumericColumn read_numeric(const ingest::TableSnapshot& snap, std::size_t col, ValueType type) {
    NumericColumn out;
    const auto& data = snap.column(col);
    out.values.reserve(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto raw = data.raw(r);
        if (is_null_token(raw)) {
            ++out.nulls;
            continue;
        }
        if (type == ValueType::Integer) {
            if (auto i = ingest::parse_integer(raw)) {
                out.values.push_back(static_cast<double>(*i));
                continue;
            }
        } else if (auto f = ingest::parse_float(raw)) {
            out.values.push_back(*f);
            continue;
        }
        ++out.invalid;
    }
    return out;
}

std::pair<double, double> value_range(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

NumericHistogram histogram(const std::vector<double>& values, std::pair<double, double> range, std::size_t bins) {
    NumericHistogram h;
    const auto [lo, hi] = range;
    if (!(hi > lo) || bins == 0) {
        h.edges = {lo, hi};
        h.counts = {values.size()};
    } else {
        h.edges.resize(bins + 1);
        for (std::size_t i = 0; i < bins; ++i)
            h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
        h.edges[bins] = hi;
        h.counts.assign(bins, 0);
        const double scale = static_cast<double>(bins) / (hi - lo);
        for (double x : values) {
            double pos = std::floor((x - lo) * scale);
            std::size_t idx = pos < 0 ? 0 : static_cast<std::size_t>(pos);
            if (idx >= bins) idx = bins - 1;
            ++h.counts[idx];
        }
    }
    // Welford over sorted values: stable for large magnitudes, and the
    // rounding no longer depends on row order.
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0;
    double m2 = 0;
    std::uint64_t n = 0;
    for (double x : sorted) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    h.mean = n ? mean : 0.0;
    h.variance = n ? m2 / static_cast<double>(n) : 0.0;
    return h;
}

int month_index(const Timestamp& ts) { return ts.year * 12 + (ts.month - 1); }

std::string period_label(int month_idx, Granularity g) {
    const int year = month_idx / 12;
    const int month = month_idx % 12 + 1;
    char buf[32];
    if (g == Granularity::Quarter) {
        std::snprintf(buf, sizeof(buf), "%04d-Q%d", year, (month - 1) / 3 + 1);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    }
    return buf;
}

struct TemporalColumn {
    std::vector<int> months;
    std::uint64_t nulls = 0;
    std::uint64_t invalid = 0;
};

TemporalColumn read_temporal(const ingest::TableSnapshot& snap, std::size_t col) {
    TemporalColumn out;
    const auto& data = snap.column(col);
    out.months.reserve(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto raw = data.raw(r);
        if (is_null_token(raw)) {
            ++out.nulls;
        } else if (auto ts = ingest::parse_timestamp(raw)) {
            out.months.push_back(month_index(*ts));
        } else {
            ++out.invalid;
        }
    }
    return out;
}

Granularity granularity_for(int min_month, int max_month) {
    return max_month - min_month > kMonthlySpanLimit ? Granularity::Quarter : Granularity::Month;
}

TemporalBuckets temporal(const std::vector<int>& months, Granularity g) {
    std::map<std::string, std::uint64_t> counts;
    for (int m : months) ++counts[period_label(m, g)];
    TemporalBuckets b;
    b.granularity = g;
    b.buckets.assign(counts.begin(), counts.end());
    return b;
}

ColumnProfile frequency_profile(const ingest::TableSnapshot& snap, std::size_t col, ValueType type,
                                std::size_t top) {
    ColumnProfile p;
    p.column = snap.schema().columns[col].name;
    p.value_type = type;
    p.row_count = snap.row_count();
    const auto& data = snap.column(col);
    std::unordered_map<std::string_view, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto raw = data.raw(r);
        const auto state = ingest::classify(raw, type);
        if (state == ingest::CellState::Null) {
            ++p.null_count;
        } else if (state == ingest::CellState::Nonconforming) {
            ++p.invalid_count;
        } else {
            ++counts[raw];
            ++total;
        }
    }
    std::vector<std::pair<std::string_view, std::uint64_t>> entries(counts.begin(), counts.end());
    const std::size_t keep = std::min(top, entries.size());
    auto by_count = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(), by_count);
    FrequencyTable t;
    std::uint64_t kept = 0;
    for (std::size_t i = 0; i < keep; ++i) {
        t.top.emplace_back(std::string(entries[i].first), entries[i].second);
        kept += entries[i].second;
    }
    t.other_count = total - kept;
    t.distinct_count = counts.size();
    p.body = std::move(t);
    return p;
}

int sign_of(double x) { return (x > 0) - (x < 0); }

int skew_sign(const NumericHistogram& h) {
    std::uint64_t n = 0;
    for (auto c : h.counts) n += c;
    if (n == 0) return 0;
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        cum += h.counts[i];
        if (cum * 2 >= n) {
            const double center = (h.edges[i] + h.edges[i + 1]) / 2.0;
            return sign_of(h.mean - center);
        }
    }
    return 0;
}

template <typename Entries>
void keyed_deltas(const Entries& src, const Entries& tgt, DistributionDelta& out) {
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged;
    for (const auto& [k, c] : src) merged[k].first = c;
    for (const auto& [k, c] : tgt) merged[k].second = c;
    for (const auto& [k, counts] : merged) {
        out.bucket_deltas.push_back(
            {k, static_cast<std::int64_t>(counts.second) - static_cast<std::int64_t>(counts.first)});
        if (counts.first == 0 && counts.second > 0) out.emerging.push_back(k);
        if (counts.second == 0 && counts.first > 0) out.disappearing.push_back(k);
    }
}

ColumnProfile numeric_profile(const ingest::TableSnapshot& snap, std::size_t col, ValueType type,
                              const NumericColumn& data, std::pair<double, double> range, std::size_t bins) {
    ColumnProfile p;
    p.column = snap.schema().columns[col].name;
    p.value_type = type;
    p.row_count = snap.row_count();
    p.null_count = data.nulls;
    p.invalid_count = data.invalid;
    p.body = histogram(data.values, range, bins);
    return p;
}

ColumnProfile temporal_profile(const ingest::TableSnapshot& snap, std::size_t col, const TemporalColumn& data,
                               Granularity g) {
    ColumnProfile p;
    p.column = snap.schema().columns[col].name;
    p.value_type = ValueType::DateTime;
    p.row_count = snap.row_count();
    p.null_count = data.nulls;
    p.invalid_count = data.invalid;
    p.body = temporal(data.months, g);
    return p;
}

} // namespace

std::string_view to_string(Granularity g) { return g == Granularity::Quarter ? "Quarter" : "Month"; }

ColumnProfile profile_column(const ingest::TableSnapshot& snapshot, std::size_t col, ValueType as_type,
                             const ProfileOptions& options) {
    if (is_numeric(as_type)) {
        const auto data = read_numeric(snapshot, col, as_type);
        const auto range = options.range ? *options.range : value_range(data.values);
        return numeric_profile(snapshot, col, as_type, data, range, options.bins);
    }
    if (as_type == ValueType::DateTime) {
        const auto data = read_temporal(snapshot, col);
        Granularity g = Granularity::Month;
        if (options.granularity) {
            g = *options.granularity;
        } else if (!data.months.empty()) {
            auto [lo, hi] = std::minmax_element(data.months.begin(), data.months.end());
            g = granularity_for(*lo, *hi);
        }
        return temporal_profile(snapshot, col, data, g);
    }
    return frequency_profile(snapshot, col, as_type, options.top);
}

ColumnProfile profile_column(const ingest::TableSnapshot& snapshot, const ColumnDescriptor& column) {
    return profile_column(snapshot, column.ordinal, column.value_type);
}

DistributionDelta compare_profiles(const ColumnProfile& src, const ColumnProfile& tgt) {
    if (src.body.index() != tgt.body.index())
        throw Error(ErrorCode::IncomparableProfiles, "profile kinds differ for column '" + src.column + "'");
    DistributionDelta d;
    d.column = src.column;
    if (const auto* hs = std::get_if<NumericHistogram>(&src.body)) {
        const auto& ht = std::get<NumericHistogram>(tgt.body);
        if (hs->edges != ht.edges)
            throw Error(ErrorCode::IncomparableProfiles, "histogram edges differ for column '" + src.column + "'");
        for (std::size_t i = 0; i < hs->counts.size(); ++i) {
            d.bucket_deltas.push_back({std::to_string(i), static_cast<std::int64_t>(ht.counts[i]) -
                                                              static_cast<std::int64_t>(hs->counts[i])});
        }
        d.mean_shift = ht.mean - hs->mean;
        d.variance_shift = ht.variance - hs->variance;
        const int a = skew_sign(*hs);
        const int b = skew_sign(ht);
        d.skew_flag = a * b < 0;
    } else if (const auto* fs = std::get_if<FrequencyTable>(&src.body)) {
        keyed_deltas(fs->top, std::get<FrequencyTable>(tgt.body).top, d);
    } else {
        const auto& ts = std::get<TemporalBuckets>(src.body);
        const auto& tt = std::get<TemporalBuckets>(tgt.body);
        if (ts.granularity != tt.granularity)
            throw Error(ErrorCode::IncomparableProfiles, "temporal granularity differs for column '" + src.column + "'");
        keyed_deltas(ts.buckets, tt.buckets, d);
    }
    return d;
}

SummaryDiff summarize(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                      const schema::MappingSet& mapping, const TaskRunner& runner) {
    struct Job {
        std::size_t s;
        std::size_t t;
        ValueType type;
    };
    std::vector<Job> jobs;
    for (const auto& m : mapping.mappings) {
        const auto* sc = src.schema().find(m.source_column);
        const auto* tc = tgt.schema().find(m.target_column);
        if (!sc || !tc) continue;
        jobs.push_back({sc->ordinal, tc->ordinal, datadiff::comparison_type(sc->value_type, tc->value_type)});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.s < b.s; });

    SummaryDiff out;
    out.columns.resize(jobs.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        tasks.emplace_back([&, i] {
            const auto& job = jobs[i];
            auto& slot = out.columns[i];
            if (is_numeric(job.type)) {
                const auto a = read_numeric(src, job.s, job.type);
                const auto b = read_numeric(tgt, job.t, job.type);
                auto ra = value_range(a.values);
                auto rb = value_range(b.values);
                std::pair<double, double> range;
                if (a.values.empty()) {
                    range = rb;
                } else if (b.values.empty()) {
                    range = ra;
                } else {
                    range = {std::min(ra.first, rb.first), std::max(ra.second, rb.second)};
                }
                slot.source = numeric_profile(src, job.s, job.type, a, range, kDefaultBins);
                slot.target = numeric_profile(tgt, job.t, job.type, b, range, kDefaultBins);
            } else if (job.type == ValueType::DateTime) {
                const auto a = read_temporal(src, job.s);
                const auto b = read_temporal(tgt, job.t);
                int lo = std::numeric_limits<int>::max();
                int hi = std::numeric_limits<int>::min();
                for (const auto* m : {&a.months, &b.months}) {
                    for (int x : *m) {
                        lo = std::min(lo, x);
                        hi = std::max(hi, x);
                    }
                }
                const Granularity g = lo <= hi ? granularity_for(lo, hi) : Granularity::Month;
                slot.source = temporal_profile(src, job.s, a, g);
                slot.target = temporal_profile(tgt, job.t, b, g);
            } else {
                slot.source = frequency_profile(src, job.s, job.type, kTopValues);
                slot.target = frequency_profile(tgt, job.t, job.type, kTopValues);
            }
            // Deltas are keyed by the source-side name.
            slot.delta = compare_profiles(slot.source, slot.target);
            slot.delta.column = slot.source.column;
        });
    }
    if (runner) {
        runner(tasks);
    } else {
        for (auto& t : tasks) t();
    }
    return out;
}

} // namespace driftdiff::profile

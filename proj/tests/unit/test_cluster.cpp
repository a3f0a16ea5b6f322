// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "oracles.hpp"

using namespace driftdiff;
using namespace driftdiff::cluster;
using datadiff::FeatureVector;

namespace {

datadiff::CellDiff cell(std::string key, std::string column, std::string_view a, std::string_view b, ValueType t) {
    auto d = datadiff::diff_raw(a, b, column, t);
    REQUIRE(d);
    d->key = RowKey{{std::move(key)}};
    return *d;
}

std::vector<std::string> names(const std::vector<StaticPattern>& ps) {
    std::vector<std::string> out;
    for (auto p : ps) out.emplace_back(to_string(p));
    return out;
}

/// Five tight blobs around centers at least 1.0 apart, shuffled.
std::vector<FeatureVector> blob_fixture(std::mt19937_64& rng, std::size_t n) {
    std::vector<FeatureVector> centers(5);
    for (std::size_t c = 0; c < 5; ++c) {
        centers[c].fill(0.0);
        centers[c][c] = 1.0;
    }
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto v = centers[rng() % 5];
        for (auto& x : v) x = std::clamp(x + noise(rng), 0.0, 1.0);
        out.push_back(v);
    }
    return out;
}

} // namespace

TEST_CASE("static_classify") {
    CHECK(names(static_classify(cell("1", "p", "3.14159", "3.14", ValueType::Float))) ==
          std::vector<std::string>{"Rounding"});
    CHECK(names(static_classify(cell("1", "p", "3.14159", "3.14", ValueType::Text))) ==
          std::vector<std::string>{"Rounding", "Truncation"});
    CHECK(static_classify(cell("1", "n", "10", "17", ValueType::Integer)).empty());
    CHECK(names(static_classify(cell("1", "n", "5", "", ValueType::Integer))) ==
          std::vector<std::string>{"NullInflation"});
    CHECK(names(static_classify(cell("1", "n", "", "5", ValueType::Integer))) ==
          std::vector<std::string>{"NullDeflation"});
    CHECK(names(static_classify(cell("1", "n", "5", "x5", ValueType::Integer))) ==
          std::vector<std::string>{"TypeMismatch"});
    CHECK(names(static_classify(cell("1", "n", "1234", "2134", ValueType::Integer))) ==
          std::vector<std::string>{"Transposition"});
    CHECK(names(static_classify(cell("1", "n", "42", "0042", ValueType::Integer))) ==
          std::vector<std::string>{"ZeroPadding"});
    CHECK(names(static_classify(cell("1", "t", "2021-01-01T00:00:00", "2021-01-01T02:00:00", ValueType::DateTime))) ==
          std::vector<std::string>{"TimeZoneShift"});
}

TEST_CASE("stream_insert") {
    StreamState s;
    FeatureVector a{};
    a[0] = 1.0;
    CHECK(stream_insert(s, a, "c") == 0);
    CHECK(stream_insert(s, a, "d") == 0);
    REQUIRE(s.clusters.size() == 1);
    CHECK(s.clusters[0].weight == 2);
    CHECK(s.clusters[0].centroid == a);
    CHECK(s.clusters[0].column_set == std::vector<std::string>{"c", "d"});

    FeatureVector b = a;
    b[7] = 0.5;
    double d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::sqrt(d2) == doctest::Approx(0.5));
    CHECK(distance(a, b) == doctest::Approx(0.5));
    CHECK(stream_insert(s, b, "c") == 1);
    CHECK(s.clusters.size() == 2);
}

TEST_CASE("merge_states") {
    StreamState x;
    FeatureVector a{};
    a[1] = 1.0;
    stream_insert(x, a, "c");
    auto same = merge_states(x, StreamState{});
    CHECK(same.state == x);
    CHECK(same.remap.empty());

    StreamState y;
    stream_insert(y, a, "d");
    stream_insert(y, a, "d");
    auto merged = merge_states(x, y);
    REQUIRE(merged.state.clusters.size() == 1);
    CHECK(merged.state.clusters[0].weight == 3);
    CHECK(merged.remap == std::vector<std::uint32_t>{0});
    CHECK(merged.state.clusters[0].column_set == std::vector<std::string>{"c", "d"});
}

TEST_CASE("split and merge yields the sequential partition on 100 vectors") {
    std::mt19937_64 rng(12);
    for (int fixture = 0; fixture < 10; ++fixture) {
        const auto vs = blob_fixture(rng, 100);
        StreamState seq;
        std::vector<std::uint32_t> seq_ids;
        for (const auto& v : vs) seq_ids.push_back(stream_insert(seq, v, "c"));

        for (std::size_t split : {std::size_t{1}, std::size_t{37}, std::size_t{50}, std::size_t{99}}) {
            StreamState left, right;
            std::vector<std::uint32_t> ids;
            for (std::size_t i = 0; i < split; ++i) ids.push_back(stream_insert(left, vs[i], "c"));
            std::vector<std::uint32_t> right_ids;
            for (std::size_t i = split; i < vs.size(); ++i) right_ids.push_back(stream_insert(right, vs[i], "c"));
            auto merged = merge_states(left, right);
            for (auto id : right_ids) ids.push_back(merged.remap[id]);
            CHECK(oracle::canonical_partition(ids) == oracle::canonical_partition(seq_ids));
        }
    }
}

TEST_CASE("assign and merge_assignments match a single assign") {
    std::vector<datadiff::CellDiff> diffs;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto key = std::to_string(1000 + i);
        switch (rng() % 4) {
            case 0: diffs.push_back(cell(key, "cat", "alpha", "A1", ValueType::Text)); break;
            case 1: diffs.push_back(cell(key, "qty", std::to_string(i), std::to_string(i * 10 + 7), ValueType::Integer)); break;
            case 2: diffs.push_back(cell(key, "price", "1.23456", "1.23", ValueType::Float)); break;
            default: diffs.push_back(cell(key, "doc", "{\"a\":1,\"b\":2}", "{\"a\":1,\"b\":2,\"c\":3}", ValueType::Json)); break;
        }
    }
    auto whole = assign(diffs);
    for (std::size_t split : {std::size_t{10}, std::size_t{50}, std::size_t{90}}) {
        std::vector<datadiff::CellDiff> a(diffs.begin(), diffs.begin() + split);
        std::vector<datadiff::CellDiff> b(diffs.begin() + split, diffs.end());
        auto left = assign(a);
        merge_assignments(left, assign(b));
        CHECK(cluster_ids_per_diff(left) == cluster_ids_per_diff(whole));
        CHECK(finalize_clusters(left, diffs) == finalize_clusters(whole, diffs));
    }
}

TEST_CASE("finalize_clusters") {
    SUBCASE("ten rounding diffs") {
        std::vector<datadiff::CellDiff> diffs;
        for (int i = 0; i < 10; ++i) diffs.push_back(cell(std::to_string(i), "p", "1.2345", "1.23", ValueType::Float));
        auto clusters = finalize_clusters(assign(diffs), diffs);
        REQUIRE(clusters.size() == 1);
        CHECK(clusters[0].id == "S:Rounding");
        CHECK(clusters[0].kind == ClusterKind::Static);
        CHECK(clusters[0].member_count == 10);
        CHECK(clusters[0].purity == 1.0);
        CHECK(clusters[0].entropy == 0.0);
        CHECK(clusters[0].samples == std::vector<std::size_t>{0, 1, 2, 3, 4});
        CHECK(clusters[0].candidate_patterns == std::vector<std::string>{"Rounding"});
    }
    SUBCASE("multi-pattern diffs sit in every matching static cluster") {
        std::vector<datadiff::CellDiff> diffs = {cell("1", "p", "3.14159", "3.14", ValueType::Text)};
        auto a = assign(diffs);
        auto clusters = finalize_clusters(a, diffs);
        REQUIRE(clusters.size() == 2);
        CHECK(cluster_ids_per_diff(a)[0] == std::vector<std::string>{"S:Rounding", "S:Truncation"});
    }
    SUBCASE("coverage and bounds") {
        std::vector<datadiff::CellDiff> diffs;
        std::mt19937_64 rng(5);
        const std::vector<std::tuple<std::string, std::string, ValueType>> pairs = {
            {"abc", "abd", ValueType::Text}, {"5", "", ValueType::Integer}, {"10", "99", ValueType::Integer},
            {"2.5", "2.75", ValueType::Float}, {"[1]", "[2]", ValueType::Json}, {"x", "X", ValueType::Text}};
        for (int i = 0; i < 200; ++i) {
            const auto& [a, b, t] = pairs[rng() % pairs.size()];
            diffs.push_back(cell(std::to_string(i), "c" + std::to_string(rng() % 3), a, b, t));
        }
        auto asg = assign(diffs);
        auto per = cluster_ids_per_diff(asg);
        for (const auto& ids : per) CHECK_FALSE(ids.empty());
        for (const auto& c : finalize_clusters(asg, diffs)) {
            CHECK(c.purity >= 0.0);
            CHECK(c.purity <= 1.0);
            CHECK((c.entropy == 0.0) == (c.purity == 1.0));
            CHECK(c.samples.size() == std::min<std::size_t>(5, c.members.size()));
        }
    }
}

TEST_CASE("purity and entropy") {
    using K = datadiff::DetailKind;
    std::vector<K> kinds = {K::StringEdit, K::StringEdit, K::StringEdit, K::StringEdit,
                            K::IntDelta,   K::IntDelta,   K::IntDelta,   K::IntDelta};
    CHECK(purity_of(kinds) == 0.5);
    CHECK(entropy_of(kinds) == doctest::Approx(oracle::entropy({4, 4})));
    CHECK(entropy_of(kinds) == doctest::Approx(1.0));
    CHECK(entropy_of({K::FloatDelta, K::FloatDelta, K::NullChange}) == doctest::Approx(oracle::entropy({2, 1})));
}

TEST_CASE("cluster id order and row signatures") {
    CHECK(cluster_id_less("D:2", "D:10"));
    CHECK(cluster_id_less("D:10", "S:Rounding"));
    CHECK(cluster_id_less("S:Rounding", "S:Truncation"));

    RowKey r1{{"1"}};
    RowKey r2{{"2"}};
    auto sig = aggregate_rows({{r1, "S:Rounding"}, {r1, "D:1"}, {r2, "D:1"}, {r2, "D:1"}});
    REQUIRE(sig.size() == 2);
    CHECK(sig[0].signature == std::vector<std::string>{"D:1", "S:Rounding"});
    CHECK(sig[1].signature == std::vector<std::string>{"D:1"});
    CHECK(aggregate_rows({}).empty());
}

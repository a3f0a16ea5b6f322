// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "driftdiff/edit_distance.hpp"

using namespace driftdiff;

namespace {

std::string random_word(std::mt19937_64& rng, std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += static_cast<char>('a' + rng() % 26);
    return s;
}

void BM_Levenshtein(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto len = static_cast<std::size_t>(state.range(0));
    const auto a = random_word(rng, len);
    auto b = a;
    for (std::size_t i = 0; i < len; i += 5) b[i] = 'z';
    for (auto _ : state) benchmark::DoNotOptimize(datadiff::levenshtein(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Levenshtein)->RangeMultiplier(4)->Range(8, 512)->Complexity();

void BM_DiffRaw(benchmark::State& state) {
    const std::vector<std::pair<std::string, ValueType>> cases = {
        {"1234.5678", ValueType::Float}, {"2024-03-01T10:00:00Z", ValueType::DateTime},
        {"Customer Name", ValueType::Text}, {"42", ValueType::Integer}};
    const std::vector<std::string> changed = {"1234.57", "2024-03-01", "CUSTOMER NAME", "43"};
    const std::string column = "c";
    for (auto _ : state) {
        for (std::size_t i = 0; i < cases.size(); ++i)
            benchmark::DoNotOptimize(datadiff::diff_raw(cases[i].first, changed[i], column, cases[i].second));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cases.size()));
}
BENCHMARK(BM_DiffRaw);

void BM_StreamInsert(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> noise(-0.02, 0.02);
    std::vector<datadiff::FeatureVector> vs(4096);
    for (auto& v : vs) {
        v = {};
        v[rng() % 7] = 1.0;
        for (auto& x : v) x = std::clamp(x + noise(rng), 0.0, 1.0);
    }
    const std::string column = "c";
    for (auto _ : state) {
        cluster::StreamState s;
        for (const auto& v : vs) benchmark::DoNotOptimize(cluster::stream_insert(s, v, column));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * vs.size()));
}
BENCHMARK(BM_StreamInsert);

} // namespace

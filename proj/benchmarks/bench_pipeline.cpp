// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "driftdiff/engine.hpp"
#include "driftdiff/synthetic.hpp"

using namespace driftdiff;
namespace fs = std::filesystem;

namespace {

// Generated once per size and kept for the whole process.
const synthetic::SyntheticFiles& dataset(std::uint64_t rows) {
    static std::map<std::uint64_t, synthetic::SyntheticFiles> cache;
    auto it = cache.find(rows);
    if (it != cache.end()) return it->second;
    const auto dir = fs::temp_directory_path() / ("driftdiff-bench-" + std::to_string(rows));
    synthetic::SyntheticSpec spec;
    spec.rows = rows;
    spec.diff_rate = 0.01;
    return cache.emplace(rows, synthetic::generate_synthetic(spec, dir)).first->second;
}

void BM_Pipeline(benchmark::State& state) {
    const auto& files = dataset(static_cast<std::uint64_t>(state.range(0)));
    engine::JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(files.source);
    cfg.target = ingest::SourceDescriptor::file(files.target);
    cfg.key = KeySpec::primary({"id"});
    cfg.workers = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(engine::run_job(cfg));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Pipeline)
    ->ArgsProduct({{10'000, 100'000}, {1, 4}})
    ->ArgNames({"rows", "workers"})
    ->Unit(benchmark::kMillisecond)
    ->Iterations(2);

} // namespace
BENCHMARK_MAIN();

// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace driftdiff::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitDifferences = 1;
inline constexpr int kExitError = 2;

/// Entry point behind the `driftdiff` binary. Never throws; errors print to
/// `err` and return kExitError.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchRow {
    std::uint64_t rows = 0;
    std::uint64_t diffs = 0;
    std::uint64_t clusters = 0;
    double sequential_seconds = 0; // mean over runs, differencing phase
    double parallel_seconds = 0;
    double speedup = 0;
    double scaling = 0; // (t / t_smallest) / (rows / rows_smallest)
    bool identical_reports = false;
    std::size_t parallel_workers = 0;
};

struct BenchOptions {
    std::vector<std::uint64_t> sizes = {100'000, 1'000'000};
    double diff_rate = 0.01;
    std::uint64_t seed = 42;
    std::size_t runs = 1;
    std::size_t parallel_workers = 0; // 0 = auto
    bool label = true;
    std::filesystem::path workdir;
};

/// Generates each size, runs it sequentially (one worker) and in parallel,
/// and fills one row per size.
std::vector<BenchRow> run_bench(const BenchOptions& options);

nlohmann::json bench_to_json(const std::vector<BenchRow>& rows);
std::string bench_table(const std::vector<BenchRow>& rows);

} // namespace driftdiff::cli

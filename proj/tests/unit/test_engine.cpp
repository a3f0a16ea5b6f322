// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <random>

#include <doctest.h>

#include "driftdiff/engine.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/labeler_clients.hpp"
#include "driftdiff/report.hpp"
#include "driftdiff/synthetic.hpp"
#include "support.hpp"

using namespace driftdiff;
using namespace driftdiff::engine;
namespace fs = std::filesystem;

namespace {

std::vector<datadiff::AlignedRow> keys(std::size_t n) {
    std::vector<datadiff::AlignedRow> out;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04zu", i);
        out.push_back({RowKey{{buf}}, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)});
    }
    return out;
}

JobConfig synthetic_job(const fs::path& dir, std::uint64_t rows, std::uint64_t seed = 42) {
    synthetic::SyntheticSpec spec;
    spec.rows = rows;
    spec.diff_rate = 0.05;
    spec.seed = seed;
    const auto files = synthetic::generate_synthetic(spec, dir / "data");
    JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(files.source);
    cfg.target = ingest::SourceDescriptor::file(files.target);
    cfg.key = KeySpec::primary({"id"});
    cfg.seed = seed;
    return cfg;
}

/// A diff with one row per batch boundary, built from two small CSVs.
struct SmallTables {
    ingest::TableSnapshot src, tgt;
    schema::MappingSet mapping;
    std::vector<datadiff::AlignedRow> union_keys;
    std::vector<datadiff::ColumnPair> pairs;

    SmallTables() {
        std::mt19937_64 rng(4);
        ingest::SnapshotBuilder a({"id", "amount", "city"});
        ingest::SnapshotBuilder b({"id", "amount", "city"});
        for (int i = 0; i < 60; ++i) {
            const auto id = std::to_string(1000 + i);
            std::vector<std::string> row = {id, std::to_string(rng() % 100) + ".25", "c" + std::to_string(i % 7)};
            a.add_row(std::span<const std::string>(row));
            if (i % 9 == 0) row[1] = "0.5";
            if (i % 11 == 0) row[2] = "CITY";
            if (i % 13 != 5) b.add_row(std::span<const std::string>(row));
        }
        std::vector<std::string> extra = {"2000", "1.5", "x"};
        b.add_row(std::span<const std::string>(extra));
        src = a.finish(SourceKind::File, "a");
        tgt = b.finish(SourceKind::File, "b");
        for (const auto& c : src.schema().columns) mapping.mappings.push_back({c.name, c.name});
        const auto key = KeySpec::primary({"id"});
        union_keys = datadiff::align_union(src, tgt, key, mapping);
        pairs = datadiff::column_pairs(src.schema(), tgt.schema(), mapping, key);
    }
};

} // namespace

TEST_CASE("plan_batches") {
    auto b = plan_batches(keys(10), 4);
    REQUIRE(b.size() == 3);
    CHECK(b[0].end - b[0].begin == 4);
    CHECK(b[1].end - b[1].begin == 4);
    CHECK(b[2].end - b[2].begin == 2);
    CHECK(b[0].low == RowKey{{"0000"}});
    CHECK(b[0].high == RowKey{{"0004"}});
    CHECK_FALSE(b[2].high);

    CHECK(plan_batches(keys(5), 100).size() == 1);
    CHECK(plan_batches(keys(0), 3).empty());
    CHECK_THROWS_AS(plan_batches(keys(3), 0), Error);

    // Ranges tile the key space without overlap.
    for (std::size_t size : {1u, 3u, 7u, 50u}) {
        auto ranges = plan_batches(keys(37), size);
        std::size_t next = 0;
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            CHECK(ranges[i].index == i);
            CHECK(ranges[i].begin == next);
            next = ranges[i].end;
        }
        CHECK(next == 37);
    }
}

TEST_CASE("batch size and executor selection") {
    CHECK(resolve_batch_size(0, 10'000) == kSmallBatch);
    CHECK(resolve_batch_size(0, 5'000'000) == kLargeBatch);
    CHECK(resolve_batch_size(77, 5'000'000) == 77);

    CHECK(select_executor(50'000, 2, 0, 8) == Executor{Executor::Kind::Inline, 1});
    CHECK(select_executor(1'000'000, 40, 0, 8) == Executor{Executor::Kind::Pool, 8});
    CHECK(select_executor(1'000'000, 3, 0, 8) == Executor{Executor::Kind::Pool, 3});
    CHECK(select_executor(50'000, 2, 2, 8) == Executor{Executor::Kind::Pool, 2});
}

TEST_CASE("worker pool runs every task") {
    WorkerPool pool(3);
    std::atomic<int> n{0};
    for (int i = 0; i < 100; ++i) pool.submit([&] { ++n; });
    pool.wait();
    CHECK(n == 100);
    CHECK(pool.size() == 3);
}

TEST_CASE("merge_results") {
    SmallTables t;
    const auto batches = plan_batches(t.union_keys, 8);
    std::vector<TaskResult> results;
    for (const auto& b : batches) results.push_back(run_batch(t.src, t.tgt, t.union_keys, b, t.pairs, 0.5));

    auto sequential = merge_results(results, batches.size(), 0.5);
    auto shuffled = results;
    std::mt19937_64 rng(1);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto permuted = merge_results(shuffled, batches.size(), 0.5);
    CHECK(permuted.cells == sequential.cells);
    CHECK(permuted.added == sequential.added);
    CHECK(permuted.removed == sequential.removed);
    CHECK(cluster::cluster_ids_per_diff(permuted.assignment) == cluster::cluster_ids_per_diff(sequential.assignment));

    auto missing = results;
    missing.pop_back();
    try {
        merge_results(missing, batches.size(), 0.5);
        FAIL("expected MissingBatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingBatch);
    }

    // One batch over everything equals the split run.
    const auto whole = plan_batches(t.union_keys, t.union_keys.size());
    auto single = merge_results({run_batch(t.src, t.tgt, t.union_keys, whole[0], t.pairs, 0.5)}, 1, 0.5);
    CHECK(single.cells == sequential.cells);
    CHECK(single.removed.size() == 5);
    CHECK(single.added == std::vector<RowKey>{RowKey{{"2000"}}});
    CHECK(cluster::finalize_clusters(single.assignment, single.cells) ==
          cluster::finalize_clusters(sequential.assignment, sequential.cells));
}

TEST_CASE("checkpoints") {
    driftdiff::testing::TempDir ws;
    const nlohmann::json artifact = {{"cells", {1, 2, 3}}, {"name", "x"}};
    auto cp = checkpoint_stage(Stage::DataDiffed, artifact, "hash-a", ws.path());
    CHECK(fs::exists(cp.path));
    CHECK(cp.path == checkpoint_path(ws.path(), Stage::DataDiffed));
    CHECK(read_checkpoint(Stage::DataDiffed, "hash-a", ws.path()) == artifact);
    CHECK_FALSE(read_checkpoint(Stage::DataDiffed, "hash-b", ws.path()));
    CHECK_FALSE(read_checkpoint(Stage::Profiled, "hash-a", ws.path()));

    {
        auto text = driftdiff::testing::read_file(cp.path);
        std::ofstream out(cp.path, std::ios::binary | std::ios::trunc);
        out << text.substr(0, text.size() / 2);
    }
    try {
        read_checkpoint(Stage::DataDiffed, "hash-a", ws.path());
        FAIL("expected CorruptCheckpoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptCheckpoint);
    }
    CHECK_FALSE(restore_stage(Stage::DataDiffed, "hash-a", ws.path()));
}

TEST_CASE("input hash tracks configuration and inputs") {
    driftdiff::testing::TempDir dir;
    auto cfg = synthetic_job(dir.path(), 200);
    const auto h = input_hash(cfg, "mock");
    CHECK(h == input_hash(cfg, "mock"));
    CHECK(h != input_hash(cfg, "http://x"));
    auto other = cfg;
    other.threshold = 0.7;
    CHECK(h != input_hash(other, "mock"));
    // Runtime-only knobs do not invalidate checkpoints.
    auto workers = cfg;
    workers.workers = 4;
    CHECK(h == input_hash(workers, "mock"));
    std::ofstream(cfg.target.path, std::ios::app) << "";
    CHECK(h == input_hash(cfg, "mock"));
    std::ofstream(cfg.target.path, std::ios::app) << "999999,x\n";
    CHECK(h != input_hash(cfg, "mock"));
}

TEST_CASE("reruns restore every stage and reproduce the report") {
    driftdiff::testing::TempDir dir;
    auto cfg = synthetic_job(dir.path(), 600);
    cfg.workspace = dir / "ws";
    label::MockLabelerClient mock;
    auto first = run_job(cfg, &mock);
    for (const auto& s : first.stats.stages) CHECK_FALSE(s.restored);
    CHECK(first.stats.stages.size() == kStageCount);

    auto second = run_job(cfg, &mock);
    REQUIRE(second.stats.stages.size() == kStageCount);
    for (const auto& s : second.stats.stages) CHECK(s.restored);
    CHECK(report::render_json(first.report) == report::render_json(second.report));

    fs::remove_all(cfg.workspace / "checkpoints");
    auto third = run_job(cfg, &mock);
    CHECK(report::render_json(first.report) == report::render_json(third.report));

    // A corrupted checkpoint is recomputed.
    std::ofstream(checkpoint_path(cfg.workspace, Stage::Clustered), std::ios::trunc) << "{";
    auto fourth = run_job(cfg, &mock);
    CHECK(report::render_json(first.report) == report::render_json(fourth.report));
}

TEST_CASE("worker count does not change the report") {
    driftdiff::testing::TempDir dir;
    auto cfg = synthetic_job(dir.path(), 3000, 9);
    cfg.batch_size = 250;
    label::MockLabelerClient mock;
    std::string reference;
    for (std::size_t w : {1u, 2u, 4u, 8u}) {
        cfg.workers = w;
        auto r = run_job(cfg, &mock);
        CHECK(r.stats.executor.workers == w);
        CHECK(r.stats.batch_count == 12);
        const auto text = report::render_json(r.report);
        if (reference.empty()) reference = text;
        CHECK(text == reference);
    }
}

TEST_CASE("peak batch memory follows the batch size, not the input size") {
    driftdiff::testing::TempDir dir;
    label::MockLabelerClient mock;
    auto small = synthetic_job(dir / "s", 2000, 5);
    auto large = synthetic_job(dir / "l", 8000, 5);
    small.batch_size = large.batch_size = 500;
    small.labeling.enabled = large.labeling.enabled = false;
    const auto a = run_job(small, &mock).stats.peak_batch_bytes;
    const auto b = run_job(large, &mock).stats.peak_batch_bytes;
    REQUIRE(a > 0);
    CHECK(static_cast<double>(b) / static_cast<double>(a) < 1.5);
}

TEST_CASE("added and removed rows reach the report") {
    driftdiff::testing::TempDir dir;
    const auto a = driftdiff::testing::write_file(dir / "a.csv", "id,v\n1,x\n2,y\n3,z\n4,w\n");
    const auto b = driftdiff::testing::write_file(dir / "b.csv", "id,v\n2,y\n3,Z\n4,w\n5,q\n6,r\n");
    JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(a);
    cfg.target = ingest::SourceDescriptor::file(b);
    cfg.key = KeySpec::primary({"id"});
    for (std::size_t batch : {1u, 2u, 100u}) {
        cfg.batch_size = batch;
        const auto r = run_job(cfg).report;
        CHECK(r.removed_keys == std::vector<RowKey>{RowKey{{"1"}}});
        CHECK(r.added_keys == std::vector<RowKey>{RowKey{{"5"}}, RowKey{{"6"}}});
        CHECK(r.rows == report::RowCounts{2, 1, 1});
        REQUIRE(r.cells.size() == 1);
        CHECK(r.cells[0].key == RowKey{{"3"}});
    }
}

TEST_CASE("job failures carry their codes") {
    driftdiff::testing::TempDir dir;
    JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(dir / "missing.csv");
    cfg.target = ingest::SourceDescriptor::file(dir / "missing.csv");
    try {
        run_job(cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnreadableSource);
    }

    auto ok = synthetic_job(dir.path(), 100);
    ok.key = KeySpec::primary({"nope"});
    CHECK_THROWS_AS(run_job(ok), Error);
}

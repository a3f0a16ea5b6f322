// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "driftdiff/engine.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/labeler_clients.hpp"
#include "driftdiff/report.hpp"
#include "driftdiff/serialize.hpp"
#include "driftdiff/synthetic.hpp"
#include "support.hpp"

using namespace driftdiff;
using namespace driftdiff::report;
namespace fs = std::filesystem;

namespace {

struct Run {
    synthetic::GroundTruthLedger ledger;
    Report report;
};

Run synthetic_run(const fs::path& dir, std::uint64_t rows, double rate, std::uint64_t seed) {
    synthetic::SyntheticSpec spec;
    spec.rows = rows;
    spec.diff_rate = rate;
    spec.seed = seed;
    const auto files = synthetic::generate_synthetic(spec, dir);
    engine::JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(files.source);
    cfg.target = ingest::SourceDescriptor::file(files.target);
    cfg.key = KeySpec::primary({"id"});
    cfg.seed = seed;
    label::MockLabelerClient mock;
    return {synthetic::GroundTruthLedger::load(files.ledger), engine::run_job(cfg, &mock).report};
}

/// One rounding cell under a single cluster with the given labels.
Report single_cell_report(std::vector<std::string> labels) {
    Report r;
    r.job = {{"seed", std::uint64_t{7}}};
    r.source_rows = r.target_rows = 10;
    auto d = datadiff::diff_raw("1.2345", "1.23", "price", ValueType::Float);
    d->key = RowKey{{"3"}};
    r.cells = {*d};
    r.rows.modified = 1;
    r.cell_clusters = {{"S:Rounding"}};
    cluster::Cluster c;
    c.id = "S:Rounding";
    c.kind = cluster::ClusterKind::Static;
    c.member_count = 1;
    c.members = {0};
    c.samples = {0};
    c.columns = {"price"};
    c.purity = 1.0;
    r.clusters = {c};
    label::LabelJudgment j;
    for (auto& l : labels) j.labels.push_back({l, ""});
    j.confidence = 0.8;
    r.judgments = {j};
    return r;
}

synthetic::GroundTruthLedger single_entry_ledger() {
    synthetic::GroundTruthLedger g;
    g.seed = 7;
    g.rows = 10;
    g.entries = {{RowKey{{"3"}}, "price", synthetic::Family::Rounding, "1.2345", "1.23"}};
    return g;
}

} // namespace

TEST_CASE("identical inputs give an empty report") {
    driftdiff::testing::TempDir dir;
    synthetic::SyntheticSpec spec;
    spec.rows = 50;
    spec.diff_rate = 0;
    const auto files = synthetic::generate_synthetic(spec, dir.path());
    engine::JobConfig cfg;
    cfg.source = ingest::SourceDescriptor::file(files.source);
    cfg.target = ingest::SourceDescriptor::file(files.source);
    cfg.key = KeySpec::primary({"id"});
    auto r = engine::run_job(cfg).report;
    CHECK(r.cells.empty());
    CHECK(r.clusters.empty());
    CHECK(r.rows == RowCounts{});
    CHECK(exit_code(r) == 0);
    CHECK(render_markdown(r).find("0 clusters.") != std::string::npos);
    const auto j = nlohmann::json::parse(render_json(r));
    CHECK(j["cell_diff_count"] == 0);
    CHECK(j["clusters"].empty());
}

TEST_CASE("rendering") {
    driftdiff::testing::TempDir dir;
    auto run = synthetic_run(dir.path(), 1000, 0.05, 3);
    const auto& r = run.report;
    CHECK(exit_code(r) == 1);

    const auto text = render_json(r);
    CHECK(text == render_json(r));
    CHECK(serialize::canonical_dump(nlohmann::json::parse(text)) == text);
    CHECK(render_markdown(r) == render_markdown(r));

    // Counts agree across the document.
    const auto j = nlohmann::json::parse(text);
    CHECK(j["cell_diff_count"] == r.cells.size());
    CHECK(j["diffs"]["cells"].size() == r.cells.size());
    std::uint64_t members = 0;
    for (const auto& c : j["clusters"]) members += c["member_count"].get<std::uint64_t>();
    CHECK(members >= r.cells.size());
    std::uint64_t grouped = 0;
    for (const auto& g : j["row_groups"]) grouped += g["row_count"].get<std::uint64_t>();
    CHECK(grouped == r.rows.modified);
    CHECK(r.judgments.size() == r.clusters.size());

    write_reports(r, dir / "out", Format::Both);
    CHECK(driftdiff::testing::read_file(dir / "out" / "report.json") == text);
    CHECK(fs::exists(dir / "out" / "report.md"));
    write_reports(r, dir / "json-only", Format::Json);
    CHECK_FALSE(fs::exists(dir / "json-only" / "report.md"));
}

TEST_CASE("multi-label headings") {
    auto r = single_cell_report({"Rounding", "Truncation"});
    CHECK(render_markdown(r).find("### Rounding:Truncation") != std::string::npos);
}

TEST_CASE("evaluate") {
    driftdiff::testing::TempDir dir;
    auto run = synthetic_run(dir.path(), 2000, 0.05, 11);
    REQUIRE(run.ledger.entries.size() == 100);

    auto perfect = evaluate(run.report, run.ledger);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.true_positives == 100);
    CHECK(perfect.false_negatives == 0);

    auto suppressed = run.report;
    suppressed.cells.erase(suppressed.cells.begin());
    suppressed.cell_clusters.erase(suppressed.cell_clusters.begin());
    auto e = evaluate(suppressed, run.ledger);
    CHECK(e.precision == 1.0);
    CHECK(e.recall == doctest::Approx(0.99));
    CHECK(e.false_negatives == 1);

    auto bad_seed = run.ledger;
    bad_seed.seed = 12;
    try {
        evaluate(run.report, bad_seed);
        FAIL("expected SeedMismatch");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::SeedMismatch);
    }
}

TEST_CASE("extra predicted labels cost precision only") {
    auto gold = single_entry_ledger();
    auto exact = evaluate(single_cell_report({"Rounding"}), gold);
    CHECK(exact.macro_f1 == 1.0);

    auto extra = evaluate(single_cell_report({"Rounding", "Truncation"}), gold);
    REQUIRE(extra.per_label.count("Truncation"));
    CHECK(extra.per_label.at("Rounding").f1 == 1.0);
    CHECK(extra.per_label.at("Truncation").fp == 1);
    CHECK(extra.per_label.at("Truncation").precision == 0.0);
    CHECK(extra.macro_f1 == 1.0);

    auto wrong = evaluate(single_cell_report({"TypeCast"}), gold);
    CHECK(wrong.per_label.at("Rounding").fn == 1);
    CHECK(wrong.macro_f1 == 0.0);
}

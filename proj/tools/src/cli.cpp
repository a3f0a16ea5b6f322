// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff_cli/cli.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "driftdiff/engine.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/report.hpp"
#include "driftdiff/serialize.hpp"
#include "driftdiff/synthetic.hpp"

namespace driftdiff::cli {

namespace {

using nlohmann::json;

struct SharedFlags {
    std::string key;
    std::vector<std::string> maps;
    double threshold = schema::kDefaultThreshold;
    std::size_t batch_size = 0;
    std::size_t workers = 0;
    double radius = cluster::kDefaultRadius;
    bool label = true;
    std::string labeler_url;
    std::uint64_t seed = 0;
    std::string workspace = ".driftdiff";
    std::string format = "both";
    std::string config;
    bool remember = false;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

KeySpec parse_key(const std::string& text) {
    auto cols = split_list(text);
    if (cols.empty()) return KeySpec::surrogate();
    if (cols.size() == 1) return KeySpec::primary(std::move(cols));
    return KeySpec::composite(std::move(cols));
}

// Config-file values become defaults; flags given on the command line win
// because CLI11 parses after this runs.
void apply_config_file(const std::string& path, SharedFlags& f) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file " + path);
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidConfig, "config file is not a JSON object");
    try {
        if (j.contains("key")) f.key = j["key"].is_array() ? [&] {
            std::string joined;
            for (const auto& c : j["key"]) joined += (joined.empty() ? "" : ",") + c.get<std::string>();
            return joined;
        }() : j["key"].get<std::string>();
        if (j.contains("map")) f.maps = j["map"].get<std::vector<std::string>>();
        if (j.contains("threshold")) f.threshold = j["threshold"].get<double>();
        if (j.contains("batch-size")) f.batch_size = j["batch-size"].get<std::size_t>();
        if (j.contains("workers")) f.workers = j["workers"].get<std::size_t>();
        if (j.contains("radius")) f.radius = j["radius"].get<double>();
        if (j.contains("label")) f.label = j["label"].get<bool>();
        if (j.contains("labeler-url")) f.labeler_url = j["labeler-url"].get<std::string>();
        if (j.contains("seed")) f.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workspace")) f.workspace = j["workspace"].get<std::string>();
        if (j.contains("format")) f.format = j["format"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
    }
}

void add_shared(CLI::App* app, SharedFlags& f) {
    app->add_option("--key", f.key, "Key column(s), comma separated; omit for a surrogate key");
    app->add_option("--map", f.maps, "Column override src=tgt (repeatable)");
    app->add_option("--threshold", f.threshold, "Mapping acceptance threshold")->check(CLI::Range(0.0, 1.0));
    app->add_option("--batch-size", f.batch_size, "Rows per batch (0 = auto)");
    app->add_option("--workers", f.workers, "Worker threads (0 = auto)");
    app->add_option("--radius", f.radius, "Dynamic clustering radius")->check(CLI::PositiveNumber);
    app->add_flag("--label,!--no-label", f.label, "Label clusters (default on)");
    app->add_option("--labeler-url", f.labeler_url, "HTTP labeler endpoint (default: built-in mock)");
    app->add_option("--seed", f.seed, "Seed for pseudonymization and synthetic data");
    app->add_option("--workspace", f.workspace, "Workspace directory");
    app->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "markdown", "both"}));
    app->add_option("--config", f.config, "JSON config file; flags override its values");
    app->add_flag("--remember", f.remember, "Store --map overrides in the workspace mapping memory");
}

engine::JobConfig job_from(const SharedFlags& f, engine::Modality modality, ingest::SourceDescriptor src,
                           ingest::SourceDescriptor tgt) {
    engine::JobConfig cfg;
    cfg.modality = modality;
    cfg.source = std::move(src);
    cfg.target = std::move(tgt);
    cfg.key = parse_key(f.key);
    cfg.threshold = f.threshold;
    for (const auto& m : f.maps) {
        auto o = schema::parse_override(m);
        if (!o) throw Error(ErrorCode::InvalidConfig, "--map expects src=tgt, got '" + m + "'");
        cfg.overrides.push_back(*o);
    }
    cfg.batch_size = f.batch_size;
    cfg.workers = f.workers;
    cfg.radius = f.radius;
    cfg.labeling.enabled = f.label;
    cfg.labeler_url = f.labeler_url;
    cfg.seed = f.seed;
    cfg.workspace = f.workspace;
    return cfg;
}

report::Format format_of(const std::string& s) {
    if (s == "json") return report::Format::Json;
    if (s == "markdown") return report::Format::Markdown;
    return report::Format::Both;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
    out << text;
}

void remember_overrides(const engine::JobConfig& cfg) {
    if (cfg.overrides.empty() || cfg.workspace.empty()) return;
    const auto src = ingest::read_snapshot(cfg.source);
    const auto tgt = ingest::read_snapshot(cfg.target);
    auto memory = schema::MappingMemory::load(cfg.workspace / "memory" / "mappings.json");
    std::filesystem::create_directories(cfg.workspace / "memory");
    for (const auto& o : cfg.overrides) memory = schema::record_correction(std::move(memory), o, src.schema(), tgt.schema());
}

int run_diff(const engine::JobConfig& cfg, const SharedFlags& f, std::ostream& out) {
    auto result = engine::run_job(cfg);
    const auto reports = cfg.workspace / "reports";
    report::write_reports(result.report, reports, format_of(f.format));
    write_text(reports / "timings.json", serialize::canonical_dump(result.stats.to_json()));
    if (f.remember) remember_overrides(cfg);
    const auto& r = result.report;
    out << "rows added " << r.rows.added << ", removed " << r.rows.removed << ", modified " << r.rows.modified
        << "; " << r.cells.size() << " cell differences in " << r.clusters.size() << " clusters\n";
    out << "reports written to " << reports.string() << "\n";
    return report::exit_code(r);
}

int run_eval(engine::JobConfig cfg, const SharedFlags& f, const synthetic::GroundTruthLedger& ledger,
             std::ostream& out) {
    cfg.labeling.enabled = false;
    auto rules = engine::run_job(cfg);
    auto rules_eval = report::evaluate(rules.report, ledger);
    cfg.labeling.enabled = true;
    auto full = engine::run_job(cfg);
    auto full_eval = report::evaluate(full.report, ledger);
    full.report.evaluation = full_eval;
    const auto reports = cfg.workspace / "reports";
    report::write_reports(full.report, reports, format_of(f.format));
    write_text(reports / "evaluation.json",
               serialize::canonical_dump({{"rules_only", report::to_json(rules_eval)}, {"full", report::to_json(full_eval)}}));
    char line[160];
    std::snprintf(line, sizeof line, "cell precision %.4f  recall %.4f\n", full_eval.precision, full_eval.recall);
    out << line;
    std::snprintf(line, sizeof line, "macro-F1  rules-only %.4f  full %.4f\n", rules_eval.macro_f1,
                  full_eval.macro_f1);
    out << line;
    return kExitClean;
}

std::vector<synthetic::Family> parse_families(const std::string& text) {
    if (text.empty()) return synthetic::all_families();
    if (text == "static") return synthetic::static_families();
    std::vector<synthetic::Family> out;
    for (const auto& name : split_list(text)) {
        auto f = synthetic::family_from_string(name);
        if (!f) throw Error(ErrorCode::InvalidConfig, "unknown family '" + name + "'");
        out.push_back(*f);
    }
    return out;
}

} // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
    std::vector<BenchRow> rows;
    for (auto size : options.sizes) {
        synthetic::SyntheticSpec spec;
        spec.rows = size;
        spec.diff_rate = options.diff_rate;
        spec.seed = options.seed;
        const auto files = synthetic::generate_synthetic(spec, options.workdir / std::to_string(size));
        engine::JobConfig cfg;
        cfg.source = ingest::SourceDescriptor::file(files.source);
        cfg.target = ingest::SourceDescriptor::file(files.target);
        cfg.key = KeySpec::primary({"id"});
        cfg.seed = options.seed;
        cfg.labeling.enabled = options.label;

        BenchRow row;
        row.rows = size;
        row.identical_reports = true;
        std::vector<double> seq;
        std::vector<double> par;
        for (std::size_t run = 0; run < std::max<std::size_t>(1, options.runs); ++run) {
            cfg.workers = 1;
            auto a = engine::run_job(cfg);
            cfg.workers = options.parallel_workers;
            auto b = engine::run_job(cfg);
            seq.push_back(a.stats.diff_seconds);
            par.push_back(b.stats.diff_seconds);
            row.parallel_workers = b.stats.executor.workers;
            row.diffs = a.report.cells.size();
            row.clusters = a.report.clusters.size();
            row.identical_reports = row.identical_reports && report::render_json(a.report) == report::render_json(b.report);
        }
        const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
        row.sequential_seconds = mean(seq);
        row.parallel_seconds = mean(par);
        row.speedup = row.parallel_seconds > 0 ? row.sequential_seconds / row.parallel_seconds : 0.0;
        rows.push_back(row);
    }
    if (!rows.empty()) {
        const auto& base = rows.front();
        for (auto& r : rows) {
            r.scaling = (base.sequential_seconds > 0 && base.rows > 0)
                            ? (r.sequential_seconds / base.sequential_seconds) /
                                  (static_cast<double>(r.rows) / static_cast<double>(base.rows))
                            : 0.0;
        }
    }
    return rows;
}

json bench_to_json(const std::vector<BenchRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"rows", r.rows},
                       {"diffs", r.diffs},
                       {"clusters", r.clusters},
                       {"sequential_seconds", r.sequential_seconds},
                       {"parallel_seconds", r.parallel_seconds},
                       {"parallel_workers", r.parallel_workers},
                       {"speedup", r.speedup},
                       {"scaling_coefficient", r.scaling},
                       {"identical_reports", r.identical_reports}});
    }
    return out;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof line, "%10s %8s %9s %12s %12s %8s %8s %10s\n", "rows", "diffs", "clusters",
                  "sequential_s", "parallel_s", "workers", "speedup", "scaling");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%10llu %8llu %9llu %12.3f %12.3f %8zu %8.3f %10.3f\n",
                      static_cast<unsigned long long>(r.rows), static_cast<unsigned long long>(r.diffs),
                      static_cast<unsigned long long>(r.clusters), r.sequential_seconds, r.parallel_seconds,
                      r.parallel_workers, r.speedup, r.scaling);
        out << line;
    }
    return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"driftdiff: schema-aware data differencing with clustered, labeled explanations"};
    app.require_subcommand(1);
    SharedFlags f;

    // A config file only seeds defaults, so it has to be read before parsing.
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            try {
                apply_config_file(args[i + 1], f);
            } catch (const Error& e) {
                err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
                return kExitError;
            }
        }
    }

    std::string source_path, target_path, database, target_database, source_table, target_table, source_sql,
        target_sql, ledger_path;
    auto* file_diff = app.add_subcommand("file-diff", "Compare two delimited or JSON-lines files");
    file_diff->add_option("source", source_path, "Source file")->required();
    file_diff->add_option("target", target_path, "Target file")->required();
    add_shared(file_diff, f);

    auto* source_diff = app.add_subcommand("source-diff", "Compare two tables of single-file databases");
    source_diff->add_option("database", database, "Database file")->required();
    source_diff->add_option("target-database", target_database, "Second database file (default: the first)");
    source_diff->add_option("--source-table", source_table, "Source table")->required();
    source_diff->add_option("--target-table", target_table, "Target table")->required();
    add_shared(source_diff, f);

    auto* query_diff = app.add_subcommand("query-diff", "Compare the result sets of two read-only queries");
    query_diff->add_option("database", database, "Database file")->required();
    query_diff->add_option("target-database", target_database, "Second database file (default: the first)");
    query_diff->add_option("--source-sql", source_sql, "Source query")->required();
    query_diff->add_option("--target-sql", target_sql, "Target query")->required();
    add_shared(query_diff, f);

    std::uint64_t gen_rows = 1000;
    double gen_rate = 0.01;
    std::string gen_out = "synthetic";
    std::string families;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic pair with a ground-truth ledger");
    gen->add_option("--rows", gen_rows, "Rows")->check(CLI::PositiveNumber);
    gen->add_option("--rate", gen_rate, "Fraction of rows with one mutated cell")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", f.seed, "Seed");
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--families", families, "Comma separated families, or 'static' (default: all 13)");

    auto* eval = app.add_subcommand("eval", "Score rules-only and full labeling against a ledger");
    eval->add_option("source", source_path, "Source file (omit with --rows to generate)");
    eval->add_option("target", target_path, "Target file");
    eval->add_option("--ledger", ledger_path, "Ground-truth ledger JSON");
    eval->add_option("--rows", gen_rows, "Generate this many rows into the workspace instead");
    eval->add_option("--rate", gen_rate, "Diff rate when generating")->check(CLI::Range(0.0, 1.0));
    eval->add_option("--families", families, "Families when generating");
    add_shared(eval, f);

    BenchOptions bench_opts;
    std::string sizes = "100000,1000000";
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Sequential vs parallel timing over synthetic sizes");
    bench->add_option("--sizes", sizes, "Comma separated row counts");
    bench->add_option("--rate", bench_opts.diff_rate, "Diff rate")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seed", bench_opts.seed, "Seed");
    bench->add_option("--runs", bench_opts.runs, "Runs per size and mode")->check(CLI::PositiveNumber);
    bench->add_option("--workers", bench_opts.parallel_workers, "Workers for the parallel mode (0 = auto)");
    bench->add_flag("--label,!--no-label", bench_opts.label, "Label clusters");
    bench->add_option("--workdir", bench_opts.workdir, "Where synthetic data is written")->required();
    bench->add_option("--out", bench_out, "Write the table as JSON here");

    std::vector<std::string> argv_rest;
    if (!args.empty()) argv_rest.assign(args.rbegin(), args.rend() - 1);
    try {
        app.parse(argv_rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitClean : kExitError;
    }

    try {
        if (file_diff->parsed()) {
            return run_diff(job_from(f, engine::Modality::FileDiff, ingest::SourceDescriptor::file(source_path),
                                     ingest::SourceDescriptor::file(target_path)),
                            f, out);
        }
        if (source_diff->parsed()) {
            const auto tdb = target_database.empty() ? database : target_database;
            return run_diff(job_from(f, engine::Modality::SourceDiff,
                                     ingest::SourceDescriptor::database_table(database, source_table),
                                     ingest::SourceDescriptor::database_table(tdb, target_table)),
                            f, out);
        }
        if (query_diff->parsed()) {
            const auto tdb = target_database.empty() ? database : target_database;
            return run_diff(job_from(f, engine::Modality::QueryDiff, ingest::SourceDescriptor::query(database, source_sql),
                                     ingest::SourceDescriptor::query(tdb, target_sql)),
                            f, out);
        }
        if (gen->parsed()) {
            synthetic::SyntheticSpec spec;
            spec.rows = gen_rows;
            spec.diff_rate = gen_rate;
            spec.seed = f.seed;
            spec.families = parse_families(families);
            const auto files = synthetic::generate_synthetic(spec, gen_out);
            const auto ledger = synthetic::GroundTruthLedger::load(files.ledger);
            out << "wrote " << files.source.string() << ", " << files.target.string() << " and "
                << ledger.entries.size() << " ledger entries\n";
            return kExitClean;
        }
        if (eval->parsed()) {
            std::filesystem::path src = source_path;
            std::filesystem::path tgt = target_path;
            std::filesystem::path led = ledger_path;
            if (src.empty()) {
                synthetic::SyntheticSpec spec;
                spec.rows = gen_rows;
                spec.diff_rate = gen_rate;
                spec.seed = f.seed;
                spec.families = parse_families(families);
                const auto files = synthetic::generate_synthetic(spec, std::filesystem::path(f.workspace) / "synthetic");
                src = files.source;
                tgt = files.target;
                led = files.ledger;
            } else if (tgt.empty() || led.empty()) {
                err << "error: eval needs SOURCE TARGET --ledger, or --rows to generate\n";
                return kExitError;
            }
            // Ledger keys always come from the synthetic layout's id column.
            if (f.key.empty()) f.key = "id";
            const auto ledger = synthetic::GroundTruthLedger::load(led);
            return run_eval(job_from(f, engine::Modality::FileDiff, ingest::SourceDescriptor::file(src),
                                     ingest::SourceDescriptor::file(tgt)),
                            f, ledger, out);
        }
        if (bench->parsed()) {
            bench_opts.sizes.clear();
            for (const auto& s : split_list(sizes)) bench_opts.sizes.push_back(std::stoull(s));
            const auto rows = run_bench(bench_opts);
            out << bench_table(rows);
            if (!bench_out.empty()) write_text(bench_out, bench_to_json(rows).dump(2) + "\n");
            return kExitClean;
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace driftdiff::cli

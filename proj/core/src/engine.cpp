// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <exception>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>

#include "driftdiff/error.hpp"
#include "driftdiff/hash.hpp"
#include "driftdiff/labeler_clients.hpp"
#include "driftdiff/profile.hpp"
#include "driftdiff/serialize.hpp"

namespace driftdiff::engine {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::array<std::string_view, kStageCount> kStageNames = {"Mapped",   "MetaDiffed", "DataDiffed",
                                                                   "Profiled", "Clustered",  "Labeled"};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t key_bytes(const RowKey& k) {
    std::size_t n = sizeof(RowKey);
    for (const auto& p : k.parts) n += sizeof(std::string) + p.size();
    return n;
}

std::size_t cell_bytes(const datadiff::CellDiff& d) {
    return sizeof(datadiff::CellDiff) + key_bytes(d.key) + d.column.size() + d.source_value.raw.size() +
           d.target_value.raw.size();
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidConfig, "workspace not writable: " + tmp.string());
        out << bytes;
        if (!out) throw Error(ErrorCode::InvalidConfig, "short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string memory_fingerprint(const std::filesystem::path& path) {
    const auto memory = schema::MappingMemory::load(path);
    std::vector<std::string> triples;
    for (const auto& e : memory.entries()) triples.push_back(e.source + '\x1f' + e.target + '\x1f' + e.fingerprint);
    std::sort(triples.begin(), triples.end());
    ContentHasher h;
    for (const auto& t : triples) h.update_field(t);
    return h.hex_digest();
}

std::string corpus_fingerprint(const std::filesystem::path& dir) {
    ContentHasher h;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) return h.hex_digest();
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir, ec)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        h.update_field(std::filesystem::relative(f, dir).generic_string());
        h.update_field(file_hash(f));
    }
    return h.hex_digest();
}

std::string describe_key(const KeySpec& key) {
    std::string out(to_string(key.mode));
    if (!key.columns.empty()) {
        out += '(';
        for (std::size_t i = 0; i < key.columns.size(); ++i) out += (i ? "," : "") + key.columns[i];
        out += ')';
    }
    return out;
}

std::string format_number(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

label::PackContext pack_context(const Schema& src, const Schema& tgt, const schema::MappingSet& mapping,
                                const KeySpec& key, const profile::SummaryDiff& summary) {
    label::PackContext ctx;
    ctx.key_spec = describe_key(key);
    for (const auto& m : mapping.mappings) {
        const auto* s = src.find(m.source_column);
        const auto* t = tgt.find(m.target_column);
        if (s && t)
            ctx.column_types[m.source_column] =
                std::string(to_string(s->value_type)) + "->" + std::string(to_string(t->value_type));
    }
    for (const auto& c : summary.columns) {
        auto& lines = ctx.column_stats[c.source.column];
        if (c.source.null_count != c.target.null_count)
            lines.push_back("nulls " + std::to_string(c.source.null_count) + "->" + std::to_string(c.target.null_count));
        if (c.delta.mean_shift && *c.delta.mean_shift != 0.0)
            lines.push_back("mean_shift " + format_number(*c.delta.mean_shift));
        if (!c.delta.emerging.empty()) lines.push_back("emerging values " + std::to_string(c.delta.emerging.size()));
        if (!c.delta.disappearing.empty())
            lines.push_back("disappearing values " + std::to_string(c.delta.disappearing.size()));
    }
    return ctx;
}

// Snapshots are read only when some stage has to be recomputed.
class Inputs {
public:
    explicit Inputs(const JobConfig& config) : config_(config) {}
    const ingest::TableSnapshot& source() {
        if (!src_) src_ = ingest::read_snapshot(config_.source);
        return *src_;
    }
    const ingest::TableSnapshot& target() {
        if (!tgt_) tgt_ = ingest::read_snapshot(config_.target);
        return *tgt_;
    }

private:
    const JobConfig& config_;
    std::optional<ingest::TableSnapshot> src_;
    std::optional<ingest::TableSnapshot> tgt_;
};

template <class F>
auto in_stage(Stage stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), "stage " + std::string(to_string(stage)) + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::StageFailed, "stage " + std::string(to_string(stage)) + ": " + e.what());
    }
}

} // namespace

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::FileDiff: return "FileDiff";
        case Modality::SourceDiff: return "SourceDiff";
        case Modality::QueryDiff: return "QueryDiff";
    }
    return "FileDiff";
}

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

json JobConfig::echo() const {
    json overrides_json = json::array();
    for (const auto& o : overrides) overrides_json.push_back(json::array({o.source, o.target}));
    return {{"modality", std::string(to_string(modality))},
            {"source", source.describe()},
            {"target", target.describe()},
            {"key", serialize::to_json(key)},
            {"threshold", threshold},
            {"overrides", overrides_json},
            {"batch_size", batch_size},
            {"radius", radius},
            {"labeling",
             {{"enabled", labeling.enabled},
              {"k", labeling.k},
              {"m", labeling.m},
              {"token_budget", labeling.token_budget}}},
            {"labeler", labeler_url.empty() ? std::string("mock") : labeler_url},
            {"seed", seed}};
}

std::size_t resolve_batch_size(std::size_t requested, std::size_t row_count) noexcept {
    if (requested > 0) return requested;
    return row_count <= kLargeJobRows ? kSmallBatch : kLargeBatch;
}

std::vector<Batch> plan_batches(const std::vector<datadiff::AlignedRow>& union_keys, std::size_t batch_size) {
    if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch size must be positive");
    std::vector<Batch> out;
    for (std::size_t begin = 0; begin < union_keys.size(); begin += batch_size) {
        Batch b;
        b.index = out.size();
        b.begin = begin;
        b.end = std::min(begin + batch_size, union_keys.size());
        b.low = union_keys[begin].key;
        if (b.end < union_keys.size()) b.high = union_keys[b.end].key;
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<Batch> plan_batches(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                const KeySpec& key, const schema::MappingSet& mapping, std::size_t batch_size) {
    return plan_batches(datadiff::align_union(src, tgt, key, mapping), batch_size);
}

Executor select_executor(std::size_t row_count, std::size_t batch_count, std::size_t requested_workers,
                         std::size_t cores) noexcept {
    if (requested_workers > 0) return {Executor::Kind::Pool, requested_workers};
    if (row_count < kInlineRowLimit) return {Executor::Kind::Inline, 1};
    return {Executor::Kind::Pool, std::max<std::size_t>(1, std::min(std::max<std::size_t>(cores, 1), batch_count))};
}

WorkerPool::WorkerPool(std::size_t workers) {
    for (std::size_t i = 0; i < std::max<std::size_t>(workers, 1); ++i) threads_.emplace_back([this] { loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void()> task) {
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(task));
    }
    work_cv_.notify_one();
}

void WorkerPool::wait() {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && active_ == 0; });
}

void WorkerPool::loop() {
    while (true) {
        std::function<void()> task;
        {
            std::unique_lock lock(mutex_);
            work_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop_front();
            ++active_;
        }
        task(); // callers capture their own exceptions
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        idle_cv_.notify_all();
    }
}

TaskResult run_batch(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                     const std::vector<datadiff::AlignedRow>& union_keys, const Batch& batch,
                     const std::vector<datadiff::ColumnPair>& pairs, double radius) {
    const auto start = Clock::now();
    TaskResult r;
    r.index = batch.index;
    std::size_t bytes = 0;
    for (std::size_t i = batch.begin; i < batch.end; ++i) {
        const auto& row = union_keys[i];
        bytes += key_bytes(row.key) + sizeof(datadiff::AlignedRow);
        auto diff = datadiff::diff_row(src, tgt, row, pairs);
        if (!diff) continue;
        switch (diff->status) {
            case datadiff::RowStatus::Added: r.added.push_back(diff->key); break;
            case datadiff::RowStatus::Removed: r.removed.push_back(diff->key); break;
            case datadiff::RowStatus::Modified:
                for (auto& c : diff->cells) {
                    bytes += cell_bytes(c);
                    r.cells.push_back(std::move(c));
                }
                break;
        }
    }
    r.assignment = cluster::assign(r.cells, radius);
    r.peak_bytes = bytes;
    r.seconds = seconds_since(start);
    return r;
}

MergedDiff merge_results(std::vector<TaskResult> results, std::size_t expected, double radius) {
    std::sort(results.begin(), results.end(), [](const TaskResult& a, const TaskResult& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < expected; ++i) {
        if (i >= results.size() || results[i].index != i)
            throw Error(ErrorCode::MissingBatch, "missing result for batch " + std::to_string(i));
    }
    if (results.size() != expected)
        throw Error(ErrorCode::MissingBatch, "unexpected extra batch results");
    MergedDiff out;
    for (auto& r : results) {
        out.added.insert(out.added.end(), std::make_move_iterator(r.added.begin()),
                         std::make_move_iterator(r.added.end()));
        out.removed.insert(out.removed.end(), std::make_move_iterator(r.removed.begin()),
                           std::make_move_iterator(r.removed.end()));
        out.cells.insert(out.cells.end(), std::make_move_iterator(r.cells.begin()),
                         std::make_move_iterator(r.cells.end()));
        cluster::merge_assignments(out.assignment, std::move(r.assignment), radius);
        out.peak_bytes = std::max(out.peak_bytes, r.peak_bytes);
    }
    return out;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& workspace, Stage stage) {
    return workspace / "checkpoints" / (std::string(to_string(stage)) + ".json");
}

Checkpoint checkpoint_stage(Stage stage, const json& artifact, const std::string& input_hash,
                            const std::filesystem::path& workspace) {
    const json doc = {{"stage", std::string(to_string(stage))},
                      {"input_hash", input_hash},
                      {"payload_hash", content_hash(artifact.dump())},
                      {"payload", artifact}};
    const auto path = checkpoint_path(workspace, stage);
    write_atomic(path, serialize::canonical_dump(doc));
    return {stage, input_hash, path};
}

std::optional<json> read_checkpoint(Stage stage, const std::string& input_hash,
                                    const std::filesystem::path& workspace) {
    const auto path = checkpoint_path(workspace, stage);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("payload") || !doc.contains("payload_hash") ||
        !doc.contains("input_hash") || !doc["payload_hash"].is_string() || !doc["input_hash"].is_string())
        throw Error(ErrorCode::CorruptCheckpoint, "unreadable checkpoint " + path.string());
    if (content_hash(doc["payload"].dump()) != doc["payload_hash"].get<std::string>())
        throw Error(ErrorCode::CorruptCheckpoint, "payload hash mismatch in " + path.string());
    if (doc.value("stage", std::string()) != to_string(stage))
        throw Error(ErrorCode::CorruptCheckpoint, "stage mismatch in " + path.string());
    if (doc["input_hash"].get<std::string>() != input_hash) return std::nullopt;
    return std::move(doc["payload"]);
}

std::optional<json> restore_stage(Stage stage, const std::string& input_hash,
                                  const std::filesystem::path& workspace) {
    try {
        return read_checkpoint(stage, input_hash, workspace);
    } catch (const Error&) {
        return std::nullopt; // recomputed and overwritten
    }
}

std::string input_hash(const JobConfig& config, std::string_view client_identity) {
    ContentHasher h;
    h.update_field(config.echo().dump());
    h.update_field(client_identity);
    for (const auto* s : {&config.source, &config.target}) h.update_field(file_hash(s->path));
    if (!config.workspace.empty()) {
        h.update_field(memory_fingerprint(config.workspace / "memory" / "mappings.json"));
        h.update_field(corpus_fingerprint(config.workspace / "knowledge"));
    }
    return h.hex_digest();
}

json RunStats::to_json() const {
    json stage_list = json::array();
    for (const auto& s : stages)
        stage_list.push_back({{"stage", std::string(engine::to_string(s.stage))}, {"seconds", s.seconds}, {"restored", s.restored}});
    return {{"stages", stage_list},
            {"executor", executor.kind == Executor::Kind::Inline ? "Inline" : "Pool"},
            {"workers", executor.workers},
            {"batch_size", batch_size},
            {"batch_count", batch_count},
            {"diff_seconds", diff_seconds},
            {"peak_batch_bytes", peak_batch_bytes}};
}

JobResult run_job(const JobConfig& config, label::LabelerClient* client) {
    if (!(config.threshold >= 0.0 && config.threshold <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "threshold must lie in [0, 1]");
    if (!(config.radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "radius must be positive");
    if (config.labeling.enabled && config.labeling.k == 0) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");

    std::unique_ptr<label::LabelerClient> owned;
    std::string identity = "custom";
    if (client == nullptr && config.labeling.enabled) {
        if (config.labeler_url.empty()) {
            owned = std::make_unique<label::MockLabelerClient>();
            identity = "mock";
        } else {
            owned = std::make_unique<label::HttpLabelerClient>(config.labeler_url);
            identity = "http:" + config.labeler_url;
        }
        client = owned.get();
    }
    label::LabelConfig labeling = config.labeling;
    labeling.salt = "driftdiff:" + std::to_string(config.seed);

    const bool persist = !config.workspace.empty();
    const std::string hash = persist ? in_stage(Stage::Mapped, [&] { return input_hash(config, identity); }) : "";
    Inputs inputs(config);
    JobResult result;
    auto& stats = result.stats;
    auto& rep = result.report;
    rep.job = config.echo();

    auto restore = [&](Stage s) -> std::optional<json> {
        if (!persist) return std::nullopt;
        return restore_stage(s, hash, config.workspace);
    };
    auto save = [&](Stage s, const json& payload) {
        if (persist) checkpoint_stage(s, payload, hash, config.workspace);
    };
    auto timed = [&](Stage s, auto&& body) {
        const auto start = Clock::now();
        const bool restored = in_stage(s, body);
        stats.stages.push_back({s, seconds_since(start), restored});
    };

    // Mapped
    Schema src_schema;
    Schema tgt_schema;
    timed(Stage::Mapped, [&] {
        if (auto p = restore(Stage::Mapped)) {
            src_schema = serialize::schema_from_json(p->at("source_schema"));
            tgt_schema = serialize::schema_from_json(p->at("target_schema"));
            rep.source_rows = p->at("source_rows").get<std::uint64_t>();
            rep.target_rows = p->at("target_rows").get<std::uint64_t>();
            rep.mapping = serialize::mapping_from_json(p->at("mapping"));
            return true;
        }
        const auto& src = inputs.source();
        const auto& tgt = inputs.target();
        src_schema = src.schema();
        tgt_schema = tgt.schema();
        rep.source_rows = src.row_count();
        rep.target_rows = tgt.row_count();
        schema::MappingMemory memory;
        if (persist) memory = schema::MappingMemory::load(config.workspace / "memory" / "mappings.json");
        const auto matrix = schema::score_candidates(src_schema, tgt_schema, memory);
        rep.mapping = schema::resolve_mapping(matrix, config.threshold, config.overrides);
        save(Stage::Mapped, {{"source_schema", serialize::to_json(src_schema)},
                             {"target_schema", serialize::to_json(tgt_schema)},
                             {"source_rows", rep.source_rows},
                             {"target_rows", rep.target_rows},
                             {"mapping", serialize::to_json(rep.mapping)}});
        return false;
    });

    timed(Stage::MetaDiffed, [&] {
        if (auto p = restore(Stage::MetaDiffed)) {
            rep.metadata = serialize::metadata_from_json(*p);
            return true;
        }
        rep.metadata = schema::metadata_diff(src_schema, tgt_schema, rep.mapping);
        save(Stage::MetaDiffed, serialize::to_json(rep.metadata));
        return false;
    });

    // DataDiffed and Profiled read the same immutable snapshots, so they may overlap.
    const std::size_t row_count = std::max(rep.source_rows, rep.target_rows);
    stats.batch_size = resolve_batch_size(config.batch_size, row_count);
    cluster::Assignment assignment;
    auto restored_diff = restore(Stage::DataDiffed);
    auto restored_profile = restore(Stage::Profiled);
    std::future<profile::SummaryDiff> profiling;

    const auto diff_start = Clock::now();
    in_stage(Stage::DataDiffed, [&] {
        if (restored_diff) {
            const auto& p = *restored_diff;
            for (const auto& k : p.at("added")) rep.added_keys.push_back(serialize::row_key_from_json(k));
            for (const auto& k : p.at("removed")) rep.removed_keys.push_back(serialize::row_key_from_json(k));
            for (const auto& c : p.at("cells")) rep.cells.push_back(serialize::cell_diff_from_json(c));
            assignment = serialize::assignment_from_json(p.at("assignment"));
            stats.batch_count = p.at("batch_count").get<std::size_t>();
            stats.executor = select_executor(row_count, stats.batch_count, config.workers,
                                             std::thread::hardware_concurrency());
            return;
        }
        const auto& src = inputs.source();
        const auto& tgt = inputs.target();
        const auto union_keys = datadiff::align_union(src, tgt, config.key, rep.mapping);
        const auto pairs = datadiff::column_pairs(src.schema(), tgt.schema(), rep.mapping, config.key);
        const auto batches = plan_batches(union_keys, stats.batch_size);
        stats.batch_count = batches.size();
        stats.executor =
            select_executor(row_count, batches.size(), config.workers, std::thread::hardware_concurrency());

        std::vector<TaskResult> results(batches.size());
        if (stats.executor.kind == Executor::Kind::Inline) {
            for (const auto& b : batches) results[b.index] = run_batch(src, tgt, union_keys, b, pairs, config.radius);
        } else {
            WorkerPool pool(stats.executor.workers);
            if (!restored_profile) {
                profiling = std::async(std::launch::async,
                                       [&] { return profile::summarize(src, tgt, rep.mapping); });
            }
            std::vector<std::exception_ptr> errors(batches.size());
            for (const auto& b : batches) {
                pool.submit([&, b] {
                    try {
                        results[b.index] = run_batch(src, tgt, union_keys, b, pairs, config.radius);
                    } catch (...) {
                        errors[b.index] = std::current_exception();
                    }
                });
            }
            pool.wait();
            for (auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }
        auto merged = merge_results(std::move(results), batches.size(), config.radius);
        rep.added_keys = std::move(merged.added);
        rep.removed_keys = std::move(merged.removed);
        rep.cells = std::move(merged.cells);
        assignment = std::move(merged.assignment);
        stats.peak_batch_bytes = merged.peak_bytes;
        stats.diff_seconds = seconds_since(diff_start);
        json cells = json::array();
        for (const auto& c : rep.cells) cells.push_back(serialize::to_json(c));
        save(Stage::DataDiffed, {{"added", serialize::array_of(rep.added_keys, [](const RowKey& k) { return serialize::to_json(k); })},
                                 {"removed", serialize::array_of(rep.removed_keys, [](const RowKey& k) { return serialize::to_json(k); })},
                                 {"cells", cells},
                                 {"assignment", serialize::to_json(assignment)},
                                 {"batch_count", stats.batch_count}});
    });
    stats.stages.push_back({Stage::DataDiffed, seconds_since(diff_start), restored_diff.has_value()});

    timed(Stage::Profiled, [&] {
        if (restored_profile) {
            rep.summary = serialize::summary_from_json(*restored_profile);
            return true;
        }
        rep.summary = profiling.valid() ? profiling.get() : profile::summarize(inputs.source(), inputs.target(), rep.mapping);
        save(Stage::Profiled, serialize::to_json(rep.summary));
        return false;
    });

    timed(Stage::Clustered, [&] {
        if (auto p = restore(Stage::Clustered)) {
            for (const auto& c : *p) rep.clusters.push_back(serialize::cluster_from_json(c));
            return true;
        }
        rep.clusters = cluster::finalize_clusters(assignment, rep.cells);
        save(Stage::Clustered, serialize::array_of(rep.clusters, [](const cluster::Cluster& c) { return serialize::to_json(c); }));
        return false;
    });

    timed(Stage::Labeled, [&] {
        if (auto p = restore(Stage::Labeled)) {
            for (const auto& j : *p) rep.judgments.push_back(serialize::judgment_from_json(j));
            if (rep.judgments.size() != rep.clusters.size())
                throw Error(ErrorCode::CorruptCheckpoint, "judgment count differs from cluster count");
            return true;
        }
        const auto index = persist ? label::KnowledgeIndex::load(config.workspace / "knowledge") : label::KnowledgeIndex{};
        const auto context = pack_context(src_schema, tgt_schema, rep.mapping, config.key, rep.summary);
        rep.judgments = label::label_clusters(rep.clusters, rep.cells, labeling, client, index, context);
        save(Stage::Labeled, serialize::array_of(rep.judgments, [](const label::LabelJudgment& j) { return serialize::to_json(j); }));
        return false;
    });

    report::fill_derived(rep, assignment);
    return result;
}

} // namespace driftdiff::engine

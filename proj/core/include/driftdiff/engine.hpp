// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "driftdiff/ingest.hpp"
#include "driftdiff/label.hpp"
#include "driftdiff/report.hpp"
#include "driftdiff/schema.hpp"

namespace driftdiff::engine {

inline constexpr std::size_t kInlineRowLimit = 100'000;
inline constexpr std::size_t kLargeJobRows = 1'000'000;
inline constexpr std::size_t kSmallBatch = 25'000;
inline constexpr std::size_t kLargeBatch = 250'000;

enum class Modality : std::uint8_t { FileDiff, SourceDiff, QueryDiff };
std::string_view to_string(Modality m);

enum class Stage : std::uint8_t { Mapped, MetaDiffed, DataDiffed, Profiled, Clustered, Labeled };
inline constexpr std::size_t kStageCount = 6;
std::string_view to_string(Stage s);

struct JobConfig {
    Modality modality = Modality::FileDiff;
    ingest::SourceDescriptor source;
    ingest::SourceDescriptor target;
    KeySpec key = KeySpec::surrogate();
    double threshold = schema::kDefaultThreshold;
    std::vector<schema::Override> overrides;
    std::size_t batch_size = 0; // 0 = auto
    std::size_t workers = 0;    // 0 = auto
    double radius = cluster::kDefaultRadius;
    label::LabelConfig labeling;
    std::string labeler_url; // empty = built-in mock client
    std::uint64_t seed = 0;
    std::filesystem::path workspace; // empty = no checkpoints, memory or knowledge

    /// Everything that can change the report. Workers and workspace are left
    /// out so reports compare equal across executors and directories.
    nlohmann::json echo() const;
};

/// 25k rows per batch up to 1M rows, 250k beyond; an explicit size wins.
std::size_t resolve_batch_size(std::size_t requested, std::size_t row_count) noexcept;

struct Batch {
    std::size_t index = 0;
    std::size_t begin = 0; // into the key-sorted union
    std::size_t end = 0;
    RowKey low;                 // inclusive
    std::optional<RowKey> high; // exclusive; nullopt for the last batch
};

/// Contiguous ranges of at most batch_size union keys.
std::vector<Batch> plan_batches(const std::vector<datadiff::AlignedRow>& union_keys, std::size_t batch_size);

/// Aligns both snapshots, then splits the key union.
std::vector<Batch> plan_batches(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                                const KeySpec& key, const schema::MappingSet& mapping, std::size_t batch_size);

struct Executor {
    enum class Kind : std::uint8_t { Inline, Pool };
    Kind kind = Kind::Inline;
    std::size_t workers = 1;

    bool operator==(const Executor&) const = default;
};

/// Inline below 100k rows with auto workers; otherwise a pool of
/// min(cores, batches) workers. An explicit worker count always wins.
Executor select_executor(std::size_t row_count, std::size_t batch_count, std::size_t requested_workers,
                         std::size_t cores) noexcept;

/// Fixed-size FIFO thread pool.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    void submit(std::function<void()> task);
    /// Blocks until every submitted task has finished.
    void wait();
    std::size_t size() const noexcept { return threads_.size(); }

private:
    void loop();

    std::vector<std::thread> threads_;
    std::deque<std::function<void()>> queue_;
    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable idle_cv_;
    std::size_t active_ = 0;
    bool stopping_ = false;
};

struct TaskResult {
    std::size_t index = 0;
    std::vector<RowKey> added;
    std::vector<RowKey> removed;
    std::vector<datadiff::CellDiff> cells;
    cluster::Assignment assignment;
    double seconds = 0;
    std::size_t peak_bytes = 0; // estimate: batch keys plus produced diffs
};

/// Diffs and clusters one batch. Reads the snapshots only.
TaskResult run_batch(const ingest::TableSnapshot& src, const ingest::TableSnapshot& tgt,
                     const std::vector<datadiff::AlignedRow>& union_keys, const Batch& batch,
                     const std::vector<datadiff::ColumnPair>& pairs, double radius);

struct MergedDiff {
    std::vector<RowKey> added;
    std::vector<RowKey> removed;
    std::vector<datadiff::CellDiff> cells;
    cluster::Assignment assignment;
    std::size_t peak_bytes = 0; // largest batch estimate
};

/// Consumes results in batch-index order whatever order they arrive in.
/// Throws MissingBatch unless indices are exactly 0..expected-1.
MergedDiff merge_results(std::vector<TaskResult> results, std::size_t expected, double radius);

struct Checkpoint {
    Stage stage = Stage::Mapped;
    std::string input_hash;
    std::filesystem::path path;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& workspace, Stage stage);

/// Writes {stage, input_hash, payload_hash, payload} atomically.
Checkpoint checkpoint_stage(Stage stage, const nlohmann::json& artifact, const std::string& input_hash,
                            const std::filesystem::path& workspace);

/// Throws CorruptCheckpoint when the file is unreadable or its payload hash is off.
std::optional<nlohmann::json> read_checkpoint(Stage stage, const std::string& input_hash,
                                              const std::filesystem::path& workspace);

/// Like read_checkpoint, but a corrupt file counts as absent.
std::optional<nlohmann::json> restore_stage(Stage stage, const std::string& input_hash,
                                            const std::filesystem::path& workspace);

/// Content hash of the config echo, the source fingerprints, mapping memory,
/// the knowledge corpus and the labeler identity.
std::string input_hash(const JobConfig& config, std::string_view client_identity);

struct StageTiming {
    Stage stage = Stage::Mapped;
    double seconds = 0;
    bool restored = false;
};

struct RunStats {
    std::vector<StageTiming> stages;
    Executor executor;
    std::size_t batch_size = 0;
    std::size_t batch_count = 0;
    double diff_seconds = 0; // differencing phase: alignment, batches, merge
    std::size_t peak_batch_bytes = 0;

    nlohmann::json to_json() const;
};

struct JobResult {
    report::Report report;
    RunStats stats;
};

/// Runs every stage in order, reusing matching checkpoints. `client`
/// overrides the client the config would build (nullptr = from config).
JobResult run_job(const JobConfig& config, label::LabelerClient* client = nullptr);

} // namespace driftdiff::engine

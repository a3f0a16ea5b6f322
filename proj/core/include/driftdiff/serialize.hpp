// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "driftdiff/label.hpp"
#include "driftdiff/profile.hpp"
#include "driftdiff/schema.hpp"
#include "driftdiff/types.hpp"

// JSON forms shared by checkpoints and reports. Every *_from_json inverts the
// matching to_json exactly and throws Error(CorruptCheckpoint) on bad shape.
namespace driftdiff::serialize {

using nlohmann::json;

/// Sorted keys, two-space indent, shortest round-trip floats, trailing LF.
std::string canonical_dump(const json& j);

json to_json(const Schema& s);
Schema schema_from_json(const json& j);

json to_json(const KeySpec& k);
KeySpec key_spec_from_json(const json& j);

json to_json(const RowKey& k);
RowKey row_key_from_json(const json& j);

/// {raw, type[, null]}; loading reparses raw under type.
json to_json(const Value& v);
Value value_from_json(const json& j);

json to_json(const schema::MappingSet& m);
schema::MappingSet mapping_from_json(const json& j);

json to_json(const schema::MetadataDiff& d);
schema::MetadataDiff metadata_from_json(const json& j);

json to_json(const profile::ColumnProfile& p);
profile::ColumnProfile profile_from_json(const json& j);

json to_json(const profile::DistributionDelta& d);
profile::DistributionDelta distribution_delta_from_json(const json& j);

json to_json(const profile::SummaryDiff& s);
profile::SummaryDiff summary_from_json(const json& j);

json to_json(const datadiff::DiffDetail& d);
datadiff::DiffDetail detail_from_json(const json& j);

json to_json(const datadiff::CellDiff& d);
datadiff::CellDiff cell_diff_from_json(const json& j);

json to_json(const cluster::StreamState& s);
cluster::StreamState stream_state_from_json(const json& j);

json to_json(const cluster::Assignment& a);
cluster::Assignment assignment_from_json(const json& j);

json to_json(const cluster::Cluster& c);
cluster::Cluster cluster_from_json(const json& j);

json to_json(const label::LabelJudgment& j);
label::LabelJudgment judgment_from_json(const json& j);

template <class T, class F>
json array_of(const std::vector<T>& items, F&& convert) {
    json out = json::array();
    for (const auto& item : items) out.push_back(convert(item));
    return out;
}

} // namespace driftdiff::serialize

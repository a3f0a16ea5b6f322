// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "driftdiff/label.hpp"

namespace driftdiff::label {

/// Offline rule-driven client. Reads candidate_patterns and the evidence rows
/// out of the prompt and answers with the implied labels; dynamic clusters are
/// labeled from the shape of their evidence.
class MockLabelerClient final : public LabelerClient {
public:
    std::string complete(const std::string& prompt, const nlohmann::json& output_schema,
                         double temperature) override;
};

/// Adversarial client for property tests. Output is a pure function of the
/// seed and the prompt: random bytes, broken JSON, out-of-ontology labels,
/// unknown columns or ids, and occasionally a valid judgment.
class FuzzLabelerClient final : public LabelerClient {
public:
    explicit FuzzLabelerClient(std::uint64_t seed) : seed_(seed) {}
    std::string complete(const std::string& prompt, const nlohmann::json& output_schema,
                         double temperature) override;

private:
    std::uint64_t seed_;
};

/// POSTs {prompt, schema, temperature} as JSON to `url` and reads {text}.
/// Any transport or protocol failure throws Error(ClientUnavailable).
class HttpLabelerClient final : public LabelerClient {
public:
    explicit HttpLabelerClient(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    std::string complete(const std::string& prompt, const nlohmann::json& output_schema,
                         double temperature) override;

private:
    std::string origin_; // scheme://host[:port]
    std::string path_;
    std::chrono::milliseconds timeout_;
};

} // namespace driftdiff::label

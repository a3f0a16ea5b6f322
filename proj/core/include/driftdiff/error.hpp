// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftdiff {

enum class ErrorCode {
    UnreadableSource,
    RaggedRow,
    EmptyInput,
    DuplicateColumn,
    QueryFailed,
    NonReadOnlyQuery,
    ConflictingOverrides,
    UnknownColumn,
    DuplicateKey,
    KeyNotMapped,
    IncomparableProfiles,
    NoValidCandidates,
    ClientUnavailable,
    MissingBatch,
    CorruptCheckpoint,
    SeedMismatch,
    InvalidConfig,
    StageFailed,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace driftdiff
